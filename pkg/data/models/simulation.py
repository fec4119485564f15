"""
Simulation model and experiment schemas.
"""
from typing import Dict, List, Optional, Tuple
import enum
import math

import pandas as pd
from pydantic import Field, PositiveInt, field_validator, model_validator

from .base import BaseSchema, ArraySchema
from .distributions import CopulaModel, MarginalModel
from .significance import ResamplingConfig, TestName


class PitMode(enum.Enum):
    """How raw scores become pseudo-observations for copula fitting."""
    RANK = "rank"
    PARAMETRIC = "parametric"


class ExperimentKind(enum.Enum):
    """Experiment protocols."""
    TYPE1 = "type1"
    POWER = "power"


class EffectEntry(BaseSchema):
    """Mean gap between two fitted systems, oriented baseline -> experimental."""

    baseline: str
    experimental: str
    gap: float = Field(ge=0.0)

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.baseline, self.experimental)


class SimulationModel(BaseSchema):
    """Marginals, pairwise copulas and the effect index of one evaluation matrix."""

    marginals: Dict[str, MarginalModel]
    copulas: List[CopulaModel]
    effect_index: List[EffectEntry]
    metric_name: str = "unknown"
    cutoff: Optional[int] = None
    pit: PitMode = PitMode.RANK
    fit_seed: int = 0

    @model_validator(mode="after")
    def _check_model(self) -> "SimulationModel":
        for copula in self.copulas:
            if copula.systems is None:
                raise ValueError("every copula must name its system pair")
            for system_id in copula.systems:
                if system_id not in self.marginals:
                    raise ValueError(f"copula references system {system_id} without a marginal")
        keys = [(entry.gap, entry.baseline, entry.experimental) for entry in self.effect_index]
        if keys != sorted(keys):
            raise ValueError("effect index must be sorted ascending by mean gap")
        return self

    @property
    def pairs(self) -> List[Tuple[str, str]]:
        return [copula.systems for copula in self.copulas]

    def copula_for(self, first: str, second: str) -> CopulaModel:
        """Copula of a system pair, in either order."""
        wanted = {first, second}
        for copula in self.copulas:
            if set(copula.systems) == wanted:
                return copula
        raise KeyError(f"no copula fitted for pair ({first}, {second})")


class EffectSpec(BaseSchema):
    """Target improvement of the experimental system's mean."""

    delta: float = Field(ge=0.0)
    direction: str = "+"

    @field_validator("direction")
    @classmethod
    def _check_direction(cls, direction: str) -> str:
        if direction != "+":
            raise ValueError("only positive effects are simulated")
        return direction


class ExperimentConfig(BaseSchema):
    """Grid and Monte-Carlo settings of one experiment run."""

    sample_sizes: List[PositiveInt]
    trials: int = Field(ge=100)
    alphas: List[float]
    deltas: List[float] = Field(default_factory=list)
    seed: int = 0
    tests: List[TestName] = Field(default_factory=lambda: list(TestName))
    resampling: ResamplingConfig = Field(default_factory=ResamplingConfig)
    threads: PositiveInt = 1
    trials_per_task: PositiveInt = 25
    archive: bool = False

    @field_validator("sample_sizes")
    @classmethod
    def _check_sizes(cls, sizes: List[int]) -> List[int]:
        if not sizes:
            raise ValueError("sample size grid must not be empty")
        if min(sizes) < 2:
            raise ValueError("paired tests need at least 2 requests")
        return sizes

    @field_validator("alphas")
    @classmethod
    def _check_alphas(cls, alphas: List[float]) -> List[float]:
        if not alphas:
            raise ValueError("alpha grid must not be empty")
        for alpha in alphas:
            if not 0.0 < alpha < 1.0:
                raise ValueError(f"alpha {alpha} must lie in (0, 1)")
        return alphas

    @field_validator("deltas")
    @classmethod
    def _check_deltas(cls, deltas: List[float]) -> List[float]:
        for delta in deltas:
            if delta < 0.0 or not math.isfinite(delta):
                raise ValueError(f"delta {delta} must be a finite non-negative number")
        return deltas

    @field_validator("tests")
    @classmethod
    def _check_tests(cls, tests: List[TestName]) -> List[TestName]:
        if not tests:
            raise ValueError("at least one test must be selected")
        return list(dict.fromkeys(tests))


class ReportRow(BaseSchema):
    """Rejection rate of one test at one grid point."""

    test_name: TestName
    n: int
    alpha: float
    delta: float
    rejection_rate: float = Field(ge=0.0, le=1.0)
    trials: int
    monte_carlo_se: float

    @classmethod
    def build(cls, test_name: TestName, n: int, alpha: float, delta: float,
              rejections: int, trials: int) -> "ReportRow":
        rate = rejections / trials
        return cls(
            test_name=test_name,
            n=n,
            alpha=alpha,
            delta=delta,
            rejection_rate=rate,
            trials=trials,
            monte_carlo_se=math.sqrt(rate * (1.0 - rate) / trials),
        )


REPORT_COLUMNS = ["experiment", "test", "n", "alpha", "delta", "rejection_rate", "trials", "monte_carlo_se"]
ARCHIVE_COLUMNS = ["experiment", "n", "delta", "trial", "test", "p_value"]


class ExperimentReport(ArraySchema):
    """Rejection-rate table plus an optional raw p-value archive."""

    kind: ExperimentKind
    rows: List[ReportRow]
    p_values: Optional[pd.DataFrame] = None

    def to_frame(self) -> pd.DataFrame:
        """Long-format table, one row per (test, n, alpha, delta)."""
        records = [
            {
                "experiment": self.kind.value,
                "test": row.test_name.value,
                "n": row.n,
                "alpha": row.alpha,
                "delta": row.delta,
                "rejection_rate": row.rejection_rate,
                "trials": row.trials,
                "monte_carlo_se": row.monte_carlo_se,
            }
            for row in self.rows
        ]
        return pd.DataFrame.from_records(records, columns=REPORT_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, p_values: Optional[pd.DataFrame] = None) -> "ExperimentReport":
        missing = set(REPORT_COLUMNS) - set(frame.columns)
        if missing:
            raise ValueError(f"report is missing columns: {sorted(missing)}")
        if frame.empty:
            raise ValueError("report has no rows")
        kinds = frame["experiment"].unique()
        if len(kinds) != 1:
            raise ValueError("a report holds exactly one experiment kind")
        rows = [
            ReportRow(
                test_name=TestName(record["test"]),
                n=int(record["n"]),
                alpha=float(record["alpha"]),
                delta=float(record["delta"]),
                rejection_rate=float(record["rejection_rate"]),
                trials=int(record["trials"]),
                monte_carlo_se=float(record["monte_carlo_se"]),
            )
            for record in frame.to_dict(orient="records")
        ]
        return cls(kind=ExperimentKind(kinds[0]), rows=rows, p_values=p_values)
