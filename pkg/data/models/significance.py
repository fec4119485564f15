"""
Significance test models.
"""
from typing import ClassVar, Optional
import enum

from pydantic import PositiveInt, Field, field_validator

from .base import BaseSchema


class TestName(enum.Enum):
    """The five paired two-tailed tests."""
    __test__ = False

    T = "t"
    BOOTSTRAP = "bootstrap"
    RANDOMIZATION = "randomization"
    SIGN = "sign"
    WILCOXON = "wilcoxon"


class TestMethod(enum.Enum):
    """How a p-value was obtained."""
    __test__ = False

    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"
    NORMAL_APPROX = "normal-approx"
    DEGENERATE = "degenerate"


class TestResult(BaseSchema):
    """Outcome of one paired test."""
    __test__: ClassVar[bool] = False

    test_name: TestName
    statistic: float
    p_value: float = Field(ge=0.0, le=1.0)
    method: TestMethod
    resamples_used: int = Field(default=0, ge=0)
    effective_n: int = Field(ge=0)
    seed: int = 0


class ResamplingConfig(BaseSchema):
    """Resample counts and the seed shared by the resampling tests."""

    bootstrap_B: PositiveInt = 10_000
    randomization_R: PositiveInt = 10_000
    exact_threshold: PositiveInt = 20
    seed: int = 0

    @field_validator("seed")
    @classmethod
    def _check_seed(cls, seed: int) -> int:
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return seed

    @classmethod
    def from_settings(cls, seed: Optional[int] = None) -> "ResamplingConfig":
        from config.settings import settings

        return cls(
            bootstrap_B=settings.bootstrap_resamples,
            randomization_R=settings.randomization_resamples,
            exact_threshold=settings.exact_threshold,
            seed=settings.seed if seed is None else seed,
        )
