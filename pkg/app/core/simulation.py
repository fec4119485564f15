"""
Generative simulation model.

A model holds one fitted marginal per system and one copula per system pair.
Null pairs push both copula coordinates through the same marginal; effect
pairs push the experimental coordinate through a marginal shifted to the
baseline mean plus the requested effect.
"""
import os
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError

from config.settings import settings
from data.models.distributions import CopulaFamily, CopulaModel, MarginalFamily, MarginalModel
from data.models.evaluation import EvaluationMatrix
from data.models.simulation import EffectEntry, EffectSpec, PitMode, SimulationModel
from app.core import copulas, marginals
from app.core.exceptions import ConfigurationError, FitError, IngestError, InputError, UnknownSystemError

PathLike = Union[str, "os.PathLike[str]"]


@dataclass(frozen=True)
class PairScenario:
    """A copula with the marginals applied to its baseline and experimental coordinates."""

    copula: CopulaModel
    baseline_id: str
    experimental_id: str
    baseline: MarginalModel
    experimental: MarginalModel

    def draw(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        """Sample ``n`` paired scores (b, e)."""
        sample = copulas.sample_copula(self.copula, n, rng)
        if self.copula.systems[0] == self.baseline_id:
            v_b, v_e = sample.u, sample.v
        else:
            v_b, v_e = sample.v, sample.u
        b = np.asarray(marginals.inverse_cdf(self.baseline, v_b), dtype=float)
        e = np.asarray(marginals.inverse_cdf(self.experimental, v_e), dtype=float)
        return b, e


def _effect_entry(first: str, second: str, model_marginals) -> EffectEntry:
    mean_first, mean_second = model_marginals[first].mean, model_marginals[second].mean
    if mean_second < mean_first:
        first, second = second, first
    return EffectEntry(baseline=first, experimental=second, gap=abs(mean_second - mean_first))


def fit_simulation_model(matrix: EvaluationMatrix,
                         candidates: Optional[Iterable[Union[MarginalFamily, str]]] = None,
                         copula_families: Optional[Iterable[Union[CopulaFamily, str]]] = None,
                         seed: Optional[int] = None,
                         pairs: Optional[Sequence[Tuple[str, str]]] = None,
                         pit: PitMode = PitMode.RANK) -> SimulationModel:
    """
    Fit marginals, copulas and the effect index of an evaluation matrix.

    Args:
        matrix: Per-request scores of every system
        candidates: Marginal families to try (metric defaults when None)
        copula_families: Copula families to try (all when None)
        seed: Recorded on the model for provenance
        pairs: Restrict copulas to these system pairs (all pairs when None)
        pit: Pseudo-observation transform used for copula fitting

    Returns:
        SimulationModel
    """
    pit = PitMode(pit)
    candidates = None if candidates is None else list(candidates)
    copula_families = None if copula_families is None else list(copula_families)
    if matrix.n_requests < settings.min_copula_requests:
        raise InputError(f"fitting copulas needs at least {settings.min_copula_requests} requests, "
                         f"matrix has {matrix.n_requests}")
    support = marginals.support_for_metric(matrix.metric_name, matrix.cutoff)

    fitted = {}
    for system_id in matrix.system_ids:
        try:
            model, report = marginals.select_marginal(matrix.column(system_id), candidates, support,
                                                      metric_name=matrix.metric_name)
        except FitError as e:
            raise FitError(str(e), system_id=system_id) from e
        fitted[system_id] = model
        logger.info(f"System {system_id}: {report.family.value} marginal, mean={model.mean:.4f}, aic={report.aic:.2f}")

    if pairs is None:
        wanted = list(combinations(matrix.system_ids, 2))
    else:
        wanted = []
        for first, second in pairs:
            for system_id in (first, second):
                if not matrix.has_system(system_id):
                    raise UnknownSystemError(system_id)
            if first == second:
                raise ConfigurationError(f"a pair needs two different systems, got ({first}, {second})")
            wanted.append(tuple(sorted((first, second))))
        wanted = list(dict.fromkeys(wanted))

    fitted_copulas: List[CopulaModel] = []
    for first, second in wanted:
        observations = copulas.pseudo_observations(
            matrix.column(first), matrix.column(second), pit=pit,
            marginal_x=fitted[first], marginal_y=fitted[second],
        )
        fitted_copulas.append(copulas.fit_copula(observations, copula_families, systems=(first, second)))

    effect_index = sorted(
        (_effect_entry(first, second, fitted) for first, second in wanted),
        key=lambda entry: (entry.gap, entry.baseline, entry.experimental),
    )
    logger.info(f"Fitted simulation model: {len(fitted)} marginals, {len(fitted_copulas)} copulas")
    return SimulationModel(
        marginals=fitted,
        copulas=fitted_copulas,
        effect_index=effect_index,
        metric_name=matrix.metric_name,
        cutoff=matrix.cutoff,
        pit=pit,
        fit_seed=settings.seed if seed is None else seed,
    )


def null_scenario(model: SimulationModel, pair: Tuple[str, str]) -> PairScenario:
    """Null scenario of a pair: both coordinates use the first system's marginal."""
    try:
        copula = model.copula_for(*pair)
    except KeyError:
        raise ConfigurationError(f"pair {tuple(pair)} has no fitted copula") from None
    baseline_id, experimental_id = copula.systems
    shared = model.marginals[baseline_id]
    return PairScenario(copula=copula, baseline_id=baseline_id, experimental_id=experimental_id,
                        baseline=shared, experimental=shared)


def select_effect_pair(model: SimulationModel, delta: float) -> EffectEntry:
    """Pair whose mean gap is nearest ``delta``; ties go to the smaller gap, then to the ids."""
    if not model.effect_index:
        raise ConfigurationError("the simulation model has no system pairs")
    return min(
        model.effect_index,
        key=lambda entry: (round(abs(entry.gap - delta), 9), entry.gap, entry.baseline, entry.experimental),
    )


def effect_scenario(model: SimulationModel, spec: EffectSpec) -> PairScenario:
    """
    Effect scenario for ``spec.delta``: the experimental marginal is shifted
    so that its mean is exactly the baseline mean plus delta.
    """
    entry = select_effect_pair(model, spec.delta)
    baseline = model.marginals[entry.baseline]
    target = baseline.mean + spec.delta
    if target >= 1.0:
        raise ConfigurationError(
            f"effect {spec.delta} on baseline {entry.baseline} (mean {baseline.mean:.4f}) reaches mean {target:.4f} >= 1"
        )
    experimental = marginals.transform_mean(model.marginals[entry.experimental], target)
    logger.debug(f"Effect {spec.delta}: pair ({entry.baseline}, {entry.experimental}) with fitted gap {entry.gap:.4f}")
    return PairScenario(copula=model.copula_for(*entry.pair), baseline_id=entry.baseline,
                        experimental_id=entry.experimental, baseline=baseline, experimental=experimental)


def simulate_null_pair(model: SimulationModel, pair: Tuple[str, str], n: int,
                       rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` null score pairs for ``pair``."""
    return null_scenario(model, pair).draw(n, rng)


def simulate_effect_pair(model: SimulationModel, spec: EffectSpec, n: int,
                         rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` score pairs whose population means differ by ``spec.delta``."""
    return effect_scenario(model, spec).draw(n, rng)


def save_model(model: SimulationModel, path: PathLike) -> None:
    """Write the model bundle as JSON."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(model.model_dump_json(indent=2))
    logger.info(f"Saved simulation model to {path}")


def load_model(path: PathLike) -> SimulationModel:
    """Read a model bundle written by save_model."""
    path = str(path)
    if not os.path.exists(path):
        raise IngestError("model bundle does not exist", path=path)
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        return SimulationModel.model_validate_json(text)
    except ValidationError as e:
        raise IngestError(f"invalid model bundle: {e.errors()[0]['msg']}", path=path) from None
