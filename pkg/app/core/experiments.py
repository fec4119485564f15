"""
Type-I error and power experiments over a fitted simulation model.

Trials are grouped into batches of ``trials_per_task`` and executed on a dask
thread pool. Every trial draws from its own stream keyed by
(seed, experiment, n, delta, trial), so results do not depend on the number
of threads or the order in which batches finish.
"""
import sys
from typing import List, Optional, Sequence, Tuple, Union

import dask
import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from config.settings import settings
from data.models.significance import TestName
from data.models.simulation import (
    ARCHIVE_COLUMNS, EffectSpec, ExperimentConfig, ExperimentKind, ExperimentReport, ReportRow, SimulationModel
)
from app.core.exceptions import ConfigurationError
from app.core.rng import derive_seed, stream
from app.core.simulation import PairScenario, effect_scenario, null_scenario
from app.core.stat_tests import run_all_tests


def _run_trials(scenarios: Sequence[PairScenario], kind: ExperimentKind, n: int, delta: float,
                start: int, stop: int, cfg: ExperimentConfig) -> np.ndarray:
    """p-values of trials [start, stop), one row per trial and one column per configured test."""
    p_values = np.empty((stop - start, len(cfg.tests)))
    for row, trial in enumerate(range(start, stop)):
        keys = (kind.value, int(n), float(delta), int(trial))
        rng = stream(cfg.seed, *keys)
        scenario = scenarios[int(rng.integers(len(scenarios)))]
        b, e = scenario.draw(n, rng)
        resampling = cfg.resampling.model_copy(update={"seed": derive_seed(cfg.seed, *keys, "resampling")})
        results = run_all_tests(b, e, resampling, cfg.tests)
        p_values[row] = [results[test].p_value for test in cfg.tests]
    return p_values


def _run_cell(scenarios: Sequence[PairScenario], kind: ExperimentKind, n: int, delta: float,
              cfg: ExperimentConfig) -> np.ndarray:
    tasks = [
        dask.delayed(_run_trials, pure=False)(scenarios, kind, n, delta, start,
                                              min(start + cfg.trials_per_task, cfg.trials), cfg)
        for start in range(0, cfg.trials, cfg.trials_per_task)
    ]
    scheduler = "threads" if cfg.threads > 1 else "synchronous"
    batches = dask.compute(*tasks, scheduler=scheduler, num_workers=cfg.threads)
    return np.vstack(batches)


def _rows_for_cell(p_values: np.ndarray, n: int, delta: float, cfg: ExperimentConfig) -> List[ReportRow]:
    rows = []
    for column, test in enumerate(cfg.tests):
        for alpha in cfg.alphas:
            rejections = int(np.count_nonzero(p_values[:, column] <= alpha))
            rows.append(ReportRow.build(test, n, alpha, delta, rejections, cfg.trials))
    return rows


def _archive_for_cell(p_values: np.ndarray, kind: ExperimentKind, n: int, delta: float,
                      cfg: ExperimentConfig) -> pd.DataFrame:
    trials, tests = p_values.shape
    return pd.DataFrame({
        "experiment": kind.value,
        "n": n,
        "delta": delta,
        "trial": np.repeat(np.arange(trials), tests),
        "test": np.tile([test.value for test in cfg.tests], trials),
        "p_value": p_values.ravel(),
    }, columns=ARCHIVE_COLUMNS)


def _run_experiment(kind: ExperimentKind, cells: Sequence[Tuple[float, Sequence[PairScenario]]],
                    cfg: ExperimentConfig, progress: bool) -> ExperimentReport:
    rows: List[ReportRow] = []
    archive: List[pd.DataFrame] = []
    total = len(cells) * len(cfg.sample_sizes) * cfg.trials
    with tqdm(total=total, desc=kind.value, unit="trial", file=sys.stderr, disable=not progress) as bar:
        for delta, scenarios in cells:
            for n in cfg.sample_sizes:
                p_values = _run_cell(scenarios, kind, n, delta, cfg)
                rows.extend(_rows_for_cell(p_values, n, delta, cfg))
                if cfg.archive:
                    archive.append(_archive_for_cell(p_values, kind, n, delta, cfg))
                bar.update(cfg.trials)
                logger.debug(f"{kind.value}: finished n={n} delta={delta} ({cfg.trials} trials)")
    p_values_frame = pd.concat(archive, ignore_index=True) if archive else None
    logger.info(f"{kind.value} experiment finished: {len(rows)} report rows")
    return ExperimentReport(kind=kind, rows=rows, p_values=p_values_frame)


def type1_experiment(model: SimulationModel, cfg: ExperimentConfig, progress: bool = False) -> ExperimentReport:
    """
    False-positive rates under the null.

    Each trial picks one of the model's pairs uniformly at random from its own
    stream, draws a null pair of size n and runs the configured tests.

    Args:
        model: Fitted simulation model
        cfg: Experiment grid; deltas are ignored
        progress: Show a progress bar on stderr

    Returns:
        ExperimentReport with delta = 0 on every row
    """
    if not model.pairs:
        raise ConfigurationError("the simulation model has no system pairs")
    scenarios = [null_scenario(model, pair) for pair in model.pairs]
    logger.info(f"Type-I experiment: {len(cfg.sample_sizes)} sample sizes x {cfg.trials} trials "
                f"over {len(scenarios)} pairs, {cfg.threads} threads")
    return _run_experiment(ExperimentKind.TYPE1, [(0.0, scenarios)], cfg, progress)


def power_experiment(model: SimulationModel, cfg: ExperimentConfig, progress: bool = False) -> ExperimentReport:
    """
    Rejection rates when the experimental mean exceeds the baseline mean by delta.

    Raises:
        ConfigurationError: empty delta grid, or an effect that pushes the mean to 1
    """
    if not cfg.deltas:
        raise ConfigurationError("power experiments need at least one delta")
    cells = [(float(delta), [effect_scenario(model, EffectSpec(delta=delta))]) for delta in cfg.deltas]
    logger.info(f"Power experiment: {len(cfg.deltas)} deltas x {len(cfg.sample_sizes)} sample sizes "
                f"x {cfg.trials} trials, {cfg.threads} threads")
    return _run_experiment(ExperimentKind.POWER, cells, cfg, progress)


def calibration_curve(report: ExperimentReport, test: Union[TestName, str], n: int,
                      alphas: Optional[Sequence[float]] = None,
                      delta: Optional[float] = None) -> List[Tuple[float, float]]:
    """
    Empirical CDF of archived p-values on an alpha grid.

    Args:
        report: Report carrying a p-value archive
        test: Test whose p-values are used
        n: Sample size
        alphas: Grid (defaults to calibration_points evenly spaced levels up to 1)
        delta: Restrict to one effect size (all archived deltas when None)

    Returns:
        List of (alpha, fraction of p-values <= alpha)
    """
    if report.p_values is None:
        raise ConfigurationError("the report has no p-value archive; rerun with --archive")
    test = TestName(test)
    archive = report.p_values
    mask = (archive["test"] == test.value) & (archive["n"] == n)
    if delta is not None:
        mask &= np.isclose(archive["delta"].to_numpy(dtype=float), delta)
    p = np.sort(archive.loc[mask, "p_value"].to_numpy(dtype=float))
    if p.size == 0:
        raise ConfigurationError(f"the archive holds no p-values for test {test.value} at n={n}")
    if alphas is None:
        points = settings.calibration_points
        grid = np.linspace(1.0 / points, 1.0, points)
    else:
        grid = np.asarray(alphas, dtype=float)
    rates = np.searchsorted(p, grid, side="right") / p.size
    return [(float(alpha), float(rate)) for alpha, rate in zip(grid, rates)]
