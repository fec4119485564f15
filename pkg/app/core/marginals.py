"""
Per-system score distributions: fitting, selection, CDF / quantile functions
and mean transformation.

Families:
    truncated-normal  normal on [0, 1], params [loc, scale]
    beta              params [alpha, beta]; scores clamped into (eps, 1 - eps)
    beta-binomial     beta-binomial over the positions 0..K-1 of a declared
                      discrete support, params [alpha, beta]
    discrete-kde      Dirichlet-smoothed empirical probabilities over a
                      declared (or the empirical) support
"""
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import optimize, stats

from config.settings import settings, METRIC_CONFIGS
from data.models.distributions import FitReport, MarginalFamily, MarginalModel
from app.core.exceptions import FitError, UnreachableMeanError
from app.core.metrics import rr_support
from app.core.rng import open_uniform

ArrayLike = Union[float, Sequence[float], np.ndarray]

SUPPORT_TOLERANCE = 1e-9
MIN_FIT_SIZE = 10
_LOG_PARAM_BOUNDS = (-12.0, 12.0)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _check_scores(scores: Sequence[float]) -> np.ndarray:
    x = np.asarray(scores, dtype=float).ravel()
    if x.size < MIN_FIT_SIZE:
        raise ValueError(f"need at least {MIN_FIT_SIZE} scores to fit a marginal, got {x.size}")
    if not np.all(np.isfinite(x)) or x.min() < 0.0 or x.max() > 1.0:
        raise ValueError("scores must be finite and lie in [0, 1]")
    return x


def _truncnorm(loc: float, scale: float):
    return stats.truncnorm((0.0 - loc) / scale, (1.0 - loc) / scale, loc=loc, scale=scale)


def _support_positions(x: np.ndarray, support: np.ndarray, family: MarginalFamily) -> np.ndarray:
    """Index of the support point matching each score; off-support scores are an error."""
    if support.size == 1:
        nearest = np.zeros(x.size, dtype=int)
    else:
        pos = np.clip(np.searchsorted(support, x), 1, support.size - 1)
        left, right = support[pos - 1], support[pos]
        nearest = np.where(np.abs(x - left) <= np.abs(right - x), pos - 1, pos)
    off = np.abs(support[nearest] - x) > SUPPORT_TOLERANCE
    if np.any(off):
        value = float(x[np.flatnonzero(off)[0]])
        raise FitError(f"observed value {value!r} is not on the declared support", family=family.value)
    return nearest


def _as_support(support: Iterable[float]) -> np.ndarray:
    values = np.unique(np.asarray(list(support), dtype=float))
    if values.size == 0 or values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("support points must lie in [0, 1]")
    return values


def _discrete_model(family: MarginalFamily, support: np.ndarray, probabilities: np.ndarray,
                    params: Sequence[float] = ()) -> MarginalModel:
    probabilities = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    probabilities = probabilities / probabilities.sum()
    mean = float(np.clip(np.dot(support, probabilities), 0.0, 1.0))
    return MarginalModel(
        family=family,
        params=[float(p) for p in params],
        support=[float(s) for s in support],
        probabilities=[float(p) for p in probabilities],
        mean=mean,
    )


def _betabinom_probabilities(size: int, a: float, b: float) -> np.ndarray:
    return stats.betabinom.pmf(np.arange(size), size - 1, a, b)


def beta_binomial_model(support: Sequence[float], alpha: float, beta: float) -> MarginalModel:
    """Beta-binomial marginal over the positions of a discrete support."""
    points = _as_support(support)
    if points.size < 2:
        raise ValueError("beta-binomial needs at least two support points")
    return _discrete_model(MarginalFamily.BETA_BINOMIAL, points, _betabinom_probabilities(points.size, alpha, beta),
                           params=[alpha, beta])


def _bisect(func: Callable[[float], float], lo: float, hi: float) -> float:
    return optimize.bisect(func, lo, hi, xtol=settings.solver_tolerance, rtol=4 * np.finfo(float).eps, maxiter=500)


def support_for_metric(metric_name: Optional[str], cutoff: Optional[int]) -> Optional[List[float]]:
    """Declared discrete support of a metric, or None for continuous metrics."""
    if metric_name == "rr":
        return rr_support(cutoff or settings.rr_cutoff)
    return None


def default_candidates(metric_name: Optional[str]) -> List[MarginalFamily]:
    config = METRIC_CONFIGS.get(metric_name or "default", METRIC_CONFIGS["default"])
    return [MarginalFamily(name) for name in config["marginal_candidates"]]


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def _fit_truncated_normal(x: np.ndarray) -> Tuple[MarginalModel, FitReport]:
    family = MarginalFamily.TRUNCATED_NORMAL
    if np.ptp(x) == 0.0:
        raise FitError("constant data has no continuous fit", family=family.value)

    def nll(theta: np.ndarray) -> float:
        loc, scale = theta[0], np.exp(theta[1])
        ll = stats.truncnorm.logpdf(x, (0.0 - loc) / scale, (1.0 - loc) / scale, loc=loc, scale=scale).sum()
        return -ll if np.isfinite(ll) else 1e300

    start = np.array([x.mean(), np.log(max(x.std(ddof=1), 1e-3))])
    result = optimize.minimize(nll, start, method="Nelder-Mead",
                               options={"xatol": 1e-9, "fatol": 1e-10, "maxiter": 5000})
    if not np.isfinite(result.fun) or result.fun >= 1e300:
        raise FitError("likelihood optimization failed", family=family.value)
    loc, scale = float(result.x[0]), float(np.exp(result.x[1]))
    mean = float(_truncnorm(loc, scale).mean())
    model = MarginalModel(family=family, params=[loc, scale], mean=mean)
    return model, FitReport.build(family, -float(result.fun), 2)


def _fit_beta(x: np.ndarray) -> Tuple[MarginalModel, FitReport]:
    family = MarginalFamily.BETA
    if np.ptp(x) == 0.0:
        raise FitError("constant data has no continuous fit", family=family.value)
    eps = settings.beta_epsilon
    clamped = np.clip(x, eps, 1.0 - eps)
    a, b, _, _ = stats.beta.fit(clamped, floc=0.0, fscale=1.0)
    ll = float(stats.beta.logpdf(clamped, a, b).sum())
    if not np.isfinite(ll):
        raise FitError("likelihood is not finite", family=family.value)
    model = MarginalModel(family=family, params=[float(a), float(b)], mean=float(a / (a + b)))
    return model, FitReport.build(family, ll, 2)


def _fit_beta_binomial(x: np.ndarray, support: Optional[Sequence[float]]) -> Tuple[MarginalModel, FitReport]:
    family = MarginalFamily.BETA_BINOMIAL
    if support is None:
        raise FitError("requires a declared discrete support", family=family.value)
    points = _as_support(support)
    if points.size < 2:
        raise FitError("requires at least two support points", family=family.value)
    positions = _support_positions(x, points, family)
    trials = points.size - 1

    def nll(theta: np.ndarray) -> float:
        a, b = np.exp(theta)
        return -float(stats.betabinom.logpmf(positions, trials, a, b).sum())

    result = optimize.minimize(nll, np.zeros(2), method="L-BFGS-B", bounds=[_LOG_PARAM_BOUNDS] * 2)
    if not np.isfinite(result.fun):
        raise FitError("likelihood optimization failed", family=family.value)
    a, b = (float(v) for v in np.exp(result.x))
    model = _discrete_model(family, points, _betabinom_probabilities(points.size, a, b), params=[a, b])
    return model, FitReport.build(family, -float(result.fun), 2)


def _fit_discrete_kde(x: np.ndarray, support: Optional[Sequence[float]]) -> Tuple[MarginalModel, FitReport]:
    family = MarginalFamily.DISCRETE_KDE
    points = np.unique(x) if support is None else _as_support(support)
    positions = _support_positions(x, points, family)
    counts = np.bincount(positions, minlength=points.size).astype(float)
    pseudo = settings.kde_pseudo_count
    probabilities = (counts + pseudo) / (x.size + pseudo * points.size)
    ll = float(np.sum(counts * np.log(probabilities)))
    model = _discrete_model(family, points, probabilities)
    return model, FitReport.build(family, ll, max(1, points.size - 1))


def fit_marginal(scores: Sequence[float], family: Union[MarginalFamily, str],
                 support: Optional[Sequence[float]] = None) -> Tuple[MarginalModel, FitReport]:
    """
    Maximum-likelihood fit of one family.

    Args:
        scores: Per-request scores in [0, 1], at least 10 of them
        family: Marginal family
        support: Declared discrete support (required for beta-binomial;
            discrete-kde falls back to the observed values)

    Returns:
        Tuple of the fitted model and its FitReport
    """
    x = _check_scores(scores)
    family = MarginalFamily(family)
    if family is MarginalFamily.TRUNCATED_NORMAL:
        return _fit_truncated_normal(x)
    if family is MarginalFamily.BETA:
        return _fit_beta(x)
    if family is MarginalFamily.BETA_BINOMIAL:
        return _fit_beta_binomial(x, support)
    return _fit_discrete_kde(x, support)


def _cell_log_likelihood(model: MarginalModel, x: np.ndarray, points: np.ndarray) -> float:
    """Log-likelihood of a continuous model on the cells around each support point."""
    edges = np.concatenate([[0.0], (points[:-1] + points[1:]) / 2.0, [1.0]])
    cumulative = np.asarray(cdf(model, edges), dtype=float)
    cumulative[0], cumulative[-1] = 0.0, 1.0
    masses = np.clip(np.diff(cumulative), 1e-300, None)
    positions = _support_positions(x, points, model.family)
    return float(np.sum(np.log(masses[positions])))


def select_marginal(scores: Sequence[float],
                    candidates: Optional[Iterable[Union[MarginalFamily, str]]] = None,
                    support: Optional[Sequence[float]] = None,
                    metric_name: Optional[str] = None) -> Tuple[MarginalModel, FitReport]:
    """
    Fit every candidate family and keep the one with the smallest AIC.

    When discrete and continuous candidates compete, the continuous ones are
    rescored on the probability mass of the cells around the observed support
    so that all likelihoods are probabilities of the same events.

    Raises:
        FitError: every candidate failed
    """
    x = _check_scores(scores)
    families = default_candidates(metric_name) if candidates is None else [MarginalFamily(c) for c in candidates]
    if not families:
        raise ValueError("at least one candidate family is required")

    fitted: List[Tuple[MarginalModel, FitReport]] = []
    failures = []
    for family in dict.fromkeys(families):
        try:
            fitted.append(fit_marginal(x, family, support))
        except FitError as e:
            logger.debug(f"Skipping marginal family {family.value}: {e}")
            failures.append(str(e))
    if not fitted:
        raise FitError("no candidate family could be fitted: " + "; ".join(failures))

    if any(m.family.is_discrete for m, _ in fitted) and any(not m.family.is_discrete for m, _ in fitted):
        points = np.unique(x) if support is None else _as_support(support)
        rescored = []
        for model, report in fitted:
            if not model.family.is_discrete:
                report = FitReport.build(model.family, _cell_log_likelihood(model, x, points), report.n_params)
            rescored.append((model, report))
        fitted = rescored

    for model, report in fitted:
        logger.debug(f"Marginal {report.family.value}: loglik={report.log_likelihood:.4f} aic={report.aic:.4f}")
    return min(fitted, key=lambda pair: pair[1].aic)


# ---------------------------------------------------------------------------
# Distribution functions
# ---------------------------------------------------------------------------

def _discrete_arrays(model: MarginalModel) -> Tuple[np.ndarray, np.ndarray]:
    support = np.asarray(model.support, dtype=float)
    cumulative = np.cumsum(np.asarray(model.probabilities, dtype=float))
    cumulative[-1] = 1.0
    return support, cumulative


def cdf(model: MarginalModel, x: ArrayLike) -> Union[float, np.ndarray]:
    """P(X <= x)."""
    values = np.asarray(x, dtype=float)
    if model.family.is_discrete:
        support, cumulative = _discrete_arrays(model)
        idx = np.searchsorted(support, values + SUPPORT_TOLERANCE, side="right") - 1
        result = np.where(idx < 0, 0.0, cumulative[np.clip(idx, 0, None)])
    elif model.family is MarginalFamily.BETA:
        result = stats.beta.cdf(values, *model.params)
    else:
        result = _truncnorm(*model.params).cdf(values)
    result = np.clip(result, 0.0, 1.0)
    return float(result) if np.ndim(result) == 0 else result


def mid_cdf(model: MarginalModel, x: ArrayLike) -> np.ndarray:
    """Probability-integral transform that stays inside (0, 1) for discrete models."""
    values = np.asarray(x, dtype=float)
    if model.family.is_discrete:
        support, cumulative = _discrete_arrays(model)
        probabilities = np.diff(np.concatenate([[0.0], cumulative]))
        idx = np.clip(np.searchsorted(support, values + SUPPORT_TOLERANCE, side="right") - 1, 0, None)
        result = cumulative[idx] - probabilities[idx] / 2.0
    else:
        result = np.asarray(cdf(model, values), dtype=float)
    return np.clip(result, 1e-12, 1.0 - 1e-12)


def inverse_cdf(model: MarginalModel, u: ArrayLike) -> Union[float, np.ndarray]:
    """Generalized inverse: the smallest x with CDF(x) >= u, for u in (0, 1)."""
    values = np.asarray(u, dtype=float)
    if np.any(values <= 0.0) or np.any(values >= 1.0) or not np.all(np.isfinite(values)):
        raise ValueError("quantile levels must lie strictly inside (0, 1)")
    if model.family.is_discrete:
        support, cumulative = _discrete_arrays(model)
        idx = np.minimum(np.searchsorted(cumulative, values, side="left"), support.size - 1)
        result = support[idx]
    elif model.family is MarginalFamily.BETA:
        result = stats.beta.ppf(values, *model.params)
    else:
        result = _truncnorm(*model.params).ppf(values)
    result = np.clip(result, 0.0, 1.0)
    return float(result) if np.ndim(result) == 0 else result


def mean(model: MarginalModel) -> float:
    """Mean of the distribution."""
    return model.mean


def sample_marginal(model: MarginalModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform sample of ``n`` scores."""
    return np.asarray(inverse_cdf(model, open_uniform(rng, n)), dtype=float)


# ---------------------------------------------------------------------------
# Mean transformation
# ---------------------------------------------------------------------------

def _transform_truncated_normal(model: MarginalModel, target: float) -> MarginalModel:
    scale = model.params[1]

    def gap(loc: float) -> float:
        value = float(_truncnorm(loc, scale).mean())
        return value - target if np.isfinite(value) else np.nan

    lo, hi = model.params[0] - 1.0, model.params[0] + 1.0
    for _ in range(40):
        if gap(lo) < 0.0:
            break
        lo = model.params[0] - 2.0 * (model.params[0] - lo)
    for _ in range(40):
        if gap(hi) > 0.0:
            break
        hi = model.params[0] + 2.0 * (hi - model.params[0])
    if not (gap(lo) < 0.0 < gap(hi)):
        raise UnreachableMeanError(f"truncated-normal with scale {scale:.4g} cannot reach mean {target}")
    loc = _bisect(gap, lo, hi)
    return MarginalModel(family=model.family, params=[loc, scale], mean=float(_truncnorm(loc, scale).mean()))


def _transform_beta_binomial(model: MarginalModel, target: float) -> MarginalModel:
    support = np.asarray(model.support, dtype=float)
    a, b = model.params
    concentration = a + b

    def probabilities(share: float) -> np.ndarray:
        return _betabinom_probabilities(support.size, concentration * share, concentration * (1.0 - share))

    def gap(share: float) -> float:
        return float(np.dot(support, probabilities(share))) - target

    lo, hi = 1e-12, 1.0 - 1e-12
    if not (gap(lo) < 0.0 < gap(hi)):
        raise UnreachableMeanError(f"beta-binomial with concentration {concentration:.4g} cannot reach mean {target}")
    share = _bisect(gap, lo, hi)
    return _discrete_model(model.family, support, probabilities(share),
                           params=[concentration * share, concentration * (1.0 - share)])


def _tilt(probabilities: np.ndarray, support: np.ndarray, theta: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_weights = np.log(probabilities) + theta * support
    log_weights -= log_weights.max()
    weights = np.exp(log_weights)
    return weights / weights.sum()


def _transform_discrete_kde(model: MarginalModel, target: float) -> MarginalModel:
    support = np.asarray(model.support, dtype=float)
    probabilities = np.asarray(model.probabilities, dtype=float)
    live = support[probabilities > 0.0]
    if not live.min() < target < live.max():
        raise UnreachableMeanError(f"exponential tilting of support [{live.min()}, {live.max()}] cannot reach mean {target}")

    def gap(theta: float) -> float:
        return float(np.dot(support, _tilt(probabilities, support, theta))) - target

    lo, hi = -1.0, 1.0
    while gap(lo) > 0.0 and lo > -1e7:
        lo *= 2.0
    while gap(hi) < 0.0 and hi < 1e7:
        hi *= 2.0
    if not (gap(lo) <= 0.0 <= gap(hi)):
        raise UnreachableMeanError(f"exponential tilting cannot reach mean {target}")
    theta = _bisect(gap, lo, hi)
    return _discrete_model(model.family, support, _tilt(probabilities, support, theta))


def transform_mean(model: MarginalModel, target_mean: float) -> MarginalModel:
    """
    Same-family distribution with mean ``target_mean``.

    beta holds alpha + beta fixed; truncated-normal holds the scale and moves
    the location; beta-binomial holds the concentration and moves the mean
    parameter; discrete-kde tilts the probabilities exponentially.

    Raises:
        UnreachableMeanError: target outside (0, 1) or out of the family's reach
    """
    if not 0.0 < target_mean < 1.0:
        raise UnreachableMeanError(f"target mean {target_mean} must lie in (0, 1)")
    if abs(target_mean - model.mean) <= 1e-12:
        return model
    if model.family is MarginalFamily.BETA:
        total = model.params[0] + model.params[1]
        return MarginalModel(family=model.family, params=[total * target_mean, total * (1.0 - target_mean)],
                             mean=target_mean)
    if model.family is MarginalFamily.TRUNCATED_NORMAL:
        return _transform_truncated_normal(model, target_mean)
    if model.family is MarginalFamily.BETA_BINOMIAL:
        return _transform_beta_binomial(model, target_mean)
    return _transform_discrete_kde(model, target_mean)
