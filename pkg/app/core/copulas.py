"""
Bivariate copulas: pseudo-observations, Kendall's tau, per-family densities,
conditional distributions, maximum pseudo-likelihood fitting and sampling.

Convention: ``u`` belongs to the first system of a pair and ``v`` to the
second. ``h(u | v)`` is the conditional CDF dC(u, v)/dv.
"""
from typing import Dict, Iterable, Optional, Sequence, Tuple, Type, Union

import numpy as np
from loguru import logger
from scipy import integrate, optimize, special, stats

from config.settings import settings
from data.models.distributions import CopulaFamily, CopulaModel, MarginalModel, PseudoObservations
from data.models.simulation import PitMode
from app.core import marginals
from app.core.rng import as_generator, open_uniform

_CLIP = 1e-12
# Largest |tau| handed to the tau-to-parameter inversions
_TAU_LIMIT = 1.0 - 1e-9
# Preference order when log-likelihoods tie: fewest constraints first
_TIE_PRIORITY = {
    CopulaFamily.INDEPENDENCE: 0,
    CopulaFamily.GAUSSIAN: 1,
    CopulaFamily.FRANK: 2,
    CopulaFamily.GUMBEL: 3,
    CopulaFamily.CLAYTON: 4,
}


def _clip(values: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(values, dtype=float), _CLIP, 1.0 - _CLIP)


class _Independence:
    bounds = (0.0, 0.0)

    @staticmethod
    def theta_to_tau(theta: float) -> float:
        return 0.0

    @staticmethod
    def tau_to_theta(tau: float) -> float:
        return 0.0

    @staticmethod
    def log_density(theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.zeros(np.broadcast(u, v).shape)

    @staticmethod
    def h(theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)

    @staticmethod
    def inverse_h(theta: float, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.broadcast_to(w, np.broadcast(w, v).shape).astype(float)


class _Gaussian:
    bounds = (-0.9999, 0.9999)

    @staticmethod
    def theta_to_tau(theta: float) -> float:
        return 2.0 / np.pi * float(np.arcsin(theta))

    @staticmethod
    def tau_to_theta(tau: float) -> float:
        return float(np.sin(np.pi * tau / 2.0))

    @staticmethod
    def log_density(theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        x, y = special.ndtri(u), special.ndtri(v)
        one_minus = 1.0 - theta ** 2
        return -0.5 * np.log(one_minus) - (theta ** 2 * (x ** 2 + y ** 2) - 2.0 * theta * x * y) / (2.0 * one_minus)

    @staticmethod
    def h(theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        x, y = special.ndtri(u), special.ndtri(v)
        return special.ndtr((x - theta * y) / np.sqrt(1.0 - theta ** 2))

    @staticmethod
    def inverse_h(theta: float, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        x, y = special.ndtri(w), special.ndtri(v)
        return special.ndtr(x * np.sqrt(1.0 - theta ** 2) + theta * y)


class _Clayton:
    bounds = (1e-4, 50.0)

    @staticmethod
    def theta_to_tau(theta: float) -> float:
        return theta / (theta + 2.0)

    @staticmethod
    def tau_to_theta(tau: float) -> float:
        return 2.0 * tau / (1.0 - tau)

    @staticmethod
    def _log_sum(theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """log(u^-theta + v^-theta - 1) without overflow."""
        a, b = -theta * np.log(u), -theta * np.log(v)
        top = np.maximum(a, b)
        return top + np.log(np.exp(a - top) + np.exp(b - top) - np.exp(-top))

    @classmethod
    def log_density(cls, theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return (np.log1p(theta) - (1.0 + theta) * (np.log(u) + np.log(v))
                - (2.0 + 1.0 / theta) * cls._log_sum(theta, u, v))

    @classmethod
    def h(cls, theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.exp(-(1.0 + theta) * np.log(v) - (1.0 + 1.0 / theta) * cls._log_sum(theta, u, v))

    @staticmethod
    def inverse_h(theta: float, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        a = np.log(np.expm1(-theta / (1.0 + theta) * np.log(w))) - theta * np.log(v)
        return np.exp(-np.logaddexp(a, 0.0) / theta)


class _Frank:
    bounds = (-50.0, 50.0)
    _near_zero = 1e-8

    @classmethod
    def theta_to_tau(cls, theta: float) -> float:
        if abs(theta) < cls._near_zero:
            return 0.0
        debye, _ = integrate.quad(lambda t: t / np.expm1(t) if t != 0.0 else 1.0, 0.0, theta)
        return 1.0 - 4.0 / theta * (1.0 - debye / theta)

    @classmethod
    def tau_to_theta(cls, tau: float) -> float:
        if tau == 0.0:
            return 0.0
        lo, hi = (cls._near_zero, cls.bounds[1]) if tau > 0 else (cls.bounds[0], -cls._near_zero)
        f_lo, f_hi = cls.theta_to_tau(lo) - tau, cls.theta_to_tau(hi) - tau
        if f_lo * f_hi > 0:
            return lo if abs(f_lo) < abs(f_hi) else hi
        return float(optimize.brentq(lambda theta: cls.theta_to_tau(theta) - tau, lo, hi))

    @classmethod
    def log_density(cls, theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if abs(theta) < cls._near_zero:
            return np.zeros(np.broadcast(u, v).shape)
        denominator = -np.expm1(-theta) - np.expm1(-theta * u) * np.expm1(-theta * v)
        return (np.log(theta * -np.expm1(-theta)) - theta * (u + v)
                - 2.0 * np.log(np.abs(denominator)))

    @classmethod
    def h(cls, theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if abs(theta) < cls._near_zero:
            return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)
        return (-np.exp(-theta * v) * np.expm1(-theta * u)
                / (-np.expm1(-theta) - np.expm1(-theta * u) * np.expm1(-theta * v)))

    @classmethod
    def inverse_h(cls, theta: float, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        if abs(theta) < cls._near_zero:
            return np.broadcast_to(w, np.broadcast(w, v).shape).astype(float)
        return -1.0 / theta * np.log1p(np.expm1(-theta) / (np.exp(-theta * v) * (1.0 / w - 1.0) + 1.0))


class _Gumbel:
    bounds = (1.0, 50.0)
    _bisection_steps = 100

    @staticmethod
    def theta_to_tau(theta: float) -> float:
        return 1.0 - 1.0 / theta

    @staticmethod
    def tau_to_theta(tau: float) -> float:
        return 1.0 / (1.0 - tau)

    @staticmethod
    def _log_a(theta: float, log_x: np.ndarray, log_y: np.ndarray) -> np.ndarray:
        return np.logaddexp(theta * log_x, theta * log_y) / theta

    @classmethod
    def log_density(cls, theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        x, y = -np.log(u), -np.log(v)
        log_x, log_y = np.log(x), np.log(y)
        log_a = cls._log_a(theta, log_x, log_y)
        a = np.exp(log_a)
        return (-a + x + y + (theta - 1.0) * (log_x + log_y)
                + (1.0 - 2.0 * theta) * log_a + np.log(a + theta - 1.0))

    @classmethod
    def _log_h(cls, theta: float, log_x: np.ndarray, y: np.ndarray) -> np.ndarray:
        log_y = np.log(y)
        log_a = cls._log_a(theta, log_x, log_y)
        return -np.exp(log_a) + y + (theta - 1.0) * log_y + (1.0 - theta) * log_a

    @classmethod
    def h(cls, theta: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.exp(cls._log_h(theta, np.log(-np.log(u)), -np.log(v)))

    @classmethod
    def inverse_h(cls, theta: float, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        # h is decreasing in log(-log u); bisect on that scale for every point at once
        w, v = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(v, dtype=float))
        y = -np.log(v)
        log_w = np.log(w)
        lo = np.full(w.shape, np.log(-np.log1p(-_CLIP)))
        hi = np.full(w.shape, np.log(-np.log(_CLIP)))
        for _ in range(cls._bisection_steps):
            mid = 0.5 * (lo + hi)
            above = cls._log_h(theta, mid, y) > log_w
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return np.exp(-np.exp(0.5 * (lo + hi)))


_FAMILIES: Dict[CopulaFamily, Type] = {
    CopulaFamily.INDEPENDENCE: _Independence,
    CopulaFamily.GAUSSIAN: _Gaussian,
    CopulaFamily.CLAYTON: _Clayton,
    CopulaFamily.FRANK: _Frank,
    CopulaFamily.GUMBEL: _Gumbel,
}


def copula_tau(family: Union[CopulaFamily, str], theta: float) -> float:
    """Kendall's tau implied by a family parameter."""
    return float(_FAMILIES[CopulaFamily(family)].theta_to_tau(theta))


def theta_from_tau(family: Union[CopulaFamily, str], tau: float) -> float:
    """Family parameter with Kendall's tau ``tau``, clamped to the family's range."""
    impl = _FAMILIES[CopulaFamily(family)]
    tau = float(np.clip(tau, -_TAU_LIMIT, _TAU_LIMIT))
    return float(np.clip(impl.tau_to_theta(tau), *impl.bounds))


def copula_logpdf(model: CopulaModel, u: Sequence[float], v: Sequence[float]) -> np.ndarray:
    """Log copula density at (u, v)."""
    return _FAMILIES[model.family].log_density(model.theta, _clip(u), _clip(v))


def h_function(model: CopulaModel, u: Sequence[float], v: Sequence[float]) -> np.ndarray:
    """Conditional CDF of the first coordinate given the second."""
    return np.clip(_FAMILIES[model.family].h(model.theta, _clip(u), _clip(v)), 0.0, 1.0)


def inverse_h_function(model: CopulaModel, w: Sequence[float], v: Sequence[float]) -> np.ndarray:
    """First coordinate whose conditional CDF given ``v`` equals ``w``."""
    return _clip(_FAMILIES[model.family].inverse_h(model.theta, _clip(w), _clip(v)))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Tie-adjusted Kendall tau-b.

    Returns 0 when either vector has no variation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("kendall_tau needs two vectors of equal length >= 2")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return 0.0
    tau, _ = stats.kendalltau(x, y)
    return 0.0 if np.isnan(tau) else float(tau)


def pseudo_observations(x: Sequence[float], y: Sequence[float], pit: PitMode = PitMode.RANK,
                        marginal_x: Optional[MarginalModel] = None,
                        marginal_y: Optional[MarginalModel] = None) -> PseudoObservations:
    """
    Map paired scores into the open unit square.

    Args:
        x: Scores of the first system
        y: Scores of the second system, paired by position
        pit: rank uses average ranks / (n + 1); parametric uses the fitted
            marginal CDFs (mid-CDF for discrete marginals)
        marginal_x: Marginal of ``x`` (parametric mode only)
        marginal_y: Marginal of ``y`` (parametric mode only)

    Returns:
        PseudoObservations
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("score vectors must be 1-d and of equal length")
    if x.size < 2:
        raise ValueError("need at least 2 paired scores")
    pit = PitMode(pit)
    if pit is PitMode.PARAMETRIC:
        if marginal_x is None or marginal_y is None:
            raise ValueError("parametric pseudo-observations need both marginals")
        return PseudoObservations(u=marginals.mid_cdf(marginal_x, x), v=marginals.mid_cdf(marginal_y, y))
    n = x.size
    return PseudoObservations(u=stats.rankdata(x, method="average") / (n + 1),
                              v=stats.rankdata(y, method="average") / (n + 1))


def _fit_family(family: CopulaFamily, u: np.ndarray, v: np.ndarray, tau: float) -> Optional[Tuple[float, float]]:
    impl = _FAMILIES[family]
    lo, hi = impl.bounds
    start = theta_from_tau(family, tau)

    def neg_ll(theta: np.ndarray) -> float:
        value = float(np.sum(impl.log_density(float(theta[0]), u, v)))
        return -value if np.isfinite(value) else 1e300

    result = optimize.minimize(neg_ll, np.array([start]), method="L-BFGS-B", bounds=[(lo, hi)])
    candidates = [(float(result.x[0]), -float(result.fun)), (start, -neg_ll(np.array([start])))]
    theta, ll = max(candidates, key=lambda pair: pair[1])
    if not np.isfinite(ll) or ll <= -1e300:
        return None
    return theta, ll


def fit_copula(p: PseudoObservations, families: Optional[Iterable[Union[CopulaFamily, str]]] = None,
               systems: Optional[Tuple[str, str]] = None) -> CopulaModel:
    """
    Maximum pseudo-likelihood fit over a set of families.

    Each family starts from the inversion of the sample Kendall tau and is
    refined within its clamped parameter range. Clayton is skipped for
    tau <= 0 and Gumbel for tau < 0. The highest log-likelihood wins; ties go
    to the family with fewer constraints. When every family is skipped the
    independence copula is returned.
    """
    if p.n < settings.min_copula_requests:
        raise ValueError(f"copula fitting needs at least {settings.min_copula_requests} pairs, got {p.n}")
    wanted = list(CopulaFamily) if families is None else [CopulaFamily(f) for f in families]
    tau = kendall_tau(p.u, p.v)
    u, v = _clip(p.u), _clip(p.v)

    fitted = []
    for family in dict.fromkeys(wanted):
        if family is CopulaFamily.INDEPENDENCE:
            fitted.append((family, 0.0, 0.0))
            continue
        if (family is CopulaFamily.CLAYTON and tau <= 0.0) or (family is CopulaFamily.GUMBEL and tau < 0.0):
            logger.debug(f"Skipping {family.value} copula for sample tau {tau:.4f}")
            continue
        outcome = _fit_family(family, u, v, tau)
        if outcome is None:
            logger.debug(f"Skipping {family.value} copula: likelihood not finite")
            continue
        fitted.append((family, outcome[0], outcome[1]))

    if not fitted:
        fitted.append((CopulaFamily.INDEPENDENCE, 0.0, 0.0))
    best_ll = max(ll for _, _, ll in fitted)
    family, theta, ll = min(
        (entry for entry in fitted if entry[2] >= best_ll - 1e-9),
        key=lambda entry: _TIE_PRIORITY[entry[0]],
    )
    model = CopulaModel(family=family, theta=theta, kendall_tau=copula_tau(family, theta),
                        log_likelihood=ll, systems=systems)
    logger.debug(f"Copula {systems}: {family.value} theta={theta:.4f} loglik={ll:.3f} (sample tau {tau:.4f})")
    return model


def sample_copula(model: CopulaModel, n: int,
                  seed: Union[int, np.random.Generator]) -> PseudoObservations:
    """
    Draw ``n`` i.i.d. pairs from a fitted copula.

    Gaussian pairs come from correlated standard normals; the other families
    invert the conditional distribution of ``u`` given a uniform ``v``.
    """
    if n < 1:
        raise ValueError("sample size must be positive")
    rng = as_generator(seed)
    if model.family is CopulaFamily.GAUSSIAN:
        rho = model.theta
        z_v = rng.standard_normal(n)
        z_u = rho * z_v + np.sqrt(1.0 - rho ** 2) * rng.standard_normal(n)
        return PseudoObservations(u=_clip(special.ndtr(z_u)), v=_clip(special.ndtr(z_v)))
    w = open_uniform(rng, n)
    v = open_uniform(rng, n)
    u = _FAMILIES[model.family].inverse_h(model.theta, w, v)
    return PseudoObservations(u=_clip(u), v=_clip(v))
