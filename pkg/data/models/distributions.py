"""
Fitted distribution models: per-system marginals and pairwise copulas.
"""
from typing import List, Optional, Tuple
import enum

import numpy as np
from pydantic import Field, model_validator

from .base import BaseSchema, ArraySchema


class MarginalFamily(enum.Enum):
    """Marginal distribution families."""
    TRUNCATED_NORMAL = "truncated-normal"
    BETA = "beta"
    BETA_BINOMIAL = "beta-binomial"
    DISCRETE_KDE = "discrete-kde"

    @property
    def is_discrete(self) -> bool:
        return self in (MarginalFamily.BETA_BINOMIAL, MarginalFamily.DISCRETE_KDE)


class CopulaFamily(enum.Enum):
    """Bivariate copula families."""
    GAUSSIAN = "gaussian"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"
    INDEPENDENCE = "independence"


class MarginalModel(BaseSchema):
    """A fitted score distribution on [0, 1].

    Continuous families keep their parameters in ``params``:
    truncated-normal ``[loc, scale]``, beta ``[alpha, beta]``.
    Discrete families carry an ascending ``support`` with matching
    ``probabilities``; beta-binomial also keeps ``[alpha, beta]`` over the
    support positions 0..K-1.
    """

    family: MarginalFamily
    params: List[float] = Field(default_factory=list)
    support: Optional[List[float]] = None
    probabilities: Optional[List[float]] = None
    mean: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_support(self) -> "MarginalModel":
        if self.family.is_discrete:
            if self.support is None or self.probabilities is None:
                raise ValueError(f"{self.family.value} needs a support and probabilities")
            if len(self.support) != len(self.probabilities) or not self.support:
                raise ValueError("support and probabilities must have the same non-zero length")
            if any(b <= a for a, b in zip(self.support, self.support[1:])):
                raise ValueError("support must be strictly ascending")
            if min(self.probabilities) < 0.0:
                raise ValueError("probabilities must be non-negative")
            if abs(sum(self.probabilities) - 1.0) > 1e-9:
                raise ValueError("probabilities must sum to 1")
        elif len(self.params) != 2:
            raise ValueError(f"{self.family.value} takes exactly two parameters")
        return self


class FitReport(BaseSchema):
    """Likelihood bookkeeping for model selection."""

    family: MarginalFamily
    log_likelihood: float
    aic: float
    n_params: int = Field(ge=1)

    @classmethod
    def build(cls, family: MarginalFamily, log_likelihood: float, n_params: int) -> "FitReport":
        return cls(
            family=family,
            log_likelihood=log_likelihood,
            aic=2.0 * n_params - 2.0 * log_likelihood,
            n_params=n_params,
        )


class CopulaModel(BaseSchema):
    """A fitted one-parameter bivariate copula."""

    family: CopulaFamily
    theta: float
    kendall_tau: float = Field(gt=-1.0, lt=1.0)
    log_likelihood: float = 0.0
    systems: Optional[Tuple[str, str]] = None

    @model_validator(mode="after")
    def _check_theta(self) -> "CopulaModel":
        family, theta = self.family, self.theta
        if family is CopulaFamily.GAUSSIAN and not -1.0 < theta < 1.0:
            raise ValueError("gaussian rho must lie in (-1, 1)")
        if family is CopulaFamily.CLAYTON and theta <= 0.0:
            raise ValueError("clayton theta must be positive")
        if family is CopulaFamily.GUMBEL and theta < 1.0:
            raise ValueError("gumbel theta must be at least 1")
        if family is CopulaFamily.INDEPENDENCE and theta != 0.0:
            raise ValueError("independence copula has theta = 0")
        return self


class PseudoObservations(ArraySchema):
    """Paired values strictly inside the unit square."""

    u: np.ndarray
    v: np.ndarray

    @model_validator(mode="after")
    def _check_values(self) -> "PseudoObservations":
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")
        for values in (self.u, self.v):
            if values.size and (values.min() <= 0.0 or values.max() >= 1.0):
                raise ValueError("pseudo-observations must lie strictly inside (0, 1)")
        return self

    @property
    def n(self) -> int:
        return int(self.u.shape[0])
