"""
Score matrix generator with known marginals and dependence.
"""
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy import special

from config.settings import settings
from data.models.distributions import MarginalFamily, MarginalModel
from data.models.evaluation import EvaluationMatrix
from app.core import marginals
from app.core.metrics import rr_support


class MatrixDataGenerator:
    """Generator for synthetic request x system score matrices.

    Systems share a Gaussian one-factor dependence: the latent score of
    system s on request q is sqrt(rho) * f_q + sqrt(1 - rho) * e_qs, pushed
    through the standard normal CDF and then through the system's inverse
    marginal CDF.
    """

    def __init__(self, seed: Optional[int] = None):
        self.seed = settings.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)

    def _latent_uniforms(self, n_requests: int, n_systems: int, dependence: float) -> np.ndarray:
        if not 0.0 <= dependence < 1.0:
            raise ValueError("dependence must lie in [0, 1)")
        factor = self.rng.standard_normal((n_requests, 1))
        noise = self.rng.standard_normal((n_requests, n_systems))
        latent = np.sqrt(dependence) * factor + np.sqrt(1.0 - dependence) * noise
        return np.clip(special.ndtr(latent), 1e-12, 1.0 - 1e-12)

    @staticmethod
    def _frame(columns: Dict[str, np.ndarray], n_requests: int) -> pd.DataFrame:
        index = pd.Index([f"q{i:05d}" for i in range(n_requests)], name="request")
        return pd.DataFrame(columns, index=index)

    def _sample(self, models: Dict[str, MarginalModel], n_requests: int, dependence: float) -> pd.DataFrame:
        uniforms = self._latent_uniforms(n_requests, len(models), dependence)
        columns = {
            system_id: np.asarray(marginals.inverse_cdf(model, uniforms[:, j]), dtype=float)
            for j, (system_id, model) in enumerate(models.items())
        }
        return self._frame(columns, n_requests)

    def generate_rr_matrix(self, n_systems: int = 20, n_requests: int = 5000, k: int = 10,
                           mean_range: Tuple[float, float] = (0.25, 0.40),
                           shape: Tuple[float, float] = (0.6, 0.6),
                           dependence: float = 0.5) -> Tuple[EvaluationMatrix, Dict[str, MarginalModel]]:
        """
        RR@k-like matrix from beta-binomial marginals.

        Args:
            n_systems: Number of systems
            n_requests: Number of requests
            k: Rank cutoff defining the support {0} U {1/k, ..., 1}
            mean_range: System means are spread evenly over this range
            shape: Beta-binomial (alpha, beta) before shifting to each mean
            dependence: Share of latent variance common to all systems

        Returns:
            Tuple of the matrix and the true marginal of every system
        """
        base = marginals.beta_binomial_model(rr_support(k), *shape)
        means = np.linspace(mean_range[0], mean_range[1], n_systems)
        models = {
            f"sys{j:02d}": marginals.transform_mean(base, float(mean))
            for j, mean in enumerate(means)
        }
        scores = self._sample(models, n_requests, dependence)
        logger.info(f"Generated RR@{k} matrix: {n_requests} requests x {n_systems} systems")
        return EvaluationMatrix(scores=scores, metric_name="rr", cutoff=k), models

    def generate_skewed_rr_matrix(self, n_systems: int = 4, n_requests: int = 5000, k: int = 10,
                                  dependence: float = 0.5) -> Tuple[EvaluationMatrix, Dict[str, MarginalModel]]:
        """RR@k matrix whose marginals pile up at 0 with a long tail to 1."""
        return self.generate_rr_matrix(n_systems=n_systems, n_requests=n_requests, k=k,
                                       mean_range=(0.22, 0.28), shape=(0.25, 1.5), dependence=dependence)

    def generate_ndcg_matrix(self, n_systems: int = 5, n_requests: int = 2000,
                             mean_range: Tuple[float, float] = (0.35, 0.55), concentration: float = 4.0,
                             dependence: float = 0.5) -> Tuple[EvaluationMatrix, Dict[str, MarginalModel]]:
        """Continuous nDCG-like matrix from beta marginals with a common concentration."""
        models = {}
        for j, mean in enumerate(np.linspace(mean_range[0], mean_range[1], n_systems)):
            mean = float(mean)
            models[f"sys{j:02d}"] = MarginalModel(
                family=MarginalFamily.BETA,
                params=[concentration * mean, concentration * (1.0 - mean)],
                mean=mean,
            )
        scores = self._sample(models, n_requests, dependence)
        logger.info(f"Generated nDCG matrix: {n_requests} requests x {n_systems} systems")
        return EvaluationMatrix(scores=scores, metric_name="ndcg"), models
