"""
Configuration settings for SigScale.
"""
from typing import List, Dict, Any
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
import os


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_prefix="SIGSCALE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "SigScale"
    app_version: str = "1.0.0"
    debug: bool = False
    log_level: str = "INFO"

    # Execution
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1)
    seed: int = 20230723

    # Resampling tests
    bootstrap_resamples: int = 10_000
    randomization_resamples: int = 10_000
    exact_threshold: int = 20

    # Ingestion
    rr_cutoff: int = 10
    relevance_threshold: int = 1
    coverage_policy: str = "strict"

    # Marginal fitting
    beta_epsilon: float = 1e-6
    kde_pseudo_count: float = 0.5
    solver_tolerance: float = 1e-12

    # Copula fitting
    min_copula_requests: int = 30

    # Experiments
    null_trials: int = 2_000
    power_trials: int = 500
    sample_sizes: List[int] = [25, 50, 100, 500, 1000, 5000, 10000, 20000]
    alphas: List[float] = [0.01, 0.05, 0.1]
    deltas: List[float] = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1]
    trials_per_task: int = 25
    calibration_points: int = 100

    # Synthetic fixtures
    data_dir: str = "data/generated"


# Global settings instance
settings = Settings()


# Trial counts of the full-size study (--full-scale)
FULL_SCALE = {
    "null_trials": 10_000,
    "power_trials": 2_500,
}

# Metric-specific marginal candidate families
METRIC_CONFIGS: Dict[str, Dict[str, Any]] = {
    "rr": {
        "description": "Reciprocal rank of the first relevant item",
        "discrete": True,
        "marginal_candidates": ["beta-binomial", "discrete-kde"],
    },
    "ndcg": {
        "description": "Normalized discounted cumulative gain",
        "discrete": False,
        "marginal_candidates": ["truncated-normal", "beta", "discrete-kde"],
    },
    "default": {
        "description": "Any continuous effectiveness score in [0, 1]",
        "discrete": False,
        "marginal_candidates": ["truncated-normal", "beta", "discrete-kde"],
    },
}
