"""
Main synthetic data generator for SigScale.
"""
import os
from typing import Any, Dict, Optional

import pandas as pd
from loguru import logger

from config.settings import settings
from data.models.evaluation import EvaluationMatrix
from app.core.ingest import write_matrix
from .matrix_data import MatrixDataGenerator
from .run_data import RunDataGenerator


class SyntheticDataGenerator:
    """Builds the fixture set: score matrices with known models, and toy runs."""

    def __init__(self, output_dir: Optional[str] = None, seed: Optional[int] = None):
        """Initialize the synthetic data generator."""
        self.output_dir = output_dir or settings.data_dir
        self.seed = settings.seed if seed is None else seed
        self.matrix_generator = MatrixDataGenerator(self.seed)
        self.run_generator = RunDataGenerator(self.seed)
        os.makedirs(self.output_dir, exist_ok=True)
        logger.info(f"Synthetic data generator initialized with output directory: {self.output_dir}")

    def generate_all_data(self, rr_systems: int = 20, rr_requests: int = 5000,
                          skewed_requests: int = 20000, ndcg_requests: int = 2000,
                          toy_requests: int = 5) -> Dict[str, Any]:
        """
        Generate every fixture.

        Args:
            rr_systems: Systems in the RR matrix
            rr_requests: Requests in the RR matrix
            skewed_requests: Requests in the skewed RR matrix
            ndcg_requests: Requests in the nDCG matrix
            toy_requests: Requests in the toy runs

        Returns:
            Dictionary of fixture name to EvaluationMatrix or DataFrame
        """
        logger.info("Starting synthetic fixture generation...")
        data: Dict[str, Any] = {}
        data["rr_matrix"], _ = self.matrix_generator.generate_rr_matrix(n_systems=rr_systems, n_requests=rr_requests)
        data["skewed_rr_matrix"], _ = self.matrix_generator.generate_skewed_rr_matrix(n_requests=skewed_requests)
        data["ndcg_matrix"], _ = self.matrix_generator.generate_ndcg_matrix(n_requests=ndcg_requests)
        data["toy_qrels"] = self.run_generator.generate_qrels(n_requests=toy_requests)
        data["toy_runs"] = self.run_generator.generate_runs(n_requests=toy_requests)
        logger.info("Synthetic fixture generation completed")
        return data

    def save_data(self, data: Dict[str, Any]) -> Dict[str, str]:
        """
        Save fixtures: matrices as CSV, runs and qrels in their TREC text formats.

        Returns:
            Dictionary of fixture name to written path
        """
        paths = {}
        for name, item in data.items():
            if isinstance(item, EvaluationMatrix):
                path = os.path.join(self.output_dir, f"{name}.csv")
                write_matrix(item, path)
            elif name == "toy_runs":
                path = os.path.join(self.output_dir, "toy.run")
                self.run_generator.write_trec_run(item, path)
            elif name == "toy_qrels":
                path = os.path.join(self.output_dir, "toy.qrels")
                self.run_generator.write_qrels(item, path)
            elif isinstance(item, pd.DataFrame):
                path = os.path.join(self.output_dir, f"{name}.csv")
                item.to_csv(path, index=False)
            else:
                continue
            paths[name] = path
            logger.info(f"Saved {name} to {path}")
        return paths
