"""
Toy run and qrels generator.
"""
from typing import Optional

import numpy as np
import pandas as pd

from config.settings import settings

RUN_COLUMNS = ["qid", "q0", "docid", "rank", "score", "tag"]
QRELS_COLUMNS = ["qid", "iteration", "docid", "grade"]


class RunDataGenerator:
    """Generator for small TREC-style runs and their judgments."""

    def __init__(self, seed: Optional[int] = None):
        self.seed = settings.seed if seed is None else seed
        self.rng = np.random.default_rng(self.seed)

    def generate_qrels(self, n_requests: int = 5, pool_size: int = 20, max_relevant: int = 3) -> pd.DataFrame:
        """Judge 1..max_relevant documents per request with grades 1-3."""
        rows = []
        for q in range(n_requests):
            relevant = self.rng.choice(pool_size, size=int(self.rng.integers(1, max_relevant + 1)), replace=False)
            for doc in sorted(relevant):
                rows.append({"qid": f"q{q}", "iteration": 0, "docid": f"d{q}_{doc}",
                             "grade": int(self.rng.integers(1, 4))})
        return pd.DataFrame(rows, columns=QRELS_COLUMNS)

    def generate_runs(self, n_systems: int = 2, n_requests: int = 5, pool_size: int = 20,
                      depth: int = 10) -> pd.DataFrame:
        """Rank ``depth`` documents of each request's pool for every system."""
        rows = []
        for s in range(n_systems):
            for q in range(n_requests):
                docs = self.rng.choice(pool_size, size=depth, replace=False)
                scores = np.sort(self.rng.uniform(0.0, 10.0, size=depth))[::-1]
                for rank, (doc, score) in enumerate(zip(docs, scores), start=1):
                    rows.append({"qid": f"q{q}", "q0": "Q0", "docid": f"d{q}_{doc}", "rank": rank,
                                 "score": round(float(score), 6), "tag": f"run{s}"})
        return pd.DataFrame(rows, columns=RUN_COLUMNS)

    @staticmethod
    def write_trec_run(frame: pd.DataFrame, path: str) -> None:
        frame[RUN_COLUMNS].to_csv(path, sep=" ", header=False, index=False, lineterminator="\n")

    @staticmethod
    def write_msmarco_run(frame: pd.DataFrame, path: str) -> None:
        frame[["qid", "docid", "rank"]].to_csv(path, sep="\t", header=False, index=False, lineterminator="\n")

    @staticmethod
    def write_qrels(frame: pd.DataFrame, path: str) -> None:
        frame[QRELS_COLUMNS].to_csv(path, sep=" ", header=False, index=False, lineterminator="\n")
