"""
Evaluation artifact models: ranked lists, relevance judgments and score matrices.
"""
from typing import Dict, List, Optional, Tuple
import enum

import numpy as np
import pandas as pd
from pydantic import Field, field_validator, model_validator

from .base import BaseSchema, ArraySchema


class RunFormat(enum.Enum):
    """Supported run file formats."""
    TREC_RUN = "trec-run"
    MSMARCO_RUN = "msmarco-run"
    CSV_MATRIX = "csv-matrix"


class Metric(enum.Enum):
    """Per-request effectiveness metrics."""
    RR = "rr"
    NDCG = "ndcg"


class CoveragePolicy(enum.Enum):
    """How to reconcile systems that cover different request sets."""
    STRICT = "strict"
    INTERSECT = "intersect"


class RankedList(BaseSchema):
    """One system's ranking for one request."""

    system_id: str
    request_id: str
    items: List[Tuple[str, float]] = Field(default_factory=list)

    @field_validator("items")
    @classmethod
    def _check_items(cls, items: List[Tuple[str, float]]) -> List[Tuple[str, float]]:
        seen = set()
        previous = float("inf")
        for doc_id, score in items:
            if doc_id in seen:
                raise ValueError(f"duplicate doc_id {doc_id!r} in ranked list")
            if score > previous:
                raise ValueError("items must be ordered by descending score")
            seen.add(doc_id)
            previous = score
        return items

    @property
    def doc_ids(self) -> List[str]:
        return [doc_id for doc_id, _ in self.items]

    def top(self, k: int) -> List[str]:
        """Document ids at ranks 1..k."""
        return self.doc_ids[:k]


class Judgments(BaseSchema):
    """Relevance grades keyed by request then document; absent pairs are non-relevant."""

    grades: Dict[str, Dict[str, int]] = Field(default_factory=dict)

    @field_validator("grades")
    @classmethod
    def _check_grades(cls, grades: Dict[str, Dict[str, int]]) -> Dict[str, Dict[str, int]]:
        for request_id, docs in grades.items():
            for doc_id, grade in docs.items():
                if grade < 0:
                    raise ValueError(f"negative grade for ({request_id}, {doc_id})")
        return grades

    def grade(self, request_id: str, doc_id: str) -> int:
        return self.grades.get(request_id, {}).get(doc_id, 0)

    def for_request(self, request_id: str) -> Dict[str, int]:
        return self.grades.get(request_id, {})

    @property
    def request_ids(self) -> List[str]:
        return sorted(self.grades)


class EvaluationMatrix(ArraySchema):
    """Per-request effectiveness scores (rows) for a set of systems (columns)."""

    scores: pd.DataFrame
    metric_name: str = "unknown"
    cutoff: Optional[int] = None

    @model_validator(mode="after")
    def _check_matrix(self) -> "EvaluationMatrix":
        frame = self.scores
        if frame.shape[1] < 2:
            raise ValueError("an evaluation matrix needs at least 2 systems")
        if frame.shape[0] < 2:
            raise ValueError("an evaluation matrix needs at least 2 requests")
        if frame.columns.duplicated().any():
            raise ValueError("duplicate system ids")
        if frame.index.duplicated().any():
            raise ValueError("duplicate request ids")
        values = frame.to_numpy(dtype=float)
        if not np.all(np.isfinite(values)):
            raise ValueError("all scores must be finite (paired design needs every cell)")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("scores must lie in [0, 1]")
        return self

    @property
    def system_ids(self) -> List[str]:
        return [str(c) for c in self.scores.columns]

    @property
    def request_ids(self) -> List[str]:
        return [str(r) for r in self.scores.index]

    @property
    def n_requests(self) -> int:
        return int(self.scores.shape[0])

    def column(self, system_id: str) -> np.ndarray:
        """Scores of one system as a float array, in request order."""
        return self.scores[system_id].to_numpy(dtype=float)

    def has_system(self, system_id: str) -> bool:
        return system_id in self.scores.columns
