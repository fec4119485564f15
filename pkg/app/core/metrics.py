"""
Per-request effectiveness metrics.
"""
from typing import List, Optional

import numpy as np

from config.settings import settings
from data.models.evaluation import Judgments, Metric, RankedList


def reciprocal_rank(ranked: RankedList, judgments: Judgments, k: int,
                    threshold: Optional[int] = None) -> float:
    """
    Reciprocal rank of the first relevant item within the top ``k``.

    Args:
        ranked: Ranked list of one system for one request
        judgments: Relevance grades; unjudged documents are non-relevant
        k: Rank cutoff
        threshold: Minimum grade counted as relevant

    Returns:
        float: 1/r for the first relevant rank r <= k, else 0
    """
    if k < 1:
        raise ValueError("cutoff k must be at least 1")
    threshold = settings.relevance_threshold if threshold is None else threshold
    grades = judgments.for_request(ranked.request_id)
    for rank, doc_id in enumerate(ranked.top(k), start=1):
        if grades.get(doc_id, 0) >= threshold:
            return 1.0 / rank
    return 0.0


def _dcg(gains: List[float]) -> float:
    if not gains:
        return 0.0
    discounts = np.log2(np.arange(2, len(gains) + 2))
    return float(np.sum(np.asarray(gains, dtype=float) / discounts))


def ndcg(ranked: RankedList, judgments: Judgments, k: int) -> float:
    """
    nDCG@k with log2 discount and gain equal to the relevance grade.

    A request without any judged-relevant document scores 0.
    """
    if k < 1:
        raise ValueError("cutoff k must be at least 1")
    grades = judgments.for_request(ranked.request_id)
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)[:k]
    ideal_dcg = _dcg(ideal)
    if ideal_dcg == 0.0:
        return 0.0
    gains = [float(grades.get(doc_id, 0)) for doc_id in ranked.top(k)]
    return min(1.0, _dcg(gains) / ideal_dcg)


def score(metric: Metric, ranked: RankedList, judgments: Judgments, k: int) -> float:
    """Dispatch to the metric implementation."""
    if metric is Metric.RR:
        return reciprocal_rank(ranked, judgments, k)
    if metric is Metric.NDCG:
        return ndcg(ranked, judgments, k)
    raise ValueError(f"Unsupported metric: {metric}")


def rr_support(k: int) -> List[float]:
    """Ascending value set {0} U {1/r : 1 <= r <= k} of RR@k."""
    if k < 1:
        raise ValueError("cutoff k must be at least 1")
    return [0.0] + [1.0 / r for r in range(k, 0, -1)]


def infer_rr_cutoff(scores, max_k: int = 1000) -> Optional[int]:
    """
    Largest rank implied by a set of reciprocal-rank scores.

    Returns None when some score is not 0 or 1/r for an integer r <= max_k,
    or when every score is 0.
    """
    values = np.asarray(scores, dtype=float).ravel()
    positive = values[values > 0.0]
    if positive.size == 0 or np.any(values < 0.0):
        return None
    ranks = np.rint(1.0 / positive)
    if ranks.max() > max_k or not np.allclose(positive, 1.0 / ranks, rtol=0.0, atol=1e-9):
        return None
    return int(ranks.max())
