"""
Parsing of run files, qrels and score matrices, and assembly of evaluation matrices.
"""
import math
import os
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, TextIO, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from config.settings import settings
from data.models.evaluation import (
    CoveragePolicy, EvaluationMatrix, Judgments, Metric, RankedList, RunFormat
)
from app.core import metrics
from app.core.exceptions import CoverageError, IngestError, InputError

PathLike = Union[str, "os.PathLike[str]"]


def _read_lines(path: PathLike) -> List[str]:
    if not os.path.exists(path):
        raise IngestError("file does not exist", path=str(path))
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read().splitlines()


def _parse_float(token: str, what: str, path: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise IngestError(f"non-numeric {what} {token!r}", path=path, line=line) from None
    if not math.isfinite(value):
        raise IngestError(f"non-finite {what} {token!r}", path=path, line=line)
    return value


def _parse_int(token: str, what: str, path: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise IngestError(f"non-integer {what} {token!r}", path=path, line=line) from None


def _group_rankings(entries: Dict[Tuple[str, str], List[Tuple[float, int, str]]]) -> List[RankedList]:
    """Sort each (system, request) group by descending score, then file order, then doc id."""
    ranked_lists = []
    for (system_id, request_id) in sorted(entries):
        rows = sorted(entries[(system_id, request_id)], key=lambda row: (-row[0], row[1], row[2]))
        ranked_lists.append(RankedList(
            system_id=system_id,
            request_id=request_id,
            items=[(doc_id, score) for score, _, doc_id in rows],
        ))
    return ranked_lists


def _parse_trec_run(path: str) -> List[RankedList]:
    entries: Dict[Tuple[str, str], List[Tuple[float, int, str]]] = defaultdict(list)
    seen = set()
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 6:
            raise IngestError(f"expected 6 fields 'qid Q0 docid rank score tag', got {len(fields)}",
                              path=path, line=line_no)
        request_id, _, doc_id, rank, score, system_id = fields
        _parse_int(rank, "rank", path, line_no)
        value = _parse_float(score, "score", path, line_no)
        key = (system_id, request_id, doc_id)
        if key in seen:
            raise IngestError(f"duplicate (request, doc) pair ({request_id}, {doc_id}) for run {system_id}",
                              path=path, line=line_no)
        seen.add(key)
        entries[(system_id, request_id)].append((value, line_no, doc_id))
    return _group_rankings(entries)


def _parse_msmarco_run(path: str) -> List[RankedList]:
    system_id = os.path.splitext(os.path.basename(path))[0]
    entries: Dict[Tuple[str, str], List[Tuple[float, int, str]]] = defaultdict(list)
    seen = set()
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 3:
            raise IngestError(f"expected 3 fields 'qid docid rank', got {len(fields)}", path=path, line=line_no)
        request_id, doc_id, rank = fields
        position = _parse_int(rank, "rank", path, line_no)
        if position < 1:
            raise IngestError(f"rank must be positive, got {position}", path=path, line=line_no)
        if (request_id, doc_id) in seen:
            raise IngestError(f"duplicate (request, doc) pair ({request_id}, {doc_id})", path=path, line=line_no)
        seen.add((request_id, doc_id))
        entries[(system_id, request_id)].append((-float(position), line_no, doc_id))
    return _group_rankings(entries)


def _parse_csv_matrix(path: str, metric_name: str, cutoff: Optional[int]) -> EvaluationMatrix:
    if not os.path.exists(path):
        raise IngestError("file does not exist", path=path)
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    if len(frame.columns) == 0 or frame.columns[0] != "request":
        raise IngestError("first header column must be 'request'", path=path, line=1)
    scores = {}
    for system_id in frame.columns[1:]:
        values = pd.to_numeric(frame[system_id], errors="coerce")
        bad = np.flatnonzero(~np.isfinite(values.to_numpy(dtype=float)))
        if bad.size:
            row = int(bad[0])
            raise IngestError(
                f"non-numeric score {frame[system_id].iloc[row]!r} for system {system_id}",
                path=path, line=row + 2,
            )
        scores[system_id] = values.to_numpy(dtype=float)
    requests = frame["request"]
    if requests.duplicated().any():
        row = int(np.flatnonzero(requests.duplicated().to_numpy())[0])
        raise IngestError(f"duplicate request {requests.iloc[row]!r}", path=path, line=row + 2)
    table = pd.DataFrame(scores, index=pd.Index(requests, name="request"))
    try:
        return EvaluationMatrix(scores=table.sort_index(), metric_name=metric_name, cutoff=cutoff)
    except ValueError as e:
        raise IngestError(str(e), path=path) from None


def parse_run_file(path: PathLike, format: RunFormat = RunFormat.TREC_RUN,
                   metric_name: str = "unknown",
                   cutoff: Optional[int] = None) -> Union[List[RankedList], EvaluationMatrix]:
    """
    Parse an evaluation artifact.

    Args:
        path: File to read
        format: trec-run and msmarco-run yield ranked lists, csv-matrix an EvaluationMatrix
        metric_name: Metric recorded on a csv-matrix
        cutoff: Rank cutoff recorded on a csv-matrix

    Returns:
        One RankedList per (system, request), or the EvaluationMatrix
    """
    path = str(path)
    format = RunFormat(format)
    if format is RunFormat.CSV_MATRIX:
        matrix = _parse_csv_matrix(path, metric_name, cutoff)
        logger.info(f"Loaded {matrix.n_requests} x {len(matrix.system_ids)} score matrix from {path}")
        return matrix
    if format is RunFormat.MSMARCO_RUN:
        ranked = _parse_msmarco_run(path)
    else:
        ranked = _parse_trec_run(path)
    logger.info(f"Parsed {len(ranked)} ranked lists from {path}")
    return ranked


def parse_qrels(path: PathLike) -> Judgments:
    """Parse a qrels file of 'qid iter docid grade' lines."""
    path = str(path)
    grades: Dict[str, Dict[str, int]] = defaultdict(dict)
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 4:
            raise IngestError(f"expected 4 fields 'qid 0 docid grade', got {len(fields)}", path=path, line=line_no)
        request_id, _, doc_id, grade = fields
        value = _parse_int(grade, "grade", path, line_no)
        if value < 0:
            raise IngestError(f"negative grade {value}", path=path, line=line_no)
        if doc_id in grades[request_id]:
            raise IngestError(f"duplicate judgment for ({request_id}, {doc_id})", path=path, line=line_no)
        grades[request_id][doc_id] = value
    logger.info(f"Parsed judgments for {len(grades)} requests from {path}")
    return Judgments(grades=dict(grades))


def _group_by_system(runs: Union[Iterable[RankedList], Mapping[str, Iterable[RankedList]]]) -> Dict[str, Dict[str, RankedList]]:
    if isinstance(runs, Mapping):
        lists = [(system_id, ranked) for system_id, group in runs.items() for ranked in group]
    else:
        lists = [(ranked.system_id, ranked) for ranked in runs]
    grouped: Dict[str, Dict[str, RankedList]] = defaultdict(dict)
    for system_id, ranked in lists:
        if ranked.request_id in grouped[system_id]:
            raise InputError(f"system {system_id} has two rankings for request {ranked.request_id}")
        grouped[system_id][ranked.request_id] = ranked
    return grouped


def build_matrix(runs: Union[Iterable[RankedList], Mapping[str, Iterable[RankedList]]],
                 judgments: Judgments,
                 metric: Metric = Metric.RR,
                 k: Optional[int] = None,
                 policy: Optional[CoveragePolicy] = None) -> EvaluationMatrix:
    """
    Score every system's ranked lists into an EvaluationMatrix.

    Args:
        runs: Ranked lists, flat or grouped by system
        judgments: Relevance judgments
        metric: rr or ndcg
        k: Rank cutoff (defaults to settings.rr_cutoff)
        policy: strict (error on uneven coverage) or intersect (common requests only)

    Returns:
        EvaluationMatrix: requests sorted by id, systems sorted by id
    """
    metric = Metric(metric)
    k = settings.rr_cutoff if k is None else k
    policy = CoveragePolicy(policy or settings.coverage_policy)
    grouped = _group_by_system(runs)
    all_requests = set().union(*(set(by_request) for by_request in grouped.values())) if grouped else set()

    if policy is CoveragePolicy.STRICT:
        missing = [
            (system_id, request_id)
            for system_id, by_request in grouped.items()
            for request_id in all_requests - set(by_request)
        ]
        if missing:
            raise CoverageError(missing)
        requests = sorted(all_requests)
    else:
        common = set.intersection(*(set(by_request) for by_request in grouped.values())) if grouped else set()
        if not common:
            raise InputError("no request is covered by every system")
        dropped = len(all_requests) - len(common)
        if dropped:
            logger.warning(f"Intersect policy dropped {dropped} requests not covered by every system")
        requests = sorted(common)

    systems = sorted(grouped)
    table = pd.DataFrame(
        {
            system_id: [metrics.score(metric, grouped[system_id][request_id], judgments, k)
                        for request_id in requests]
            for system_id in systems
        },
        index=pd.Index(requests, name="request"),
    )
    logger.info(f"Built {len(requests)} x {len(systems)} {metric.value}@{k} matrix")
    return EvaluationMatrix(scores=table, metric_name=metric.value, cutoff=k)


def write_matrix(matrix: EvaluationMatrix, target: Union[PathLike, TextIO]) -> None:
    """Write the canonical CSV interchange format."""
    matrix.scores.to_csv(target, index_label="request", lineterminator="\n")


def summarize_matrix(matrix: EvaluationMatrix) -> pd.DataFrame:
    """Per-system summary: mean, standard deviation and share of zero scores."""
    frame = matrix.scores
    summary = pd.DataFrame({
        "mean": frame.mean(axis=0),
        "std": frame.std(axis=0, ddof=1),
        "zero_share": (frame == 0.0).mean(axis=0),
        "distinct_values": frame.nunique(axis=0),
    })
    summary.index.name = "system"
    return summary
