"""
File helpers for the command line. A path of ``-`` means standard output.
"""
import json
import os
from typing import Any, Dict, Iterable, Optional

import click
import pandas as pd
from loguru import logger
from rich.console import Console
from rich.table import Table

from data.models.evaluation import EvaluationMatrix, RunFormat
from data.models.simulation import ARCHIVE_COLUMNS, ExperimentReport
from app.core.exceptions import ConfigurationError, IngestError
from app.core.ingest import parse_run_file, write_matrix

stderr_console = Console(stderr=True)


def write_frame(frame: pd.DataFrame, path: str, fmt: str = "csv") -> None:
    """Write a table as CSV or as a JSON list of records."""
    with click.open_file(path, "w", encoding="utf-8", lazy=False) as handle:
        if fmt == "json":
            handle.write(frame.to_json(orient="records", indent=2, double_precision=15))
            handle.write("\n")
        else:
            frame.to_csv(handle, index=False, lineterminator="\n")
    if path != "-":
        logger.info(f"Wrote {len(frame)} rows to {path}")


def save_matrix(matrix: EvaluationMatrix, path: str) -> None:
    with click.open_file(path, "w", encoding="utf-8", lazy=False) as handle:
        write_matrix(matrix, handle)


def read_matrix(path: str, metric: Optional[str], k: Optional[int]) -> EvaluationMatrix:
    return parse_run_file(path, RunFormat.CSV_MATRIX, metric_name=metric or "unknown", cutoff=k)


def read_report(path: str, archive: Optional[str] = None) -> ExperimentReport:
    """Load a report CSV and, optionally, its parquet p-value archive."""
    if not os.path.exists(path):
        raise IngestError("report does not exist", path=path)
    try:
        frame = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise IngestError("report is empty", path=path) from None
    p_values = None
    if archive is not None:
        if not os.path.exists(archive):
            raise IngestError("p-value archive does not exist", path=archive)
        p_values = pd.read_parquet(archive)
        missing = set(ARCHIVE_COLUMNS) - set(p_values.columns)
        if missing:
            raise IngestError(f"archive is missing columns {sorted(missing)}", path=archive)
    try:
        return ExperimentReport.from_frame(frame, p_values)
    except ValueError as e:
        raise IngestError(str(e), path=path) from None


def write_report(report: ExperimentReport, path: str, fmt: str, archive: Optional[str]) -> None:
    write_frame(report.to_frame(), path, fmt)
    if archive is not None:
        if report.p_values is None:
            raise ConfigurationError("no p-values were archived")
        report.p_values.to_parquet(archive, index=False)
        logger.info(f"Archived {len(report.p_values)} p-values to {archive}")


def print_table(title: str, frame: pd.DataFrame, index_label: Optional[str] = None) -> None:
    """Render a DataFrame as a rich table on stderr."""
    table = Table(title=title)
    columns = [index_label or frame.index.name or ""] + list(frame.columns)
    for column in columns:
        table.add_column(str(column))
    for index, row in frame.iterrows():
        cells = [str(index)] + [f"{value:.4f}" if isinstance(value, float) else str(value) for value in row]
        table.add_row(*cells)
    stderr_console.print(table)


def load_config(path: str, commands: Iterable[str]) -> Dict[str, Dict[str, Any]]:
    """
    Read a JSON config into a click default map.

    Top-level keys naming a subcommand hold that subcommand's options; all
    other keys apply to every subcommand. Keys use flag names (dashes or
    underscores).
    """
    if not os.path.exists(path):
        raise IngestError("config file does not exist", path=path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as e:
        raise IngestError(f"invalid JSON: {e.msg}", path=path, line=e.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} must hold a JSON object")
    commands = set(commands)

    def normalize(options: Dict[str, Any]) -> Dict[str, Any]:
        normalized = {}
        for key, value in options.items():
            if isinstance(value, list):
                value = ",".join(str(item) for item in value)
            normalized[key.lstrip("-").replace("-", "_")] = value
        return normalized

    shared = normalize({key: value for key, value in raw.items() if key not in commands})
    default_map = {}
    for command in commands:
        nested = raw.get(command, {})
        if not isinstance(nested, dict):
            raise ConfigurationError(f"config section {command!r} must be a JSON object")
        default_map[command] = {**shared, **normalize(nested)}
    return default_map
