"""
Plot-ready tables from experiment reports.
"""
from typing import Optional

import click
import numpy as np
import pandas as pd

from data.models.simulation import ExperimentKind, ExperimentReport
from app.core.exceptions import ConfigurationError
from app.core.experiments import calibration_curve
from app.cli.errors import handle_errors
from app.cli.io import read_report, write_frame

CALIBRATION_COLUMNS = ["test", "n", "alpha", "rate"]
POWER_CURVE_COLUMNS = ["test", "n", "delta", "power"]


def calibration_frame(report: ExperimentReport, points: Optional[int] = None) -> pd.DataFrame:
    """
    False-positive rate against alpha for every (test, n).

    With an archive the rates form the empirical CDF of the p-values on an
    evenly spaced alpha grid; otherwise they are the report's own rows.
    """
    if report.kind is not ExperimentKind.TYPE1:
        raise ConfigurationError(f"calibration needs a type1 report, got {report.kind.value}")
    if report.p_values is None:
        frame = report.to_frame()
        return frame.rename(columns={"rejection_rate": "rate"})[CALIBRATION_COLUMNS]
    alphas = None if points is None else np.linspace(1.0 / points, 1.0, points)
    records = []
    for test, n in dict.fromkeys((row.test_name, row.n) for row in report.rows):
        for alpha, rate in calibration_curve(report, test, n, alphas=alphas):
            records.append({"test": test.value, "n": n, "alpha": alpha, "rate": rate})
    return pd.DataFrame.from_records(records, columns=CALIBRATION_COLUMNS)


def power_curve_frame(report: ExperimentReport, alpha: Optional[float] = None) -> pd.DataFrame:
    """Power against delta for every (test, n) at one significance level."""
    if report.kind is not ExperimentKind.POWER:
        raise ConfigurationError(f"power-curve needs a power report, got {report.kind.value}")
    frame = report.to_frame()
    levels = sorted(frame["alpha"].unique())
    if alpha is None:
        alpha = 0.05 if any(np.isclose(levels, 0.05)) else levels[0]
    selected = frame[np.isclose(frame["alpha"], alpha)]
    if selected.empty:
        raise ConfigurationError(f"the report has no rows at alpha={alpha}")
    return selected.rename(columns={"rejection_rate": "power"})[POWER_CURVE_COLUMNS].reset_index(drop=True)


@click.command("report")
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
              help="Report CSV written by type1 or power.")
@click.option("--kind", type=click.Choice(["calibration", "power-curve"]), required=True)
@click.option("--archive", type=click.Path(dir_okay=False), default=None,
              help="Parquet p-value archive; calibration curves then use the full p-value distribution.")
@click.option("--alpha", type=click.FloatRange(min=0.0, max=1.0, min_open=True, max_open=True), default=None,
              help="Significance level of the power curve (default 0.05 when present).")
@click.option("--points", type=click.IntRange(min=2), default=None, help="Alpha grid size of calibration curves.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", default="-", show_default=True)
@handle_errors
def report_command(input_path: str, kind: str, archive: Optional[str], alpha: Optional[float],
                   points: Optional[int], fmt: str, out: str):
    """Turn an experiment report into long-format plot data."""
    report = read_report(input_path, archive)
    if kind == "calibration":
        frame = calibration_frame(report, points)
    else:
        frame = power_curve_frame(report, alpha)
    write_frame(frame, out, fmt)
