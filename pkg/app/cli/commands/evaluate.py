"""
Evaluation commands: score run files into a matrix, and describe a matrix.
"""
from typing import Optional, Tuple

import click

from config.settings import Settings
from data.models.evaluation import CoveragePolicy, Metric, RunFormat
from app.core.ingest import build_matrix, parse_qrels, parse_run_file, summarize_matrix
from app.cli.errors import handle_errors
from app.cli.io import print_table, read_matrix, save_matrix, write_frame


@click.command("eval")
@click.option("--runs", "runs", multiple=True, required=True, type=click.Path(dir_okay=False),
              help="Run file; repeat the flag for several files.")
@click.option("--qrels", required=True, type=click.Path(dir_okay=False), help="Relevance judgments.")
@click.option("--metric", type=click.Choice([m.value for m in Metric]), default=Metric.RR.value, show_default=True)
@click.option("--k", "k", type=click.IntRange(min=1), default=None, help="Rank cutoff (default: SIGSCALE_RR_CUTOFF).")
@click.option("--run-format", type=click.Choice([RunFormat.TREC_RUN.value, RunFormat.MSMARCO_RUN.value]),
              default=RunFormat.TREC_RUN.value, show_default=True)
@click.option("--policy", type=click.Choice([p.value for p in CoveragePolicy]), default=None,
              help="Coverage policy when systems answer different requests.")
@click.option("--out", default="-", show_default=True, help="Output CSV matrix ('-' for stdout).")
@click.pass_obj
@handle_errors
def eval_command(settings: Settings, runs: Tuple[str, ...], qrels: str, metric: str, k: Optional[int],
                 run_format: str, policy: Optional[str], out: str):
    """Score ranked runs against judgments into a request x system CSV matrix."""
    judgments = parse_qrels(qrels)
    ranked = []
    for path in runs:
        ranked.extend(parse_run_file(path, RunFormat(run_format)))
    matrix = build_matrix(
        ranked,
        judgments,
        metric=Metric(metric),
        k=settings.rr_cutoff if k is None else k,
        policy=CoveragePolicy(policy or settings.coverage_policy),
    )
    save_matrix(matrix, out)


@click.command("describe")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(dir_okay=False), help="CSV score matrix.")
@click.option("--metric", default=None, help="Metric name recorded on the matrix.")
@click.option("--k", "k", type=click.IntRange(min=1), default=None, help="Rank cutoff recorded on the matrix.")
@click.option("--out", default=None, help="Also write the summary as CSV ('-' for stdout).")
@click.pass_obj
@handle_errors
def describe_command(settings: Settings, matrix_path: str, metric: Optional[str], k: Optional[int],
                     out: Optional[str]):
    """Print per-system summary statistics of a score matrix."""
    matrix = read_matrix(matrix_path, metric, k)
    summary = summarize_matrix(matrix)
    title = f"{len(matrix.system_ids)} systems x {matrix.n_requests} requests ({matrix.metric_name})"
    print_table(title, summary)
    if out is not None:
        write_frame(summary.reset_index(), out)
