"""
Paired significance tests between two columns of a score matrix.
"""
from typing import Optional

import click
import pandas as pd

from config.settings import Settings
from data.models.significance import ResamplingConfig, TestName
from app.core.exceptions import UnknownSystemError
from app.core.stat_tests import run_all_tests
from app.cli.errors import handle_errors
from app.cli.grids import parse_choices
from app.cli.io import read_matrix, write_frame

RESULT_COLUMNS = ["test", "statistic", "p_value", "method", "resamples_used", "effective_n", "seed"]


@click.command("test")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(dir_okay=False), help="CSV score matrix.")
@click.option("--baseline", "-b", required=True, help="Baseline system id.")
@click.option("--experimental", "-e", required=True, help="Experimental system id.")
@click.option("--tests", default=None, help="Comma-separated subset of t,bootstrap,randomization,sign,wilcoxon.")
@click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=None, help="Resampling seed.")
@click.option("--bootstrap-resamples", type=click.IntRange(min=1), default=None)
@click.option("--randomization-resamples", type=click.IntRange(min=1), default=None)
@click.option("--exact-threshold", type=click.IntRange(min=1), default=None,
              help="Largest n enumerated exactly by the randomization and Wilcoxon tests.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", default="-", show_default=True)
@click.pass_obj
@handle_errors
def significance_command(settings: Settings, matrix_path: str, baseline: str, experimental: str,
                         tests: Optional[str], seed: Optional[int], bootstrap_resamples: Optional[int],
                         randomization_resamples: Optional[int],
                         exact_threshold: Optional[int], fmt: str, out: str):
    """Run the paired tests on experimental minus baseline scores."""
    matrix = read_matrix(matrix_path, None, None)
    for system_id in (baseline, experimental):
        if not matrix.has_system(system_id):
            raise UnknownSystemError(system_id)
    cfg = ResamplingConfig(
        bootstrap_B=bootstrap_resamples or settings.bootstrap_resamples,
        randomization_R=randomization_resamples or settings.randomization_resamples,
        exact_threshold=exact_threshold or settings.exact_threshold,
        seed=settings.seed if seed is None else seed,
    )
    selected = parse_choices(tests, TestName) or list(TestName)
    results = run_all_tests(matrix.column(baseline), matrix.column(experimental), cfg, selected)
    frame = pd.DataFrame.from_records(
        [
            {
                "test": result.test_name.value,
                "statistic": result.statistic,
                "p_value": result.p_value,
                "method": result.method.value,
                "resamples_used": result.resamples_used,
                "effective_n": result.effective_n,
                "seed": result.seed,
            }
            for result in results.values()
        ],
        columns=RESULT_COLUMNS,
    )
    write_frame(frame, out, fmt)
