"""
Fit a simulation model bundle from a score matrix.
"""
from typing import List, Optional, Tuple

import click
import pandas as pd
from loguru import logger

from config.settings import Settings
from data.models.distributions import CopulaFamily, MarginalFamily
from data.models.evaluation import Metric
from data.models.simulation import PitMode
from app.core.exceptions import ConfigurationError
from app.core.metrics import infer_rr_cutoff
from app.core.simulation import fit_simulation_model, save_model
from app.cli.errors import handle_errors
from app.cli.grids import parse_choices, parse_names
from app.cli.io import print_table, read_matrix


def parse_pairs(text: Optional[str]) -> Optional[List[Tuple[str, str]]]:
    """``a:b,c:d`` -> [("a", "b"), ("c", "d")]."""
    names = parse_names(text)
    if not names:
        return None
    pairs = []
    for item in names:
        parts = item.split(":")
        if len(parts) != 2 or not all(parts):
            raise ConfigurationError(f"pair {item!r} must be written first:second")
        pairs.append((parts[0], parts[1]))
    return pairs


@click.command("fit")
@click.option("--matrix", "matrix_path", required=True, type=click.Path(dir_okay=False), help="CSV score matrix.")
@click.option("--metric", default=None, help="Metric of the matrix (rr selects discrete marginals).")
@click.option("--k", "k", type=click.IntRange(min=1), default=None, help="Rank cutoff of the metric.")
@click.option("--candidates", default=None, help="Comma-separated marginal families (default: per metric).")
@click.option("--copulas", default=None, help="Comma-separated copula families (default: all).")
@click.option("--pairs", default=None, help="Restrict copulas to pairs, e.g. sysA:sysB,sysA:sysC.")
@click.option("--pit", type=click.Choice([p.value for p in PitMode]), default=PitMode.RANK.value, show_default=True,
              help="Pseudo-observations from ranks or from the fitted marginal CDFs.")
@click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Model bundle (JSON).")
@click.pass_obj
@handle_errors
def fit_command(settings: Settings, matrix_path: str, metric: Optional[str], k: Optional[int],
                candidates: Optional[str], copulas: Optional[str], pairs: Optional[str], pit: str,
                seed: Optional[int], out: str):
    """Fit per-system marginals and pairwise copulas."""
    matrix = read_matrix(matrix_path, metric, k)
    if metric is None:
        inferred = infer_rr_cutoff(matrix.scores.to_numpy(dtype=float))
        if inferred is not None:
            cutoff = max(inferred, k or settings.rr_cutoff)
            logger.warning(f"No --metric given and every score is a reciprocal rank; fitting as rr@{cutoff}")
            matrix = matrix.model_copy(update={"metric_name": Metric.RR.value, "cutoff": cutoff})
        else:
            logger.info("No --metric given; fitting continuous marginal candidates")
    model = fit_simulation_model(
        matrix,
        candidates=parse_choices(candidates, MarginalFamily) or None,
        copula_families=parse_choices(copulas, CopulaFamily) or None,
        seed=settings.seed if seed is None else seed,
        pairs=parse_pairs(pairs),
        pit=PitMode(pit),
    )
    save_model(model, out)
    summary = pd.DataFrame(
        {
            "family": [m.family.value for m in model.marginals.values()],
            "mean": [m.mean for m in model.marginals.values()],
        },
        index=pd.Index(list(model.marginals), name="system"),
    )
    print_table(f"Marginals ({len(model.copulas)} copulas fitted)", summary)
