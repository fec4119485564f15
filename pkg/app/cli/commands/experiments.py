"""
Type-I error and power experiment commands.
"""
from typing import Callable, Optional

import click

from config.settings import Settings, FULL_SCALE
from data.models.significance import ResamplingConfig, TestName
from data.models.simulation import ExperimentConfig
from app.core.experiments import power_experiment, type1_experiment
from app.core.simulation import load_model
from app.cli.errors import handle_errors
from app.cli.grids import parse_choices, parse_grid
from app.cli.io import write_report


def experiment_options(command: Callable) -> Callable:
    """Options shared by type1 and power."""
    options = [
        click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False),
                     help="Model bundle written by 'fit'."),
        click.option("--n", "n", default=None, help="Sample sizes, e.g. 25,100,1000 or 1000:5000:1000."),
        click.option("--trials", type=click.IntRange(min=100), default=None, help="Trials per grid point."),
        click.option("--full-scale", is_flag=True, default=False,
                     help="Use the full-size trial counts (10,000 null / 2,500 power) unless --trials is given."),
        click.option("--alphas", default=None, help="Significance levels, e.g. 0.01,0.05,0.1."),
        click.option("--tests", default=None, help="Comma-separated subset of t,bootstrap,randomization,sign,wilcoxon."),
        click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=None),
        click.option("--threads", type=click.IntRange(min=1), default=None,
                     help="Worker threads (default: SIGSCALE_THREADS or the CPU count)."),
        click.option("--trials-per-task", type=click.IntRange(min=1), default=None),
        click.option("--bootstrap-resamples", type=click.IntRange(min=1), default=None),
        click.option("--randomization-resamples", type=click.IntRange(min=1), default=None),
        click.option("--exact-threshold", type=click.IntRange(min=1), default=None),
        click.option("--archive", type=click.Path(dir_okay=False), default=None,
                     help="Also store every raw p-value in this parquet file."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
        click.option("--out", default="-", show_default=True, help="Report file ('-' for stdout)."),
        click.option("--progress/--no-progress", default=False, help="Show a progress bar on stderr."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_config(settings: Settings, kind: str, n: Optional[str], trials: Optional[int], full_scale: bool,
                 alphas: Optional[str], deltas: Optional[str], tests: Optional[str], seed: Optional[int],
                 threads: Optional[int], trials_per_task: Optional[int], bootstrap_resamples: Optional[int],
                 randomization_resamples: Optional[int], exact_threshold: Optional[int],
                 archive: Optional[str]) -> ExperimentConfig:
    """Resolve flags against settings into an ExperimentConfig."""
    default_trials = settings.null_trials if kind == "type1" else settings.power_trials
    if trials is None:
        trials = FULL_SCALE[f"{'null' if kind == 'type1' else 'power'}_trials"] if full_scale else default_trials
    seed = settings.seed if seed is None else seed
    return ExperimentConfig(
        sample_sizes=parse_grid(n, int) or settings.sample_sizes,
        trials=trials,
        alphas=parse_grid(alphas, float) or settings.alphas,
        deltas=parse_grid(deltas, float) or settings.deltas,
        seed=seed,
        tests=parse_choices(tests, TestName) or list(TestName),
        resampling=ResamplingConfig(
            bootstrap_B=bootstrap_resamples or settings.bootstrap_resamples,
            randomization_R=randomization_resamples or settings.randomization_resamples,
            exact_threshold=exact_threshold or settings.exact_threshold,
            seed=seed,
        ),
        threads=threads or settings.threads,
        trials_per_task=trials_per_task or settings.trials_per_task,
        archive=archive is not None,
    )


@click.command("type1")
@experiment_options
@click.pass_obj
@handle_errors
def type1_command(settings: Settings, model_path: str, fmt: str, out: str, archive: Optional[str],
                  progress: bool, **flags):
    """Estimate false-positive rates of the tests under the null."""
    model = load_model(model_path)
    cfg = build_config(settings, "type1", deltas=None, archive=archive, **flags)
    report = type1_experiment(model, cfg, progress=progress)
    write_report(report, out, fmt, archive)


@click.command("power")
@experiment_options
@click.option("--deltas", default=None, help="Effect sizes, e.g. 0.01:0.1:0.01.")
@click.pass_obj
@handle_errors
def power_command(settings: Settings, model_path: str, fmt: str, out: str, archive: Optional[str],
                  progress: bool, **flags):
    """Estimate the power of the tests for a grid of effect sizes."""
    model = load_model(model_path)
    cfg = build_config(settings, "power", archive=archive, **flags)
    report = power_experiment(model, cfg, progress=progress)
    write_report(report, out, fmt, archive)
