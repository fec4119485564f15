"""
SigScale command line.
"""
import sys
from typing import Optional

import click
from loguru import logger

from config.settings import Settings, settings
from app.cli.commands import evaluate, experiments, fit, report, significance
from app.cli.errors import handle_errors
from app.cli.io import load_config

COMMANDS = [
    evaluate.eval_command,
    evaluate.describe_command,
    significance.significance_command,
    fit.fit_command,
    experiments.type1_command,
    experiments.power_command,
    report.report_command,
]

LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}"


def configure_logging(level: str) -> None:
    """Route loguru to a single stderr sink."""
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON file of flag values, flat or nested by subcommand.")
@click.option("--verbose", "-v", is_flag=True, help="Log debug details.")
@click.option("--quiet", "-q", is_flag=True, help="Log warnings and errors only.")
@click.version_option(settings.app_version, prog_name="sigscale")
@click.pass_context
@handle_errors
def cli(ctx: click.Context, config_path: Optional[str], verbose: bool, quiet: bool):
    """Paired significance tests for IR evaluation, and simulation of their error rates and power."""
    current = Settings()
    level = "DEBUG" if verbose else "WARNING" if quiet else current.log_level
    configure_logging(level)
    ctx.obj = current
    if config_path is not None:
        ctx.default_map = load_config(config_path, ctx.command.commands)


for command in COMMANDS:
    cli.add_command(command)


def main() -> None:
    cli(prog_name="sigscale")


if __name__ == "__main__":
    main()
