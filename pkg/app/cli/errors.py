"""
Mapping of library exceptions to exit codes.
"""
import functools
import sys
from typing import Callable

import click
from loguru import logger
from pydantic import ValidationError

from app.core.exceptions import InputError, NumericError

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def handle_errors(command: Callable) -> Callable:
    """Report SigScale errors on stderr and exit with 2 (input) or 1 (numeric/internal)."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (click.exceptions.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except (InputError, ValidationError) as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_USAGE)
        except NumericError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_INTERNAL)
        except Exception as e:
            logger.exception("Unexpected failure")
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_INTERNAL)

    return wrapper
