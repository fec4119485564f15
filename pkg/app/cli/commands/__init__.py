"""
Subcommands, one module per area.
"""

from . import evaluate, experiments, fit, report, significance

__all__ = ["evaluate", "experiments", "fit", "report", "significance"]
