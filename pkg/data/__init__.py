"""
Data package for SigScale.
"""

from . import models

__all__ = ["models"]
