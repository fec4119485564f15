"""
Synthetic fixture generation for SigScale.
"""

from .generator import SyntheticDataGenerator
from .matrix_data import MatrixDataGenerator
from .run_data import RunDataGenerator

__all__ = [
    "SyntheticDataGenerator",
    "MatrixDataGenerator",
    "RunDataGenerator",
]
