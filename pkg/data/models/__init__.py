"""
Data models and schemas for SigScale.
"""

from .base import BaseSchema, ArraySchema
from .evaluation import RankedList, Judgments, EvaluationMatrix, RunFormat, Metric, CoveragePolicy
from .significance import TestName, TestMethod, TestResult, ResamplingConfig
from .distributions import (
    MarginalFamily, MarginalModel, FitReport,
    CopulaFamily, CopulaModel, PseudoObservations
)
from .simulation import (
    PitMode, ExperimentKind, EffectEntry, EffectSpec, SimulationModel,
    ExperimentConfig, ReportRow, ExperimentReport
)

__all__ = [
    "BaseSchema",
    "ArraySchema",
    "RankedList",
    "Judgments",
    "EvaluationMatrix",
    "RunFormat",
    "Metric",
    "CoveragePolicy",
    "TestName",
    "TestMethod",
    "TestResult",
    "ResamplingConfig",
    "MarginalFamily",
    "MarginalModel",
    "FitReport",
    "CopulaFamily",
    "CopulaModel",
    "PseudoObservations",
    "PitMode",
    "ExperimentKind",
    "EffectEntry",
    "EffectSpec",
    "SimulationModel",
    "ExperimentConfig",
    "ReportRow",
    "ExperimentReport"
]
