"""
Exception hierarchy for SigScale.

Input errors are the caller's fault (bad files, unknown ids, invalid grids)
and map to CLI exit code 2. Numeric errors come from fitting or solving and
map to exit code 1.
"""
from typing import Iterable, Optional, Tuple


class SigScaleError(Exception):
    """Base class for all SigScale errors."""


class InputError(SigScaleError):
    """Invalid input supplied by the caller."""


class IngestError(InputError):
    """Malformed evaluation artifact."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")


class CoverageError(InputError):
    """Systems do not cover the same request set."""

    def __init__(self, missing: Iterable[Tuple[str, str]]):
        self.missing = sorted(missing)
        shown = ", ".join(f"({system}, {request})" for system, request in self.missing[:20])
        more = f" and {len(self.missing) - 20} more" if len(self.missing) > 20 else ""
        super().__init__(f"Missing (system, request) pairs: {shown}{more}")


class UnknownSystemError(InputError):
    """A system id is not present in the evaluation matrix."""

    def __init__(self, system_id: str):
        self.system_id = system_id
        super().__init__(f"Unknown system id: {system_id}")


class ConfigurationError(InputError):
    """Invalid experiment or CLI configuration."""


class NumericError(SigScaleError):
    """Internal numeric failure."""


class FitError(NumericError):
    """A distribution family could not be fitted to the data."""

    def __init__(self, message: str, family: Optional[str] = None, system_id: Optional[str] = None):
        self.family = family
        self.system_id = system_id
        prefix = ""
        if system_id is not None:
            prefix += f"system {system_id}: "
        if family is not None:
            prefix += f"{family}: "
        super().__init__(f"{prefix}{message}")


class UnreachableMeanError(NumericError):
    """A marginal cannot be transformed to the requested mean."""
