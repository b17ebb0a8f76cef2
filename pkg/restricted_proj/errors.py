"""
Exception types for restricted_proj
"""

from typing import Iterable, List, Optional


class RestrictedProjError(Exception):
    """Base class for errors raised by the package."""


class ContractViolation(RestrictedProjError, ValueError):
    """An operation was called with inputs that break its precondition
    (mismatched dimensions, a scale below the resolution floor, ...)."""


class Rejection(RestrictedProjError, ValueError):
    """
    Structured rejection listing every failed check.

    Args:
        failures (Iterable[str]): One message per failed check
        subject (str, optional): What was rejected (a family, a generator spec, ...)
    """

    def __init__(self, failures: Iterable[str], subject: Optional[str] = None):
        self.failures: List[str] = list(failures)
        self.subject = subject
        prefix = f"{subject} rejected" if subject else "rejected"
        super().__init__(f"{prefix}: " + "; ".join(self.failures))


class ReportSchemaError(RestrictedProjError, ValueError):
    """A report file could not be parsed against its schema."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
