"""
Exception hierarchy for wishmix.

Every error raised on purpose by the library derives from WishmixError, so the
CLI can map them to exit code 1 without swallowing programming errors.
"""

from typing import Optional


class WishmixError(Exception):
    """Base class for all wishmix errors."""


class DimensionMismatchError(WishmixError, ValueError):
    """Matrices, labels or node subsets disagree in size."""


class NotPositiveDefiniteError(WishmixError, ValueError):
    """A matrix that must be positive definite failed its Cholesky factorization."""

    def __init__(self, message: str, subject_id: Optional[str] = None):
        if subject_id is not None:
            message = f"{message} (subject '{subject_id}')"
        super().__init__(message)
        self.subject_id = subject_id


class DomainError(WishmixError, ValueError):
    """An argument lies outside the domain of a mathematical function."""


class InvalidLabelsError(WishmixError, ValueError):
    """Partition labels are empty or not dense (1..K, each used)."""


class EmptyDofGridError(WishmixError, ValueError):
    """The degree-of-freedom prior support is empty for this dataset."""


class ConfigError(WishmixError, ValueError):
    """A configuration value violates its invariant."""


class FormatError(WishmixError, ValueError):
    """A manifest, model or matrix file is malformed."""


class ConsistencyError(WishmixError, AssertionError):
    """Debug-mode check failed: an incremental score disagrees with the full posterior."""
