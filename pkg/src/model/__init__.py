"""
Domain types and error hierarchy shared by every wishmix module.

The log posterior lives in src.model.posterior; it is not re-exported here
because it depends on src.config.
"""

from .errors import (
    WishmixError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    DomainError,
    InvalidLabelsError,
    EmptyDofGridError,
    ConfigError,
    FormatError,
    ConsistencyError,
)
from .types import Dataset, ModelState, BlockStats, FitResult, dense_labels, check_dense

__all__ = [
    "WishmixError",
    "DimensionMismatchError",
    "NotPositiveDefiniteError",
    "DomainError",
    "InvalidLabelsError",
    "EmptyDofGridError",
    "ConfigError",
    "FormatError",
    "ConsistencyError",
    "Dataset",
    "ModelState",
    "BlockStats",
    "FitResult",
    "dense_labels",
    "check_dense"
]
