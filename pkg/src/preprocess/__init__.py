"""
Correlation estimation, shrinkage, whitening and node importance.
"""

from .preprocess import (
    WhitenReport,
    empirical_correlation,
    ledoit_wolf,
    whiten,
    importance,
    importance_ranking,
)

__all__ = [
    "WhitenReport",
    "empirical_correlation",
    "ledoit_wolf",
    "whiten",
    "importance",
    "importance_ranking"
]
