"""
Partition metrics, permutation tests and subject matching.
"""

from .partition import adjusted_rand_index, dice, recovery_score, RecoveryReport, compare_models
from .permutation import permutation_quantile, fdr_adjust
from .matching import match_subjects

__all__ = [
    "adjusted_rand_index",
    "dice",
    "recovery_score",
    "RecoveryReport",
    "compare_models",
    "permutation_quantile",
    "fdr_adjust",
    "match_subjects"
]
