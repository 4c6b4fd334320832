"""
Permutation tests and multiple-comparison adjustment.

p-values use +1 smoothing, (1 + #{permuted >= observed}) / (1 + n_perm), and
quantiles use linear interpolation between order statistics.
"""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import false_discovery_control

from src.model.errors import DomainError


def empirical_quantile(values: Sequence[float], q: float) -> float:
    """q-quantile with linear interpolation (numpy's default rule)."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"quantile level must lie in [0, 1], got {q}")
    return float(np.quantile(np.asarray(values, dtype=float), q))


def permutation_pvalue(observed: float, values: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    return float((1 + np.sum(values >= observed)) / (1 + values.size))


def permutation_quantile(observed: float, stat: Callable[[np.ndarray], float],
                         labels: Sequence, n_perm: int = 1000, q: float = 0.95,
                         rng: Optional[np.random.Generator] = None) -> Tuple[float, float]:
    """
    Null distribution of stat under uniform relabeling.

    Returns the q-quantile of the permuted statistics and the p-value of the
    observed value.
    """
    if n_perm < 1:
        raise DomainError(f"n_perm must be >= 1, got {n_perm}")
    rng = rng if rng is not None else np.random.default_rng(0)
    labels = np.asarray(labels)
    values = np.array([stat(rng.permutation(labels)) for _ in range(n_perm)], dtype=float)
    return empirical_quantile(values, q), permutation_pvalue(observed, values)


def permutation_table(observed: np.ndarray, stat: Callable[[np.ndarray], np.ndarray],
                      size: int, n_perm: int = 1000, q: float = 0.95,
                      rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cell-wise permutation test of a table-valued statistic.

    stat receives an index permutation of length size; every cell shares the
    same permutations. Returns (quantile table, p-value table).
    """
    if n_perm < 1:
        raise DomainError(f"n_perm must be >= 1, got {n_perm}")
    rng = rng if rng is not None else np.random.default_rng(0)
    observed = np.asarray(observed, dtype=float)
    null = np.stack([np.asarray(stat(rng.permutation(size)), dtype=float) for _ in range(n_perm)])
    quantile = np.quantile(null, q, axis=0)
    pvalues = (1 + np.sum(null >= observed, axis=0)) / (1 + n_perm)
    return quantile, pvalues


def fdr_adjust(pvalues: Sequence[float]) -> np.ndarray:
    """Benjamini-Hochberg step-up adjusted p-values."""
    p = np.asarray(pvalues, dtype=float)
    if p.size == 0:
        return p
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise DomainError("p-values must lie in [0, 1]")
    return false_discovery_control(p, method="bh")
