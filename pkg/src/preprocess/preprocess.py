"""
Preprocessing of connectivity matrices.

- empirical_correlation: Pearson correlation of a T x p time series
- ledoit_wolf: shrinkage towards mu*I for short or serially correlated series
- whiten: M -> Mbar^{-1/2} M Mbar^{-1/2}, renormalised to correlation form
- importance: how strongly an original node loads on the nodes of a view
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from sklearn.covariance import empirical_covariance, shrunk_covariance
from sklearn.covariance import ledoit_wolf as sklearn_ledoit_wolf

from src.model.errors import DimensionMismatchError, DomainError, NotPositiveDefiniteError
from src.model.types import Dataset

logger = logging.getLogger(__name__)

EIGENVALUE_FLOOR = 1e-12
# smallest eigenvalue of a shrunk covariance, relative to mu = tr(S)/p
SHRINKAGE_EIGEN_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class WhitenReport:
    """Mean matrix of a whitening step and its symmetric square roots."""
    mean_matrix: np.ndarray     # Mbar
    mean_inv_sqrt: np.ndarray   # Mbar^{-1/2}
    mean_sqrt: np.ndarray       # Mbar^{1/2}: cross-covariance of original and whitened nodes

    @property
    def p(self) -> int:
        return self.mean_matrix.shape[0]

    def cross_correlation(self, normalize: bool = True) -> np.ndarray:
        """Mbar^{1/2}, optionally rescaled to unit diagonal (correlation form)."""
        if not normalize:
            return self.mean_sqrt
        return to_correlation(self.mean_sqrt)


def to_correlation(matrix: np.ndarray) -> np.ndarray:
    """D^{-1/2} A D^{-1/2} with D = diag(A); the diagonal is set to exactly 1."""
    d = np.sqrt(np.diag(matrix))
    if np.any(d <= 0):
        raise NotPositiveDefiniteError("cannot normalise a matrix with a non-positive diagonal")
    out = matrix / np.outer(d, d)
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return out


def _symmetric_powers(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(A^{1/2}, A^{-1/2}) of a symmetric positive-definite matrix via eigh."""
    eigvals, eigvecs = np.linalg.eigh(0.5 * (matrix + matrix.T))
    if np.min(eigvals) < EIGENVALUE_FLOOR:
        raise NotPositiveDefiniteError(
            f"mean matrix has eigenvalue {np.min(eigvals):.3e} below {EIGENVALUE_FLOOR:g}"
        )
    root = np.sqrt(eigvals)
    sqrt = (eigvecs * root) @ eigvecs.T
    inv_sqrt = (eigvecs / root) @ eigvecs.T
    return 0.5 * (sqrt + sqrt.T), 0.5 * (inv_sqrt + inv_sqrt.T)


def empirical_correlation(series: np.ndarray) -> np.ndarray:
    """Pearson correlation between the columns of a T x p series (unit diagonal)."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 2:
        raise DimensionMismatchError(f"series must be T x p, got shape {series.shape}")
    if series.shape[0] < 2:
        raise DomainError(f"need at least 2 time points, got {series.shape[0]}")
    centered = series - series.mean(axis=0)
    norms = np.sqrt(np.sum(centered * centered, axis=0))
    constant = np.flatnonzero(norms == 0)
    if constant.size:
        raise DomainError(f"column {int(constant[0])} of the series is constant")
    scaled = centered / norms
    corr = scaled.T @ scaled
    corr = np.clip(0.5 * (corr + corr.T), -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


def ledoit_wolf(series: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Ledoit-Wolf shrinkage (1 - rho) S + rho mu I with mu = tr(S)/p.

    Returns the shrunk covariance and the shrinkage intensity rho in [0, 1].
    When the estimated rho leaves the result singular (two time points, where
    the sample covariance has rank one and the variance term vanishes) rho is
    raised to the smallest value whose eigenvalues stay above
    SHRINKAGE_EIGEN_FLOOR * mu.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim == 1:
        series = series[:, np.newaxis]
    if series.shape[0] < 2:
        raise DomainError(f"need at least 2 time points, got {series.shape[0]}")
    centered = series - series.mean(axis=0)
    if not np.any(centered):
        raise DomainError("series is degenerate: every column is constant")
    _, shrinkage = sklearn_ledoit_wolf(centered, assume_centered=True)
    rho = float(np.clip(shrinkage, 0.0, 1.0))

    sample = empirical_covariance(centered, assume_centered=True)
    mu = float(np.trace(sample)) / sample.shape[0]
    smallest = float(np.linalg.eigvalsh(sample)[0])
    floor = SHRINKAGE_EIGEN_FLOOR * mu
    if (1.0 - rho) * smallest + rho * mu < floor:
        # mu > floor > smallest here
        raised = (floor - smallest) / (mu - smallest)
        logger.warning("Ledoit-Wolf shrinkage %.3g leaves a singular covariance (T=%d, p=%d); using %.3g",
                       rho, series.shape[0], series.shape[1], raised)
        rho = raised
    return shrunk_covariance(sample, rho), rho


def regularized_correlation(series: np.ndarray) -> np.ndarray:
    """Ledoit-Wolf covariance of a series, normalised to a correlation matrix."""
    shrunk, _ = ledoit_wolf(series)
    return to_correlation(shrunk)


def whiten(data: Dataset, mean_matrix: Optional[np.ndarray] = None) -> Tuple[Dataset, WhitenReport]:
    """
    Whiten every matrix with the dataset mean (or an injected mean).

    Correlation datasets are renormalised to unit diagonal after whitening.
    """
    mean = data.matrices.mean(axis=0) if mean_matrix is None else np.asarray(mean_matrix, dtype=float)
    if mean.shape != (data.p, data.p):
        raise DimensionMismatchError(f"mean matrix is {mean.shape}, dataset has p={data.p}")
    mean = 0.5 * (mean + mean.T)
    sqrt, inv_sqrt = _symmetric_powers(mean)

    whitened = np.einsum("ij,njk,kl->nil", inv_sqrt, data.matrices, inv_sqrt)
    whitened = 0.5 * (whitened + np.transpose(whitened, (0, 2, 1)))
    if data.kind == "correlation":
        whitened = np.stack([to_correlation(m) for m in whitened])

    report = WhitenReport(mean_matrix=mean, mean_inv_sqrt=inv_sqrt, mean_sqrt=sqrt)
    return replace(data, matrices=whitened), report


def pooled_mean(datasets: Iterable[Dataset]) -> np.ndarray:
    """Mean matrix over every subject of several datasets (shared whitening space)."""
    stacks = [d.matrices for d in datasets]
    if not stacks:
        raise DomainError("no datasets to pool")
    p = stacks[0].shape[1]
    if any(s.shape[1] != p for s in stacks):
        raise DimensionMismatchError("pooled datasets disagree in p")
    return np.concatenate(stacks).mean(axis=0)


def importance(roi: int, view_nodes: Sequence[int], report: WhitenReport,
               normalize: bool = True) -> float:
    """
    sum over whitened nodes u of the view of |r_{roi,u}|.

    r is read from Mbar^{1/2}, rescaled to correlation form unless normalize is False.
    """
    p = report.p
    if not 0 <= roi < p:
        raise DimensionMismatchError(f"node {roi} out of range for p={p}")
    nodes = np.asarray(list(view_nodes), dtype=int)
    if nodes.size == 0:
        logger.warning("importance requested for an empty view; returning 0")
        return 0.0
    if np.any((nodes < 0) | (nodes >= p)):
        raise DimensionMismatchError(f"view nodes out of range for p={p}")
    cross = report.cross_correlation(normalize)
    return float(np.sum(np.abs(cross[roi, nodes])))


def importance_ranking(view_nodes: Sequence[int], report: WhitenReport,
                       normalize: bool = True) -> np.ndarray:
    """Importance of every original node for one view (length p)."""
    return np.array([importance(i, view_nodes, report, normalize) for i in range(report.p)])
