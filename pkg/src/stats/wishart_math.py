"""
Wishart log-densities and collapsed block marginals.

All quantities are computed in log space. Log-determinants come from Cholesky
factors and traces from triangular solves; a failed factorization raises
NotPositiveDefiniteError instead of adding jitter.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import linalg
from scipy.special import multigammaln

from src.model.errors import DimensionMismatchError, DomainError, NotPositiveDefiniteError
from src.model.types import BlockStats

LOG_2 = float(np.log(2.0))

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True, eq=False)
class WishartParams:
    """Degree of freedom T and p x p scale matrix of a Wishart distribution."""
    dof: float
    scale: np.ndarray

    def __post_init__(self):
        scale = np.atleast_2d(np.asarray(self.scale, dtype=float))
        if scale.shape[0] != scale.shape[1]:
            raise DimensionMismatchError(f"scale must be square, got {scale.shape}")
        if not self.dof > scale.shape[0] - 1:
            raise DomainError(f"dof {self.dof} must exceed p - 1 = {scale.shape[0] - 1}")
        object.__setattr__(self, "scale", scale)

    @property
    def p(self) -> int:
        return self.scale.shape[0]


def _cholesky(matrix: np.ndarray, what: str = "matrix") -> np.ndarray:
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"{what} is not positive definite")


def chol_logdet(matrix: np.ndarray, what: str = "matrix") -> float:
    """log|A| of a symmetric positive-definite matrix via its Cholesky factor."""
    chol = _cholesky(np.atleast_2d(matrix), what)
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def batched_logdet(matrices: np.ndarray, what: str = "matrix") -> np.ndarray:
    """log|A_k| for a stack (K, d, d) of symmetric positive-definite matrices."""
    try:
        chol = np.linalg.cholesky(matrices)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"{what} is not positive definite")
    return 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)


def log_multigamma(a: ArrayLike, p: int) -> ArrayLike:
    """
    log Gamma_p(a) = p(p-1)/4 log(pi) + sum_{j=1..p} log Gamma(a - (j-1)/2).

    Raises DomainError unless a > (p-1)/2.
    """
    if p < 1:
        raise DomainError(f"dimension must be >= 1, got {p}")
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr <= 0.5 * (p - 1)):
        raise DomainError(f"log_multigamma needs a > {(p - 1) / 2}, got {a}")
    result = multigammaln(a_arr, p)
    return float(result) if np.ndim(result) == 0 else result


def log_wishart_density(M: np.ndarray, params: WishartParams) -> float:
    """
    log W(M | T, Sigma).

    ((T-p-1)/2) log|M| - (pT/2) log 2 - log Gamma_p(T/2)
        - tr(Sigma^{-1} M)/2 - (T/2) log|Sigma|
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    p = params.p
    if M.shape != (p, p):
        raise DimensionMismatchError(f"M has shape {M.shape}, scale is {p}x{p}")
    T = params.dof
    chol_m = _cholesky(M, "M")
    chol_s = _cholesky(params.scale, "scale")
    logdet_m = 2.0 * np.sum(np.log(np.diag(chol_m)))
    logdet_s = 2.0 * np.sum(np.log(np.diag(chol_s)))
    # tr(Sigma^{-1} M) = ||L_S^{-1} L_M||_F^2
    half = linalg.solve_triangular(chol_s, chol_m, lower=True)
    trace = float(np.sum(half * half))
    return float(
        0.5 * (T - p - 1) * logdet_m
        - 0.5 * p * T * LOG_2
        - log_multigamma(0.5 * T, p)
        - 0.5 * trace
        - 0.5 * T * logdet_s
    )


def log_wishart_constant(logdet_m: ArrayLike, T: float, p: int) -> ArrayLike:
    """log C_{M,T}: the part of the Wishart log-density that does not involve Sigma."""
    return 0.5 * (T - p - 1) * np.asarray(logdet_m) - 0.5 * p * T * LOG_2 - log_multigamma(0.5 * T, p)


def prior_dof(dim: int) -> float:
    """Inverse-Wishart prior degree of freedom nu = p' + 3 of a p'-dimensional block."""
    return dim + 3.0


def prior_scale_factor(dim: int, T: float) -> float:
    """S = (nu - p' - 1) I / T; nu - p' - 1 is always 2."""
    return (prior_dof(dim) - dim - 1.0) / T


def log_block_marginals(sums: np.ndarray, counts: np.ndarray, T: float,
                        nu: float, s_factor: float) -> np.ndarray:
    """
    Vectorized collapsed marginal of K blocks sharing one dimension p'.

    Args:
        sums: (K, p', p') block sum matrices
        counts: (K,) object counts
        T: Wishart degree of freedom
        nu: inverse-Wishart prior degree of freedom
        s_factor: prior scale S = s_factor * I

    Returns:
        (K,) log marginals; blocks with count 0 give exactly 0.
    """
    sums = np.asarray(sums, dtype=float)
    counts = np.asarray(counts, dtype=float)
    dim = sums.shape[-1]
    if not nu > dim - 1:
        raise DomainError(f"prior dof {nu} must exceed p' - 1 = {dim - 1}")
    out = np.zeros(counts.shape[0])
    live = counts > 0
    if not np.any(live):
        return out
    c = counts[live]
    posterior_dof = nu + c * T
    shifted = sums[live] + s_factor * np.eye(dim)
    logdet_post = batched_logdet(shifted, "S + M_sum")
    out[live] = (
        0.5 * nu * dim * np.log(s_factor)
        - 0.5 * posterior_dof * logdet_post
        + 0.5 * c * T * dim * LOG_2
        + log_multigamma(0.5 * posterior_dof, dim)
        - log_multigamma(0.5 * nu, dim)
    )
    return out


def log_block_marginal(stats: BlockStats, T: float, nu: float, S: np.ndarray) -> float:
    """
    log of the integral over Sigma of prod_i g(M_i, T, Sigma) InvWishart(Sigma | S, nu).

    (nu/2) log|S| - ((nu+cT)/2) log|S + M_sum| + (cTp'/2) log 2
        + log Gamma_p'((nu+cT)/2) - log Gamma_p'(nu/2)
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    dim = stats.dim
    if S.shape != (dim, dim):
        raise DimensionMismatchError(f"prior scale is {S.shape}, block is {dim}x{dim}")
    if not nu > dim - 1:
        raise DomainError(f"prior dof {nu} must exceed p' - 1 = {dim - 1}")
    c = stats.count
    if c == 0:
        return 0.0
    posterior_dof = nu + c * T
    return float(
        0.5 * nu * chol_logdet(S, "S")
        - 0.5 * posterior_dof * chol_logdet(S + stats.sum_matrix, "S + M_sum")
        + 0.5 * c * T * dim * LOG_2
        + log_multigamma(0.5 * posterior_dof, dim)
        - log_multigamma(0.5 * nu, dim)
    )


def wishart_similarity(B: np.ndarray, A: np.ndarray, T: float) -> float:
    """
    log W(B | T, A): how well A explains B as a Wishart scale.

    Not symmetric in (A, B); B is the matching matrix, A the candidate.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape:
        raise DimensionMismatchError(f"A is {A.shape}, B is {B.shape}")
    return log_wishart_density(B, WishartParams(dof=T, scale=A))
