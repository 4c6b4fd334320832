"""
Priors over partitions (Chinese restaurant process) and over the Wishart
degree of freedom (uniform categorical on an arithmetic grid).
"""

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from src.model.errors import DomainError, EmptyDofGridError
from src.model.types import check_dense

MAX_ENUMERATION_SIZE = 8


def crp_log_prob_sizes(sizes: Sequence[int], alpha: float) -> float:
    """
    CRP log-probability of any partition with the given block sizes.

    log[ alpha^K prod_k (N_k - 1)! / prod_{j=1..m} (j - 1 + alpha) ]
    """
    sizes = np.asarray(sizes, dtype=float)
    m = sizes.sum()
    k = sizes.size
    # prod_{j=1..m}(j-1+alpha) = Gamma(m + alpha) / Gamma(alpha)
    return float(
        k * np.log(alpha)
        + np.sum(gammaln(sizes))
        - (gammaln(m + alpha) - gammaln(alpha))
    )


def crp_log_prob(labels: Sequence[int], alpha: float) -> float:
    """CRP log-probability of a dense labelling; depends only on block sizes."""
    if not alpha > 0:
        raise DomainError(f"CRP concentration must be > 0, got {alpha}")
    k = check_dense(labels)
    sizes = np.bincount(np.asarray(labels, dtype=int), minlength=k + 1)[1:]
    return crp_log_prob_sizes(sizes, alpha)


def set_partitions(m: int) -> Iterator[List[int]]:
    """Yield every set partition of m elements as restricted-growth label lists (1-based)."""
    if m == 0:
        return
    labels = [1] * m

    def extend(i: int, k: int) -> Iterator[List[int]]:
        if i == m:
            yield list(labels)
            return
        for label in range(1, k + 2):
            labels[i] = label
            yield from extend(i + 1, max(k, label))

    labels[0] = 1
    yield from extend(1, 1)


def crp_enumerate_check(m: int, alpha: float) -> float:
    """Total CRP probability over all set partitions of m <= 8 elements (should be 1)."""
    if m < 1 or m > MAX_ENUMERATION_SIZE:
        raise DomainError(f"enumeration supports 1 <= m <= {MAX_ENUMERATION_SIZE}, got {m}")
    log_probs = [crp_log_prob(labels, alpha) for labels in set_partitions(m)]
    return float(np.exp(logsumexp(log_probs)))


@dataclass(frozen=True)
class DofGrid:
    """Uniform categorical prior over T_1 < ... < T_q."""
    values: Tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.values)

    @property
    def prob(self) -> float:
        return 1.0 / self.q

    @property
    def log_prob(self) -> float:
        return -float(np.log(self.q))

    def upper_bound_value(self, bound: int) -> int:
        """Largest grid value <= bound (the first value if all exceed it)."""
        below = [t for t in self.values if t <= bound]
        return below[-1] if below else self.values[0]

    def __contains__(self, T: object) -> bool:
        return T in self.values


def dof_upper_bound(p: int, t_ori: int) -> int:
    """T* = max(2p, t_ori)."""
    return max(2 * p, t_ori)


def dof_grid(p: int, t_ori: int, delta: int = 3) -> DofGrid:
    """
    T_k = p + 5 + (k-1) delta for every k with T_k <= max(2p, t_ori).

    Raises EmptyDofGridError when p + 5 already exceeds the bound.
    """
    if p < 1 or t_ori < 1:
        raise DomainError(f"p and t_ori must be >= 1, got p={p}, t_ori={t_ori}")
    if delta < 1:
        raise DomainError(f"grid step must be >= 1, got {delta}")
    upper = dof_upper_bound(p, t_ori)
    values = tuple(range(p + 5, upper + 1, delta))
    if not values:
        raise EmptyDofGridError(
            f"degree-of-freedom grid is empty: p + 5 = {p + 5} exceeds max(2p, t_ori) = {upper}; "
            "provide a longer original time series (t_ori) or fewer nodes"
        )
    return DofGrid(values=values)


def crp_sample(m: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """
    Draw dense labels (1..K) for m elements by sequential CRP seating.

    Element j joins an existing block with probability N_k / (j + alpha) and
    opens a new one with probability alpha / (j + alpha).
    """
    if not alpha > 0:
        raise DomainError(f"CRP concentration must be > 0, got {alpha}")
    labels = np.zeros(m, dtype=int)
    counts: List[float] = []
    for j in range(m):
        weights = np.array(counts + [alpha])
        choice = int(rng.choice(weights.size, p=weights / weights.sum()))
        if choice == len(counts):
            counts.append(1.0)
        else:
            counts[choice] += 1.0
        labels[j] = choice + 1
    return labels
