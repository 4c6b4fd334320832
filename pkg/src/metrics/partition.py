"""
Partition agreement: adjusted Rand index, Dice coefficient, recovery scores
against planted ground truth, and cross-model view comparison tables.
"""

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import adjusted_rand_score

from src.model.errors import DimensionMismatchError
from src.model.types import ModelState
from src.metrics.permutation import fdr_adjust, permutation_table

if TYPE_CHECKING:
    from src.synth.synthgen import GroundTruth

logger = logging.getLogger(__name__)

SIGNIFICANCE_LEVEL = 0.05


def adjusted_rand_index(a: Sequence[int], b: Sequence[int]) -> float:
    """
    Hubert-Arabie adjusted Rand index of two labelings of the same elements.

    When the expected index equals its maximum (one side a single cluster)
    the result is 0, except for identical partitions, which score 1.
    """
    if len(a) != len(b):
        raise DimensionMismatchError(f"labelings have lengths {len(a)} and {len(b)}")
    if len(a) == 0:
        raise DimensionMismatchError("labelings are empty")
    return float(adjusted_rand_score(np.asarray(a), np.asarray(b)))


def dice(set_a: Iterable, set_b: Iterable) -> float:
    """2|A & B| / (|A| + |B|); two empty sets score 1."""
    a, b = set(set_a), set(set_b)
    if not a and not b:
        return 1.0
    return 2.0 * len(a & b) / (len(a) + len(b))


def view_node_sets(u: Sequence[int]) -> List[frozenset]:
    """Node sets of each view label 1..V."""
    u = np.asarray(u)
    return [frozenset(np.flatnonzero(u == v).tolist()) for v in range(1, int(u.max()) + 1)]


def dice_table(u_a: Sequence[int], u_b: Sequence[int]) -> np.ndarray:
    """Dice coefficient between every view of a (rows) and every view of b (columns)."""
    sets_a, sets_b = view_node_sets(u_a), view_node_sets(u_b)
    return np.array([[dice(x, y) for y in sets_b] for x in sets_a])


def greedy_dice_matching(table: np.ndarray) -> List[Tuple[int, int, float]]:
    """
    One-to-one matching of rows to columns by descending Dice.

    Ties go to the smaller (row, column). Returns (row, column, dice) triples;
    rows left without a partner are not listed.
    """
    rows, cols = table.shape
    order = sorted(((-table[i, j], i, j) for i in range(rows) for j in range(cols)))
    used_rows, used_cols, pairs = set(), set(), []
    for neg, i, j in order:
        if i in used_rows or j in used_cols:
            continue
        pairs.append((i, j, -neg))
        used_rows.add(i)
        used_cols.add(j)
    return sorted(pairs)


def view_stability(chosen: ModelState, probes: Sequence[ModelState]) -> List[float]:
    """
    Mean Dice of each view of the chosen model with its matched view in every probe.

    Views are matched one-to-one, greedily by descending Dice; an unmatched
    view contributes 0 for that probe.
    """
    n_views = chosen.n_views
    if not probes:
        return [1.0] * n_views
    totals = np.zeros(n_views)
    for probe in probes:
        table = dice_table(chosen.u, probe.u)
        for i, _, value in greedy_dice_matching(table):
            totals[i] += value
    return (totals / len(probes)).tolist()


@dataclass(frozen=True)
class RecoveryReport:
    """Agreement of a fitted model with the planted structure."""
    view_ari: float
    cluster_ari_per_true_view: Tuple[float, ...]
    grand_mean_cluster_ari: float

    def to_dict(self) -> dict:
        return {
            "view_ari": self.view_ari,
            "cluster_ari_per_true_view": list(self.cluster_ari_per_true_view),
            "grand_mean_cluster_ari": self.grand_mean_cluster_ari,
        }


def recovery_score(truth: "GroundTruth", fit: ModelState) -> RecoveryReport:
    """
    view_ari compares view memberships; each true view's clustering is scored
    by its best ARI over the fitted views, and those scores are averaged.
    """
    if len(truth.view_labels) != fit.p:
        raise DimensionMismatchError(f"truth has p={len(truth.view_labels)}, fit has p={fit.p}")
    if truth.n != fit.n:
        raise DimensionMismatchError(f"truth has n={truth.n}, fit has n={fit.n}")
    view_ari = adjusted_rand_index(truth.view_labels, fit.u)
    per_view = tuple(
        max(adjusted_rand_index(labels, zv) for zv in fit.z)
        for labels in truth.cluster_labels
    )
    return RecoveryReport(
        view_ari=view_ari,
        cluster_ari_per_true_view=per_view,
        grand_mean_cluster_ari=float(np.mean(per_view)),
    )


def ari_table(z_a: Sequence[Sequence[int]], z_b: Sequence[Sequence[int]]) -> np.ndarray:
    """ARI between the object clustering of every view of a and of b."""
    return np.array([[adjusted_rand_index(x, y) for y in z_b] for x in z_a])


@dataclass
class ModelComparison:
    """View-by-view agreement of two fitted models, with permutation statistics."""
    dice: np.ndarray
    dice_pvalues: np.ndarray
    dice_adjusted: np.ndarray
    dice_quantile: np.ndarray
    ari: np.ndarray
    ari_pvalues: np.ndarray
    ari_adjusted: np.ndarray
    ari_quantile: np.ndarray
    significant_pairs: List[Tuple[int, int]] = field(default_factory=list)
    matching_accuracy: Dict[Tuple[int, int], Tuple[float, float]] = field(default_factory=dict)

    def rows(self) -> List[dict]:
        """Long-format rows (one per view pair, 1-based view labels) for CSV tables."""
        out = []
        va, vb = self.dice.shape
        for i in range(va):
            for j in range(vb):
                acc = self.matching_accuracy.get((i, j))
                out.append({
                    "view_a": i + 1,
                    "view_b": j + 1,
                    "dice": self.dice[i, j],
                    "dice_p": self.dice_pvalues[i, j],
                    "dice_p_fdr": self.dice_adjusted[i, j],
                    "dice_q95": self.dice_quantile[i, j],
                    "ari": self.ari[i, j],
                    "ari_p": self.ari_pvalues[i, j],
                    "ari_p_fdr": self.ari_adjusted[i, j],
                    "ari_q95": self.ari_quantile[i, j],
                    "significant": (i, j) in self.significant_pairs,
                    "match_b_to_a": None if acc is None else acc[0],
                    "match_a_to_b": None if acc is None else acc[1],
                })
        return out


def compare_models(a: ModelState, b: ModelState, n_perm: int = 1000,
                   rng: Optional[np.random.Generator] = None,
                   level: float = SIGNIFICANCE_LEVEL) -> ModelComparison:
    """
    Dice of view node sets and ARI of view object clusterings between two models.

    Dice p-values permute node labels of b's view membership; ARI p-values
    permute the object order of b's clusterings. Both tables are FDR-adjusted
    separately. A pair is significant when both adjusted p-values are below
    the level.
    """
    if a.p != b.p:
        raise DimensionMismatchError(f"models have p={a.p} and p={b.p}")
    if a.n != b.n:
        raise DimensionMismatchError(f"models have n={a.n} and n={b.n}")
    rng = rng if rng is not None else np.random.default_rng(0)

    dice_obs = dice_table(a.u, b.u)
    dice_q, dice_p = permutation_table(
        dice_obs, lambda perm: dice_table(a.u, np.asarray(b.u)[perm]), a.p, n_perm, rng=rng
    )
    ari_obs = ari_table(a.z, b.z)
    z_b = [np.asarray(zv) for zv in b.z]
    ari_q, ari_p = permutation_table(
        ari_obs, lambda perm: ari_table(a.z, [zv[perm] for zv in z_b]), a.n, n_perm, rng=rng
    )
    dice_adj = fdr_adjust(dice_p.ravel()).reshape(dice_p.shape)
    ari_adj = fdr_adjust(ari_p.ravel()).reshape(ari_p.shape)
    significant = [
        (int(i), int(j)) for i, j in zip(*np.nonzero((dice_adj < level) & (ari_adj < level)))
    ]
    return ModelComparison(
        dice=dice_obs, dice_pvalues=dice_p, dice_adjusted=dice_adj, dice_quantile=dice_q,
        ari=ari_obs, ari_pvalues=ari_p, ari_adjusted=ari_adj, ari_quantile=ari_q,
        significant_pairs=significant,
    )


def view_stability_limits(chosen: ModelState, probes: Sequence[ModelState], n_perm: int = 1000,
                          q: float = 0.95, rng: Optional[np.random.Generator] = None
                          ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Permutation null of view_stability: node labels of the chosen model are
    shuffled (view sizes kept). Returns per-view q-quantiles and p-values.
    """
    observed = np.asarray(view_stability(chosen, probes))
    if not probes:
        return np.ones_like(observed), np.ones_like(observed)
    u = np.asarray(chosen.u)

    def shuffled(perm: np.ndarray) -> np.ndarray:
        state = ModelState(u=u[perm], y=chosen.y, z=chosen.z, T=chosen.T)
        return np.asarray(view_stability(state, probes))

    return permutation_table(observed, shuffled, u.size, n_perm, q=q, rng=rng)
