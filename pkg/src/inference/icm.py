"""
Iterated conditional modes (ICM) for the multiple-view Wishart mixture.

One sweep updates, in order, the view of every node, the node cluster of every
node inside its view, the object cluster of every object in every view and
finally the degree of freedom T. Each elementary update takes the argmax of the
log posterior over the existing labels plus one fresh label; ties keep the
current label, so the log posterior never decreases.

Candidate moves are scored incrementally: per view the optimizer keeps the
full p x p sum of every object cluster, and per node cluster the vector of
block marginals over object clusters. Only the blocks touched by a move are
re-evaluated.
"""

import logging
import math
import time
from bisect import insort
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config.config import Hyperparams, ProgressHook
from src.model.errors import ConsistencyError, DomainError
from src.model.posterior import log_posterior, wishart_constants
from src.model.types import Dataset, FitResult, ModelState
from src.stats.priors import DofGrid, crp_log_prob_sizes, crp_sample, dof_grid, dof_upper_bound
from src.stats.wishart_math import log_block_marginals, prior_dof, prior_scale_factor

logger = logging.getLogger(__name__)

MOVE_FAMILIES = ("view", "node_cluster", "object_cluster", "dof")

MONOTONICITY_TOL = 1e-9
CONSISTENCY_TOL = 1e-7


@dataclass
class IcmDiagnostics:
    """Per-sweep log posterior trace (initial value first) and accepted move counts."""
    log_posterior_trace: List[float] = field(default_factory=list)
    moves_accepted: Dict[str, int] = field(default_factory=lambda: {f: 0 for f in MOVE_FAMILIES})

    def to_dict(self) -> dict:
        return {
            "log_posterior_trace": list(self.log_posterior_trace),
            "moves_accepted": dict(self.moves_accepted),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "IcmDiagnostics":
        return cls(
            log_posterior_trace=[float(x) for x in payload.get("log_posterior_trace", [])],
            moves_accepted={f: int(payload.get("moves_accepted", {}).get(f, 0)) for f in MOVE_FAMILIES},
        )


def _crp(sizes, alpha: float) -> float:
    return crp_log_prob_sizes([s for s in sizes if s > 0], alpha)


@dataclass
class _ViewBlocks:
    """Mutable working copy of one view (0-based labels)."""
    clusters: List[List[int]]   # node clusters, each sorted ascending
    z: np.ndarray               # (n,) object-cluster index
    sums: np.ndarray            # (K, p, p) full-matrix sum per object cluster
    counts: np.ndarray          # (K,)
    scores: List[np.ndarray]    # per node cluster, (K,) block marginals

    @property
    def node_count(self) -> int:
        return sum(len(c) for c in self.clusters)

    def cluster_sizes(self) -> List[int]:
        return [len(c) for c in self.clusters]

    def cluster_of(self, node: int) -> int:
        for g, members in enumerate(self.clusters):
            if node in members:
                return g
        raise KeyError(node)

    def score(self) -> float:
        return float(sum(s.sum() for s in self.scores))


class IcmOptimizer:
    """
    Coordinate-ascent optimizer holding one restart's working state.

    The optimizer owns its RNG stream; visiting order inside every pass is a
    fresh uniform permutation drawn from it.
    """

    def __init__(self, data: Dataset, hyper: Hyperparams, state: ModelState,
                 rng: np.random.Generator, grid: Optional[DofGrid] = None):
        state.validate(n=data.n, p=data.p)
        self.data = data
        self.hyper = hyper
        self.rng = rng
        self.grid = grid if grid is not None else dof_grid(data.p, data.t_ori, hyper.delta)
        if state.T not in self.grid:
            raise DomainError(f"T={state.T} is not on the degree-of-freedom grid {self.grid.values}")
        self.T = state.T
        self.matrices = data.matrices
        self.diagnostics = IcmDiagnostics()

        self.u = np.asarray(state.u, dtype=int) - 1
        self.views: List[_ViewBlocks] = []
        for v in range(state.n_views):
            nodes = np.flatnonzero(self.u == v)
            yv = np.asarray(state.y[v], dtype=int)
            clusters = [sorted(int(x) for x in nodes[yv == g]) for g in range(1, int(yv.max()) + 1)]
            z = np.asarray(state.z[v], dtype=int) - 1
            self.views.append(self._new_view(clusters, z))

    # ── Block scoring ──────────────────────────────────────────────

    def _marginals(self, sums: np.ndarray, counts: np.ndarray, nodes: List[int],
                   T: Optional[float] = None) -> np.ndarray:
        T = self.T if T is None else T
        idx = np.asarray(nodes, dtype=int)
        dim = idx.size
        block = sums[:, idx][:, :, idx]
        return log_block_marginals(block, counts, T, prior_dof(dim), prior_scale_factor(dim, T))

    def _view_sums(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        k = int(z.max()) + 1
        counts = np.bincount(z, minlength=k)
        sums = np.zeros((k, self.data.p, self.data.p))
        np.add.at(sums, z, self.matrices)
        return sums, counts

    def _new_view(self, clusters: List[List[int]], z: np.ndarray) -> _ViewBlocks:
        sums, counts = self._view_sums(z)
        scores = [self._marginals(sums, counts, c) for c in clusters]
        return _ViewBlocks(clusters=clusters, z=z.copy(), sums=sums, counts=counts, scores=scores)

    def _rescore(self, view: _ViewBlocks) -> None:
        view.scores = [self._marginals(view.sums, view.counts, c) for c in view.clusters]

    # ── State access ───────────────────────────────────────────────

    @property
    def state(self) -> ModelState:
        """Current state as an immutable ModelState (1-based dense labels)."""
        y = []
        for v, view in enumerate(self.views):
            nodes = np.flatnonzero(self.u == v)
            label = {node: g + 1 for g, members in enumerate(view.clusters) for node in members}
            y.append(tuple(label[int(i)] for i in nodes))
        return ModelState(
            u=tuple((self.u + 1).tolist()),
            y=tuple(y),
            z=tuple(tuple((view.z + 1).tolist()) for view in self.views),
            T=self.T,
        )

    def log_posterior(self) -> float:
        """log L from the cached block scores."""
        hyper = self.hyper
        total = wishart_constants(self.data, self.T) + self.grid.log_prob
        total += _crp(np.bincount(self.u), hyper.view_alpha)
        for view in self.views:
            total += view.score()
            total += _crp(view.cluster_sizes(), hyper.node_alpha)
            total += _crp(view.counts, hyper.object_alpha)
        return float(total)

    # ── Debug checks ───────────────────────────────────────────────

    def _full(self) -> float:
        return log_posterior(self.data, self.state, self.hyper)

    def _check_move(self, family: str, before: float, delta: float) -> None:
        after = self._full()
        if after - before < -MONOTONICITY_TOL:
            raise ConsistencyError(
                f"{family} move decreased the log posterior by {before - after:.3e}"
            )
        if not math.isclose(after, before + delta, rel_tol=1e-10, abs_tol=CONSISTENCY_TOL):
            raise ConsistencyError(
                f"{family} move: incremental delta {delta:.10g} disagrees with full "
                f"re-scoring {after - before:.10g}"
            )

    def _accept(self, family: str) -> None:
        self.diagnostics.moves_accepted[family] += 1

    # ── (a) view moves ─────────────────────────────────────────────

    def _remove_node(self, v: int, node: int) -> None:
        view = self.views[v]
        g = view.cluster_of(node)
        view.clusters[g].remove(node)
        if not view.clusters[g]:
            del view.clusters[g]
            del view.scores[g]
        else:
            view.scores[g] = self._marginals(view.sums, view.counts, view.clusters[g])
        if not view.clusters:
            del self.views[v]
            self.u[self.u > v] -= 1

    def _add_node(self, v: int, node: int, g: Optional[int]) -> None:
        view = self.views[v]
        if g is None:
            view.clusters.append([node])
            view.scores.append(self._marginals(view.sums, view.counts, [node]))
        else:
            insort(view.clusters[g], node)
            view.scores[g] = self._marginals(view.sums, view.counts, view.clusters[g])

    def _placement_gains(self, view: _ViewBlocks, node: int) -> List[Tuple[float, Optional[int]]]:
        """Score gains of adding a node to each allowed node cluster of a receiving view."""
        alpha = self.hyper.node_alpha
        sizes = view.cluster_sizes()
        base = _crp(sizes, alpha)
        gains = []
        if self.hyper.view_move_placement == "best":
            for h, members in enumerate(view.clusters):
                grown = list(sizes)
                grown[h] += 1
                joined = self._marginals(view.sums, view.counts, members + [node]).sum()
                gains.append((_crp(grown, alpha) - base + joined - view.scores[h].sum(), h))
        fresh = self._marginals(view.sums, view.counts, [node]).sum()
        gains.append((_crp(sizes + [1], alpha) - base + fresh, None))
        return gains

    def _move_view(self, node: int) -> None:
        hyper = self.hyper
        a = int(self.u[node])
        source = self.views[a]
        view_sizes = np.bincount(self.u, minlength=len(self.views))
        crp_u = _crp(view_sizes, hyper.view_alpha)
        alone = source.node_count == 1

        g = source.cluster_of(node)
        sizes = source.cluster_sizes()
        if alone:
            removal = -(source.score() + _crp(sizes, hyper.node_alpha)
                        + _crp(source.counts, hyper.object_alpha))
        else:
            rest = [x for x in source.clusters[g] if x != node]
            rest_score = self._marginals(source.sums, source.counts, rest).sum() if rest else 0.0
            shrunk = list(sizes)
            shrunk[g] -= 1
            removal = (_crp(shrunk, hyper.node_alpha) - _crp(sizes, hyper.node_alpha)
                       + rest_score - source.scores[g].sum())

        best_delta, best_move = 0.0, None
        for b, target in enumerate(self.views):
            if b == a:
                continue
            moved = view_sizes.copy()
            moved[a] -= 1
            moved[b] += 1
            du = _crp(moved, hyper.view_alpha) - crp_u
            for gain, h in self._placement_gains(target, node):
                delta = du + removal + gain
                if delta > best_delta:
                    best_delta, best_move = delta, (b, h)

        if not alone:
            # fresh view inheriting the source view's object clustering
            moved = np.append(view_sizes, 1)
            moved[a] -= 1
            du = _crp(moved, hyper.view_alpha) - crp_u
            fresh = (self._marginals(source.sums, source.counts, [node]).sum()
                     + _crp(source.counts, hyper.object_alpha))
            delta = du + removal + fresh
            if delta > best_delta:
                best_delta, best_move = delta, (len(self.views), None)

        if best_move is None:
            return
        before = self._full() if hyper.debug else 0.0
        b, h = best_move
        if b == len(self.views):
            self.views.append(self._new_view([[node]], source.z))
        else:
            self._add_node(b, node, h)
        self.u[node] = b
        self._remove_node(a, node)
        self._accept("view")
        if hyper.debug:
            self._check_move("view", before, best_delta)

    # ── (b) node-cluster moves ─────────────────────────────────────

    def _move_node_cluster(self, node: int) -> None:
        hyper = self.hyper
        view = self.views[int(self.u[node])]
        sizes = view.cluster_sizes()
        if len(sizes) == 1 and sizes[0] == 1:
            return
        alpha = hyper.node_alpha
        base_crp = _crp(sizes, alpha)
        g = view.cluster_of(node)
        rest = [x for x in view.clusters[g] if x != node]
        rest_score = self._marginals(view.sums, view.counts, rest).sum() if rest else 0.0
        removal = rest_score - view.scores[g].sum()

        best_delta, best_target = 0.0, -1
        for h, members in enumerate(view.clusters):
            if h == g:
                continue
            moved = list(sizes)
            moved[g] -= 1
            moved[h] += 1
            joined = self._marginals(view.sums, view.counts, members + [node]).sum()
            delta = _crp(moved, alpha) - base_crp + removal + joined - view.scores[h].sum()
            if delta > best_delta:
                best_delta, best_target = delta, h
        if sizes[g] > 1:
            moved = list(sizes)
            moved[g] -= 1
            fresh = self._marginals(view.sums, view.counts, [node]).sum()
            delta = _crp(moved + [1], alpha) - base_crp + removal + fresh
            if delta > best_delta:
                best_delta, best_target = delta, None

        if best_target == -1:
            return
        before = self._full() if hyper.debug else 0.0
        v = int(self.u[node])
        self._add_node(v, node, best_target)
        view.clusters[g].remove(node)
        if view.clusters[g]:
            view.scores[g] = self._marginals(view.sums, view.counts, view.clusters[g])
        else:
            del view.clusters[g]
            del view.scores[g]
        self._accept("node_cluster")
        if hyper.debug:
            self._check_move("node_cluster", before, best_delta)

    # ── (c) object-cluster moves ───────────────────────────────────

    def _move_object(self, view: _ViewBlocks, obj: int) -> None:
        hyper = self.hyper
        alpha = hyper.object_alpha
        k = int(view.z[obj])
        counts = view.counts
        n_clusters = counts.size
        matrix = self.matrices[obj]

        like = np.zeros(n_clusters)
        fresh_like = 0.0
        for members, scores in zip(view.clusters, view.scores):
            idx = np.asarray(members, dtype=int)
            sub = matrix[np.ix_(idx, idx)]
            dim = idx.size
            nu, s = prior_dof(dim), prior_scale_factor(dim, self.T)
            block = view.sums[:, idx][:, :, idx]
            removed = log_block_marginals(
                (block[k] - sub)[np.newaxis], np.array([counts[k] - 1]), self.T, nu, s
            )[0]
            joined = log_block_marginals(block + sub, counts + 1, self.T, nu, s)
            alone = log_block_marginals(sub[np.newaxis], np.array([1]), self.T, nu, s)[0]
            leave = removed - scores[k]
            like += leave + joined - scores
            fresh_like += leave + alone

        base_crp = _crp(counts, alpha)
        best_delta, best_target = 0.0, -1
        for l in range(n_clusters):
            if l == k:
                continue
            moved = counts.copy()
            moved[k] -= 1
            moved[l] += 1
            delta = _crp(moved, alpha) - base_crp + like[l]
            if delta > best_delta:
                best_delta, best_target = delta, l
        if counts[k] > 1:
            moved = np.append(counts, 1)
            moved[k] -= 1
            delta = _crp(moved, alpha) - base_crp + fresh_like
            if delta > best_delta:
                best_delta, best_target = delta, n_clusters

        if best_target == -1:
            return
        before = self._full() if hyper.debug else 0.0
        view.z[obj] = best_target
        if counts[k] == 1:
            view.z[view.z > k] -= 1
        view.sums, view.counts = self._view_sums(view.z)
        self._rescore(view)
        self._accept("object_cluster")
        if hyper.debug:
            self._check_move("object_cluster", before, best_delta)

    # ── (d) degree of freedom ──────────────────────────────────────

    def _dof_value(self, T: int) -> float:
        total = wishart_constants(self.data, T)
        for view in self.views:
            for members in view.clusters:
                total += self._marginals(view.sums, view.counts, members, T=T).sum()
        return float(total)

    def _update_dof(self) -> None:
        current = self._dof_value(self.T)
        best_value, best_T = current, self.T
        for T in self.grid.values:
            if T == self.T:
                continue
            value = self._dof_value(T)
            if value > best_value:
                best_value, best_T = value, T
        if best_T == self.T:
            return
        before = self._full() if self.hyper.debug else 0.0
        self.T = best_T
        for view in self.views:
            self._rescore(view)
        self._accept("dof")
        if self.hyper.debug:
            self._check_move("dof", before, best_value - current)

    # ── Sweep ──────────────────────────────────────────────────────

    def sweep(self) -> float:
        """One full u, y, z, T pass; returns the new log posterior."""
        p, n = self.data.p, self.data.n
        if not self.hyper.fix_single_view:
            for node in self.rng.permutation(p):
                self._move_view(int(node))
        for node in self.rng.permutation(p):
            self._move_node_cluster(int(node))
        for obj in self.rng.permutation(n):
            for view in self.views:
                self._move_object(view, int(obj))
        self._update_dof()
        return self.log_posterior()


def init_state(data: Dataset, hyper: Hyperparams, rng: np.random.Generator) -> ModelState:
    """
    Random initial state drawn from the CRP priors.

    u and every z_v are seated sequentially with their CRP concentrations, each
    view starts with a single node cluster and T is the largest grid value not
    above max(2p, t_ori).
    """
    grid = dof_grid(data.p, data.t_ori, hyper.delta)
    if hyper.fix_single_view:
        u = np.ones(data.p, dtype=int)
    else:
        u = crp_sample(data.p, hyper.view_alpha, rng)
    n_views = int(u.max())
    y = [tuple([1] * int(np.sum(u == v))) for v in range(1, n_views + 1)]
    z = [tuple(crp_sample(data.n, hyper.object_alpha, rng).tolist()) for _ in range(n_views)]
    T = grid.upper_bound_value(dof_upper_bound(data.p, data.t_ori))
    return ModelState(u=tuple(u.tolist()), y=tuple(y), z=tuple(z), T=T)


def icm_sweep(data: Dataset, state: ModelState, hyper: Hyperparams,
              rng: Optional[np.random.Generator] = None) -> Tuple[ModelState, float]:
    """Run a single sweep from a given state; returns the new state and its log posterior."""
    rng = rng if rng is not None else np.random.default_rng(hyper.seed)
    optimizer = IcmOptimizer(data, hyper, state, rng)
    value = optimizer.sweep()
    return optimizer.state, value


def icm_fit(data: Dataset, hyper: Hyperparams, seed: int,
            progress: Optional[ProgressHook] = None, restart_index: int = 0) -> FitResult:
    """
    One ICM restart from a CRP-random initial state.

    Sweeps until the improvement stays below epsilon for max_stability
    consecutive sweeps or max_iter sweeps have run.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    state = init_state(data, hyper, rng)
    optimizer = IcmOptimizer(data, hyper, state, rng)

    previous = optimizer.log_posterior()
    optimizer.diagnostics.log_posterior_trace.append(previous)
    iterations, stable = 0, 0
    while iterations < hyper.max_iter and stable < hyper.max_stability:
        current = optimizer.sweep()
        iterations += 1
        stable = stable + 1 if current - previous < hyper.epsilon else 0
        previous = current
        optimizer.diagnostics.log_posterior_trace.append(current)
        if progress is not None:
            progress(restart_index, iterations, current)

    logger.debug(
        "restart %d (seed %d): logL=%.6f after %d sweeps, %d views",
        restart_index, seed, previous, iterations, len(optimizer.views),
    )
    return FitResult(
        state=optimizer.state,
        log_posterior=previous,
        seed=int(seed),
        iterations=iterations,
        converged=stable >= hyper.max_stability,
        diagnostics=optimizer.diagnostics,
        duration_ms=(time.perf_counter() - start) * 1000,
    )
