"""
Domain types shared by every wishmix module.

Dataset and ModelState are immutable values: arrays are stored read-only and
labels as tuples, so they can be shared between worker threads/processes.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.model.errors import (
    DimensionMismatchError,
    DomainError,
    InvalidLabelsError,
    NotPositiveDefiniteError,
)

if TYPE_CHECKING:
    from src.inference.icm import IcmDiagnostics

SYMMETRY_TOL = 1e-10
UNIT_DIAGONAL_TOL = 1e-8

Labels = Tuple[int, ...]


def dense_labels(labels: Sequence[int]) -> np.ndarray:
    """
    Renumber labels to 1..K in order of first occurrence.

    Any hashable labels are accepted; the result is an int array.
    """
    mapping: Dict = {}
    out = np.empty(len(labels), dtype=int)
    for i, label in enumerate(labels):
        if label not in mapping:
            mapping[label] = len(mapping) + 1
        out[i] = mapping[label]
    return out


def check_dense(labels: Sequence[int]) -> int:
    """Return K if labels are dense 1..K (each used at least once), else raise."""
    if len(labels) == 0:
        raise InvalidLabelsError("label sequence is empty")
    arr = np.asarray(labels)
    k = int(arr.max())
    if arr.min() < 1 or not np.array_equal(np.unique(arr), np.arange(1, k + 1)):
        raise InvalidLabelsError(f"labels are not dense 1..K: {sorted(set(arr.tolist()))}")
    return k


@dataclass(frozen=True, eq=False)
class Dataset:
    """A collection of n symmetric positive-definite p x p matrices."""
    matrices: np.ndarray                  # (n, p, p)
    t_ori: int                            # datapoints of the original time series
    kind: str = "correlation"             # 'covariance' or 'correlation'
    node_names: Optional[Tuple[str, ...]] = None
    subject_ids: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        mats = np.array(self.matrices, dtype=float)
        if mats.ndim == 2:
            mats = mats[np.newaxis]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise DimensionMismatchError(f"expected n square matrices of equal size, got shape {mats.shape}")
        if mats.shape[0] < 1:
            raise DimensionMismatchError("a dataset needs at least one matrix")
        if self.kind not in ("covariance", "correlation"):
            raise DomainError(f"unknown matrix kind '{self.kind}'")
        if self.t_ori < 1:
            raise DomainError(f"t_ori must be >= 1, got {self.t_ori}")
        n, p = mats.shape[0], mats.shape[1]
        if self.node_names is not None and len(self.node_names) != p:
            raise DimensionMismatchError(f"{len(self.node_names)} node names for p={p}")
        subject_ids = self.subject_ids
        if subject_ids is None:
            subject_ids = tuple(f"s{i:04d}" for i in range(n))
        elif len(subject_ids) != n:
            raise DimensionMismatchError(f"{len(subject_ids)} subject ids for n={n}")

        for i in range(n):
            sid = subject_ids[i]
            if np.max(np.abs(mats[i] - mats[i].T)) > SYMMETRY_TOL:
                raise NotPositiveDefiniteError("matrix is not symmetric", subject_id=sid)
            try:
                np.linalg.cholesky(mats[i])
            except np.linalg.LinAlgError:
                raise NotPositiveDefiniteError("matrix is not positive definite", subject_id=sid)
            if self.kind == "correlation" and np.max(np.abs(np.diag(mats[i]) - 1.0)) > UNIT_DIAGONAL_TOL:
                raise NotPositiveDefiniteError("correlation matrix diagonal is not 1", subject_id=sid)

        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "subject_ids", tuple(subject_ids))
        if self.node_names is not None:
            object.__setattr__(self, "node_names", tuple(self.node_names))

    @property
    def n(self) -> int:
        return self.matrices.shape[0]

    @property
    def p(self) -> int:
        return self.matrices.shape[1]

    def subset_nodes(self, nodes: Sequence[int]) -> "Dataset":
        """Restrict every matrix to the given node indices (0-based)."""
        idx = np.asarray(nodes, dtype=int)
        if idx.size == 0:
            raise DimensionMismatchError("node subset is empty")
        names = None if self.node_names is None else tuple(self.node_names[i] for i in idx)
        return Dataset(
            matrices=self.matrices[:, idx][:, :, idx],
            t_ori=self.t_ori,
            kind=self.kind,
            node_names=names,
            subject_ids=self.subject_ids,
        )

    def permute_nodes(self, order: Sequence[int]) -> "Dataset":
        """Reorder nodes of every matrix: new node j is old node order[j]."""
        return self.subset_nodes(order)


@dataclass(frozen=True)
class ModelState:
    """
    Hard assignments of the multiple-view model.

    u[i] is the view (1..V) of node i; y[v-1] the node-cluster labels of the
    nodes of view v in increasing node order; z[v-1] the object-cluster labels
    of all n objects in view v; T the degree of freedom.
    """
    u: Labels
    y: Tuple[Labels, ...]
    z: Tuple[Labels, ...]
    T: int

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(int(x) for x in self.u))
        object.__setattr__(self, "y", tuple(tuple(int(x) for x in yv) for yv in self.y))
        object.__setattr__(self, "z", tuple(tuple(int(x) for x in zv) for zv in self.z))
        object.__setattr__(self, "T", int(self.T))

    @property
    def n_views(self) -> int:
        return len(self.z)

    @property
    def p(self) -> int:
        return len(self.u)

    @property
    def n(self) -> int:
        return len(self.z[0]) if self.z else 0

    def view_nodes(self, v: int) -> np.ndarray:
        """0-based node indices of view v (1-based), ascending."""
        return np.flatnonzero(np.asarray(self.u) == v)

    def node_clusters(self, v: int) -> List[np.ndarray]:
        """Node index arrays of each node cluster of view v, in label order."""
        nodes = self.view_nodes(v)
        yv = np.asarray(self.y[v - 1])
        return [nodes[yv == g] for g in range(1, int(yv.max()) + 1)]

    def n_clusters(self) -> List[int]:
        return [max(zv) for zv in self.z]

    def validate(self, n: Optional[int] = None, p: Optional[int] = None) -> None:
        """Check label density and that y/z agree with u (and with n, p if given)."""
        n_views = check_dense(self.u)
        if len(self.y) != n_views or len(self.z) != n_views:
            raise InvalidLabelsError(
                f"u has {n_views} views but y has {len(self.y)} and z has {len(self.z)} entries"
            )
        if p is not None and len(self.u) != p:
            raise DimensionMismatchError(f"u has length {len(self.u)}, dataset has p={p}")
        for v in range(1, n_views + 1):
            size = int(np.sum(np.asarray(self.u) == v))
            if len(self.y[v - 1]) != size:
                raise InvalidLabelsError(f"y_{v} has {len(self.y[v - 1])} entries for {size} nodes")
            check_dense(self.y[v - 1])
            check_dense(self.z[v - 1])
            if n is not None and len(self.z[v - 1]) != n:
                raise DimensionMismatchError(f"z_{v} has length {len(self.z[v - 1])}, dataset has n={n}")
        if self.T < 1:
            raise InvalidLabelsError(f"T must be a positive integer, got {self.T}")

    def canonical(self) -> "ModelState":
        """
        Renumber views by first node occurrence and every y_v / z_v by first
        occurrence, so equal partitions compare equal.
        """
        u = dense_labels(self.u)
        old_of_new = []
        for v in range(1, int(u.max()) + 1):
            old_of_new.append(self.u[int(np.flatnonzero(u == v)[0])])
        y = tuple(tuple(dense_labels(self.y[old - 1]).tolist()) for old in old_of_new)
        z = tuple(tuple(dense_labels(self.z[old - 1]).tolist()) for old in old_of_new)
        return ModelState(u=tuple(u.tolist()), y=y, z=z, T=self.T)


@dataclass(frozen=True, eq=False)
class BlockStats:
    """Sufficient statistics of one (view, object cluster, node cluster) block."""
    sum_matrix: np.ndarray   # (p', p') sum of the sub-matrices of the block's objects
    count: int

    def __post_init__(self):
        m = np.atleast_2d(np.array(self.sum_matrix, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"block sum must be square, got {m.shape}")
        if self.count < 0:
            raise ValueError(f"block count must be >= 0, got {self.count}")
        if np.max(np.abs(m - m.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(m), initial=0.0)):
            raise DimensionMismatchError("block sum matrix is not symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "sum_matrix", m)

    @property
    def dim(self) -> int:
        return self.sum_matrix.shape[0]

    @classmethod
    def from_objects(cls, data: Dataset, objects: Sequence[int], nodes: Sequence[int]) -> "BlockStats":
        """Accumulate the block of the given objects restricted to the given nodes."""
        idx = np.asarray(nodes, dtype=int)
        obj = np.asarray(objects, dtype=int)
        if obj.size == 0:
            return cls(sum_matrix=np.zeros((idx.size, idx.size)), count=0)
        sub = data.matrices[obj][:, idx][:, :, idx]
        return cls(sum_matrix=sub.sum(axis=0), count=int(obj.size))


@dataclass(frozen=True)
class FitResult:
    """Outcome of one ICM restart."""
    state: ModelState
    log_posterior: float
    seed: int
    iterations: int
    converged: bool
    diagnostics: Optional["IcmDiagnostics"] = field(default=None, compare=False)
    duration_ms: Optional[float] = field(default=None, compare=False)   # wall time; not written to model files

    def __post_init__(self):
        if not np.isfinite(self.log_posterior):
            raise ValueError(f"log posterior must be finite, got {self.log_posterior}")
