"""
Synthetic benchmark with planted views and object clusters.

Every (view, cluster) pair gets a random correlation block; an object's true
covariance is the block-diagonal assembly of its clusters' blocks, mixed with
a noise matrix N (unit diagonal, constant off-diagonal `background`):

    Sigma* = (1 - w) Sigma + w N

The dataset holds the empirical correlation of `datapoints` Gaussian draws
per object.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import block_diag

from src.config.config import SynthConfig
from src.model.errors import NotPositiveDefiniteError
from src.model.types import Dataset, ModelState, check_dense, dense_labels
from src.preprocess.preprocess import empirical_correlation, to_correlation

logger = logging.getLogger(__name__)

MAX_RESAMPLES = 100


@dataclass(frozen=True)
class GroundTruth:
    """True view partition of the nodes and per-view object clusterings."""
    view_labels: Tuple[int, ...]
    cluster_labels: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "view_labels", tuple(int(x) for x in self.view_labels))
        object.__setattr__(
            self, "cluster_labels", tuple(tuple(int(x) for x in c) for c in self.cluster_labels)
        )
        check_dense(self.view_labels)
        for labels in self.cluster_labels:
            check_dense(labels)

    @property
    def n_views(self) -> int:
        return len(self.cluster_labels)

    @property
    def n(self) -> int:
        return len(self.cluster_labels[0]) if self.cluster_labels else 0

    def as_state(self, T: int) -> ModelState:
        """The planted structure as a model state with one node cluster per view."""
        u = np.asarray(self.view_labels)
        y = tuple(tuple([1] * int(np.sum(u == v))) for v in range(1, self.n_views + 1))
        return ModelState(u=self.view_labels, y=y, z=self.cluster_labels, T=T)


def random_correlation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """
    Random dim x dim correlation matrix: A = L L' for a lower-triangular L of
    standard normals, scaled to unit diagonal, then nodes shuffled.
    """
    for _ in range(MAX_RESAMPLES):
        chol = np.tril(rng.standard_normal((dim, dim)))
        if np.all(np.abs(np.diag(chol)) > 0):
            break
    else:
        raise NotPositiveDefiniteError("could not draw a non-singular triangular factor")
    corr = to_correlation(chol @ chol.T)
    order = rng.permutation(dim)
    return corr[np.ix_(order, order)]


def noise_matrix(p: int, background: float) -> np.ndarray:
    """Unit diagonal, constant off-diagonal `background`."""
    noise = np.full((p, p), float(background))
    np.fill_diagonal(noise, 1.0)
    return noise


def _cluster_labels(config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    if config.balanced:
        return dense_labels(rng.permutation(np.arange(config.n) % config.n_clusters))
    return dense_labels(rng.integers(0, config.n_clusters, size=config.n))


def generate(config: SynthConfig) -> Tuple[Dataset, GroundTruth]:
    """Draw a dataset with planted structure; deterministic given config.seed."""
    seq = np.random.SeedSequence(config.seed)
    structure_seq, *object_seqs = seq.spawn(config.n + 1)
    rng = np.random.default_rng(structure_seq)

    size = config.nodes_per_view
    blocks = [
        [random_correlation(size, rng) for _ in range(config.n_clusters)]
        for _ in range(config.n_views)
    ]
    labels = np.stack([_cluster_labels(config, rng) for _ in range(config.n_views)])
    noise = noise_matrix(config.p, config.background)

    matrices = np.empty((config.n, config.p, config.p))
    for i in range(config.n):
        sigma = block_diag(*[blocks[v][labels[v, i] - 1] for v in range(config.n_views)])
        sigma_star = (1.0 - config.w) * sigma + config.w * noise
        try:
            chol = np.linalg.cholesky(sigma_star)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError(
                f"noisy covariance is not positive definite (w={config.w}, background={config.background})",
                subject_id=f"s{i:04d}",
            )
        obj_rng = np.random.default_rng(object_seqs[i])
        draws = obj_rng.standard_normal((config.datapoints, config.p)) @ chol.T
        matrices[i] = empirical_correlation(draws)

    view_labels = np.repeat(np.arange(1, config.n_views + 1), size)
    truth = GroundTruth(view_labels=tuple(view_labels.tolist()),
                        cluster_labels=tuple(tuple(row.tolist()) for row in labels))
    logger.debug("generated %d objects, p=%d, w=%.2f", config.n, config.p, config.w)
    return Dataset(matrices=matrices, t_ori=config.datapoints, kind="correlation"), truth
