"""
Collapsed log posterior of the multiple-view Wishart mixture.

log L = sum_i log C_{M_i,T}
      + sum_{v,k,g} log marginal of block (v, k, g)
      + CRP(u) + sum_v CRP(z_v) + sum_v CRP(y_v) + log P(T)
"""

from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Dict

import numpy as np

from src.config.config import Hyperparams
from src.model.errors import DimensionMismatchError, DomainError
from src.model.types import BlockStats, Dataset, ModelState
from src.stats.priors import crp_log_prob, dof_grid
from src.stats.wishart_math import (
    batched_logdet,
    log_block_marginal,
    log_wishart_constant,
    prior_dof,
    prior_scale_factor,
)


@dataclass(frozen=True)
class PosteriorTerms:
    """The additive components of the log posterior."""
    wishart_constants: float
    block_marginals: float
    crp_views: float
    crp_objects: float
    crp_nodes: float
    dof_prior: float

    @property
    def total(self) -> float:
        return (
            self.wishart_constants
            + self.block_marginals
            + self.crp_views
            + self.crp_objects
            + self.crp_nodes
            + self.dof_prior
        )

    def to_dict(self) -> Dict[str, float]:
        out = asdict(self)
        out["total"] = self.total
        return out


@lru_cache(maxsize=64)
def matrix_logdet_sum(data: Dataset) -> float:
    """sum_i log|M_i|, computed once per dataset (keyed by identity)."""
    return float(np.sum(batched_logdet(data.matrices, "data matrix")))


def wishart_constants(data: Dataset, T: float) -> float:
    """sum_i log C_{M_i,T}; only T changes it."""
    return float(
        0.5 * (T - data.p - 1) * matrix_logdet_sum(data)
        + data.n * log_wishart_constant(0.0, T, data.p)
    )


def block_terms(data: Dataset, state: ModelState) -> float:
    """sum over views, object clusters and node clusters of the block marginals."""
    total = 0.0
    T = state.T
    for v in range(1, state.n_views + 1):
        zv = np.asarray(state.z[v - 1])
        for nodes in state.node_clusters(v):
            dim = nodes.size
            nu = prior_dof(dim)
            S = prior_scale_factor(dim, T) * np.eye(dim)
            for k in range(1, int(zv.max()) + 1):
                stats = BlockStats.from_objects(data, np.flatnonzero(zv == k), nodes)
                total += log_block_marginal(stats, T, nu, S)
    return total


def posterior_terms(data: Dataset, state: ModelState, hyper: Hyperparams) -> PosteriorTerms:
    """Evaluate each component of the log posterior separately."""
    if state.p != data.p:
        raise DimensionMismatchError(f"state has p={state.p}, dataset has p={data.p}")
    state.validate(n=data.n, p=data.p)
    grid = dof_grid(data.p, data.t_ori, hyper.delta)
    if state.T not in grid:
        raise DomainError(f"T={state.T} is not on the degree-of-freedom grid {grid.values}")
    return PosteriorTerms(
        wishart_constants=wishart_constants(data, state.T),
        block_marginals=block_terms(data, state),
        crp_views=crp_log_prob(state.u, hyper.view_alpha),
        crp_objects=sum(crp_log_prob(zv, hyper.object_alpha) for zv in state.z),
        crp_nodes=sum(crp_log_prob(yv, hyper.node_alpha) for yv in state.y),
        dof_prior=grid.log_prob,
    )


def log_posterior(data: Dataset, state: ModelState, hyper: Hyperparams) -> float:
    """Collapsed log posterior log L of a state; a pure function of its inputs."""
    return posterior_terms(data, state, hyper).total
