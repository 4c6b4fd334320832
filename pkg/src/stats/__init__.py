"""
Wishart densities, collapsed block marginals and partition / dof priors.
"""

from .wishart_math import (
    WishartParams,
    log_multigamma,
    log_wishart_density,
    log_block_marginal,
    log_block_marginals,
    wishart_similarity,
)
from .priors import DofGrid, crp_log_prob, crp_enumerate_check, crp_sample, dof_grid

__all__ = [
    "WishartParams",
    "log_multigamma",
    "log_wishart_density",
    "log_block_marginal",
    "log_block_marginals",
    "wishart_similarity",
    "DofGrid",
    "crp_log_prob",
    "crp_enumerate_check",
    "crp_sample",
    "dof_grid"
]
