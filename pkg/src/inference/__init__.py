"""
ICM optimizer, restart farm and model selection.
"""

from .icm import IcmDiagnostics, IcmOptimizer, init_state, icm_sweep, icm_fit
from .restarts import run_restarts, select_stable_model, select_best_model, derive_seed

__all__ = [
    "IcmDiagnostics",
    "IcmOptimizer",
    "init_state",
    "icm_sweep",
    "icm_fit",
    "run_restarts",
    "select_stable_model",
    "select_best_model",
    "derive_seed"
]
