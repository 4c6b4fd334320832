# config.py
"""
Configuration objects for wishmix.

Hyperparameters of the model and optimizer, synthetic benchmark settings,
preprocessing flags and run-time (parallelism/verbosity) settings.
"""

import os
from dataclasses import dataclass, field, asdict
from typing import Callable, List, Literal, Optional

from dotenv import load_dotenv, find_dotenv

from src.model.errors import ConfigError

ViewPlacement = Literal["best", "singleton"]

# Progress hook signature: (restart_index, iteration, log_posterior)
ProgressHook = Callable[[int, int, float], None]


@dataclass(frozen=True)
class Hyperparams:
    # ── Priors ─────────────────────────────────────────────────────
    alpha: float = 1.0                    # CRP concentration shared by all three CRPs
    alpha_view: Optional[float] = None    # overrides alpha for u
    alpha_node: Optional[float] = None    # overrides alpha for each y_v
    alpha_object: Optional[float] = None  # overrides alpha for each z_v
    delta: int = 3                        # degree-of-freedom grid step

    # ── Optimizer budget ───────────────────────────────────────────
    restarts: int = 1000                  # J
    max_iter: int = 500
    max_stability: int = 10
    epsilon: float = 1e-5                 # log-posterior convergence tolerance
    seed: int = 0                         # master seed

    # ── Move set ───────────────────────────────────────────────────
    view_move_placement: ViewPlacement = "best"
    fix_single_view: bool = False         # u fixed to one view (no view sweep)

    # ── Model selection ────────────────────────────────────────────
    top_n: int = 5
    stability_probe: int = 30

    # ── Misc ───────────────────────────────────────────────────────
    debug: bool = False                   # re-score every move with the full posterior

    def __post_init__(self):
        for name in ("alpha", "alpha_view", "alpha_node", "alpha_object"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be > 0, got {value}")
        if self.delta < 1:
            raise ConfigError(f"delta must be >= 1, got {self.delta}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iter < 0:
            raise ConfigError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.max_stability < 1:
            raise ConfigError(f"max_stability must be >= 1, got {self.max_stability}")
        if self.view_move_placement not in ("best", "singleton"):
            raise ConfigError(f"unknown view_move_placement '{self.view_move_placement}'")
        if self.top_n < 2:
            raise ConfigError(f"top_n must be >= 2, got {self.top_n}")

    @property
    def view_alpha(self) -> float:
        return self.alpha if self.alpha_view is None else self.alpha_view

    @property
    def node_alpha(self) -> float:
        return self.alpha if self.alpha_node is None else self.alpha_node

    @property
    def object_alpha(self) -> float:
        return self.alpha if self.alpha_object is None else self.alpha_object

    def to_dict(self) -> dict:
        """Serializable view used in model files."""
        return asdict(self)


@dataclass
class SynthConfig:
    # ── Structure ──────────────────────────────────────────────────
    p: int = 30                 # nodes
    n: int = 100                # objects
    n_views: int = 3            # V
    n_clusters: int = 4         # K per view

    # ── Noise ──────────────────────────────────────────────────────
    w: float = 0.0              # noise weight
    background: float = 0.0     # off-diagonal of the noise matrix: 0.0 Type 1, 0.2 Type 2

    # ── Sampling ───────────────────────────────────────────────────
    datapoints: Optional[int] = None  # defaults to p + 10
    balanced: bool = False            # exact equal cluster sizes instead of uniform draws
    seed: int = 0

    def __post_init__(self):
        if self.datapoints is None:
            self.datapoints = self.p + 10
        if self.n_views < 1 or self.p % self.n_views != 0:
            raise ConfigError(f"p={self.p} must be divisible by the number of views {self.n_views}")
        if not 0.0 <= self.w <= 1.0:
            raise ConfigError(f"w must lie in [0, 1], got {self.w}")
        if self.n < 1 or self.n_clusters < 1:
            raise ConfigError("n and n_clusters must be >= 1")
        if self.datapoints < 2:
            raise ConfigError(f"datapoints must be >= 2, got {self.datapoints}")

    @classmethod
    def for_type(cls, data_type: int, **kwargs) -> "SynthConfig":
        """Type 1 has a zero background correlation, Type 2 a background of 0.2."""
        if data_type not in (1, 2):
            raise ConfigError(f"data type must be 1 or 2, got {data_type}")
        return cls(background=0.0 if data_type == 1 else 0.2, **kwargs)

    @property
    def nodes_per_view(self) -> int:
        return self.p // self.n_views


@dataclass
class PreprocessConfig:
    regularize: bool = False        # Ledoit-Wolf shrinkage (time-series input only)
    whiten: bool = False
    mean_from: List[str] = field(default_factory=list)  # extra manifests pooled into the mean

    def __post_init__(self):
        if self.mean_from and not self.whiten:
            raise ConfigError("mean_from only applies when whitening")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunConfig:
    # ── Parallelism ────────────────────────────────────────────────
    workers: int = field(default_factory=lambda: get_default_workers())

    # ── Reporting ──────────────────────────────────────────────────
    verbose: bool = field(default_factory=lambda: _env_flag("WISHMIX_VERBOSE", False))
    progress: Optional[ProgressHook] = None
    log_runs: bool = True           # write restart records through RunLogger

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


def _env_flag(name: str, default: bool) -> bool:
    load_dotenv(find_dotenv(usecwd=True))
    value = os.getenv(name)
    if value is None:
        return default
    return value.lower() in ("true", "1", "yes", "on")


def get_default_workers() -> int:
    """Worker count from WISHMIX_WORKERS (a .env file is honoured), else 1."""
    load_dotenv(find_dotenv(usecwd=True))
    value = os.getenv("WISHMIX_WORKERS")
    if value is None:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        raise ConfigError(f"WISHMIX_WORKERS must be an integer, got '{value}'")


DEFAULT_HYPERPARAMS = Hyperparams()


def get_default_hyperparams() -> Hyperparams:
    """Get default hyperparameters."""
    return DEFAULT_HYPERPARAMS
