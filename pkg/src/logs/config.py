"""
Where run logs go and which records are kept.

Defaults come from the environment (or a .env file):

    WISHMIX_LOGS_DIR   root of runs/, errors/ and metrics/   (default ./data/logs)
    WISHMIX_LOG_DAYS   retention used by cleanup_old_logs    (default 30)
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv, find_dotenv

from src.model.errors import ConfigError

DEFAULT_LOGS_DIR = os.path.join("data", "logs")
DEFAULT_DAYS_TO_KEEP = 30


@dataclass
class LoggingConfig:
    """Run-log settings; None fields are filled from the environment."""

    logs_dir: Optional[str] = None
    days_to_keep: Optional[int] = None

    # Record types
    enable_run_logging: bool = True       # one line per ICM restart
    enable_error_logging: bool = True     # failed fits, duplicated into errors/
    enable_metrics_logging: bool = True   # phase durations

    def __post_init__(self):
        if self.logs_dir is None or self.days_to_keep is None:
            load_dotenv(find_dotenv(usecwd=True))
        if self.logs_dir is None:
            self.logs_dir = os.getenv("WISHMIX_LOGS_DIR", DEFAULT_LOGS_DIR)
        if self.days_to_keep is None:
            raw = os.getenv("WISHMIX_LOG_DAYS", str(DEFAULT_DAYS_TO_KEEP))
            try:
                self.days_to_keep = int(raw)
            except ValueError:
                raise ConfigError(f"WISHMIX_LOG_DAYS must be an integer, got '{raw}'")
        if self.days_to_keep < 1:
            raise ConfigError(f"days_to_keep must be >= 1, got {self.days_to_keep}")

    def get_logs_path(self) -> Path:
        return Path(self.logs_dir)


_global_config: Optional[LoggingConfig] = None


def get_logging_config() -> LoggingConfig:
    """The process-wide logging configuration (created from the environment on first use)."""
    global _global_config
    if _global_config is None:
        _global_config = LoggingConfig()
    return _global_config


def set_logging_config(config: LoggingConfig):
    global _global_config
    _global_config = config


def configure_logging(logs_dir: str = None,
                      days_to_keep: int = None,
                      enable_run_logging: bool = True,
                      enable_error_logging: bool = True,
                      enable_metrics_logging: bool = True) -> LoggingConfig:
    """
    Replace the process-wide configuration.

    Args:
        logs_dir: Root directory of the run logs
        days_to_keep: Retention of daily log files
        enable_run_logging: Record every restart of a fit
        enable_error_logging: Record failed fits separately
        enable_metrics_logging: Record phase timings

    Returns:
        The configured LoggingConfig instance
    """
    config = LoggingConfig(
        logs_dir=logs_dir,
        days_to_keep=days_to_keep,
        enable_run_logging=enable_run_logging,
        enable_error_logging=enable_error_logging,
        enable_metrics_logging=enable_metrics_logging,
    )
    set_logging_config(config)
    return config
