"""
wishmix run-logging system

Records every restart of a fit as structured JSONL and times the phases of
each command.
"""

from .run_logger import RunLogger, RunLogEntry, get_run_logger, log_fit_failure, log_fit_run
from .metrics import RunMetrics, RunTimer
from .config import LoggingConfig, configure_logging, get_logging_config

__all__ = [
    'RunLogger', 'RunLogEntry', 'RunMetrics', 'RunTimer',
    'LoggingConfig', 'configure_logging', 'get_logging_config',
    'get_run_logger', 'log_fit_failure', 'log_fit_run'
]
