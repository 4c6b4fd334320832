"""
Run logger for wishmix.

Records every ICM restart of a fit as one JSON line:
- seed, restart index and final log posterior
- iteration count and convergence flag
- number of views and object clusters per view
- failures, in a separate errors file
"""

import json
import uuid
from dataclasses import dataclass, asdict
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config import get_logging_config, LoggingConfig


@dataclass
class RunLogEntry:
    """One restart of a fitting command."""
    id: str
    timestamp: str
    command: str                    # 'fit', 'evaluate', ...
    seed: int
    restart_index: int
    log_posterior: Optional[float] = None
    iterations: Optional[int] = None
    converged: Optional[bool] = None
    n_views: Optional[int] = None
    n_clusters: Optional[List[int]] = None
    duration_ms: Optional[float] = None
    error: Optional[str] = None
    metadata: Optional[Dict[str, Any]] = None


class RunLogger:
    """
    JSONL logger for fitting runs.

    Features:
    - one file per day and record type (runs/, errors/)
    - summary statistics over recent days
    - retention cleanup
    """

    def __init__(self, logs_dir: str = None, config: LoggingConfig = None):
        """
        Initialize the run logger.

        Args:
            logs_dir: Directory to store log files. If None, uses config or default.
            config: LoggingConfig instance. If None, uses global config.
        """
        self.config = config or get_logging_config()
        self.logs_dir = Path(logs_dir) if logs_dir is not None else self.config.get_logs_path()

        self.logs_dir.mkdir(parents=True, exist_ok=True)
        (self.logs_dir / "runs").mkdir(exist_ok=True)
        (self.logs_dir / "errors").mkdir(exist_ok=True)

    def _get_log_filename(self, log_type: str = "runs", date: datetime = None) -> Path:
        """Get filename for a date (today by default)."""
        day = (date or datetime.now()).strftime("%Y-%m-%d")
        return self.logs_dir / log_type / f"{log_type}_{day}.jsonl"

    def _write_log_entry(self, entry: RunLogEntry, log_type: str = "runs"):
        if log_type == "runs" and not self.config.enable_run_logging:
            return
        if log_type == "errors" and not self.config.enable_error_logging:
            return
        with open(self._get_log_filename(log_type), 'a', encoding='utf-8') as f:
            f.write(json.dumps(asdict(entry), ensure_ascii=False) + '\n')

    def log_run(self,
                command: str,
                seed: int,
                restart_index: int,
                log_posterior: float = None,
                iterations: int = None,
                converged: bool = None,
                n_views: int = None,
                n_clusters: List[int] = None,
                duration_ms: float = None,
                error: str = None,
                metadata: Dict[str, Any] = None) -> str:
        """
        Record one restart.

        Returns:
            Unique ID of the entry
        """
        entry = RunLogEntry(
            id=str(uuid.uuid4()),
            timestamp=datetime.now().isoformat(),
            command=command,
            seed=int(seed),
            restart_index=int(restart_index),
            log_posterior=log_posterior,
            iterations=iterations,
            converged=converged,
            n_views=n_views,
            n_clusters=n_clusters,
            duration_ms=duration_ms,
            error=error,
            metadata=metadata or {},
        )
        self._write_log_entry(entry, "runs")
        if error:
            self._write_log_entry(entry, "errors")
        return entry.id

    def read_entries(self, days: int = 7, log_type: str = "runs") -> List[Dict[str, Any]]:
        """Entries of the last `days` days, oldest day first."""
        entries = []
        today = datetime.now()
        for i in reversed(range(days)):
            filename = self._get_log_filename(log_type, today - timedelta(days=i))
            if not filename.exists():
                continue
            with open(filename, 'r', encoding='utf-8') as f:
                entries.extend(json.loads(line) for line in f if line.strip())
        return entries

    def get_stats(self, days: int = 7) -> Dict[str, Any]:
        """
        Summarise recent runs.

        Returns:
            Dictionary with run counts, convergence rate and log posterior range
        """
        entries = self.read_entries(days)
        stats = {
            'total_runs': len(entries),
            'failed_runs': sum(1 for e in entries if e.get('error')),
            'converged_runs': sum(1 for e in entries if e.get('converged')),
            'best_log_posterior': None,
            'avg_iterations': 0.0,
            'runs_by_command': {},
        }
        values = [e['log_posterior'] for e in entries if e.get('log_posterior') is not None]
        if values:
            stats['best_log_posterior'] = max(values)
        iterations = [e['iterations'] for e in entries if e.get('iterations') is not None]
        if iterations:
            stats['avg_iterations'] = sum(iterations) / len(iterations)
        for e in entries:
            stats['runs_by_command'][e['command']] = stats['runs_by_command'].get(e['command'], 0) + 1
        return stats

    def cleanup_old_logs(self, days_to_keep: int = None) -> int:
        """
        Delete log files older than days_to_keep.

        Returns:
            Number of files removed
        """
        if days_to_keep is None:
            days_to_keep = self.config.days_to_keep
        cutoff = datetime.now() - timedelta(days=days_to_keep)
        removed = 0
        for log_type in ["runs", "errors", "metrics"]:
            log_dir = self.logs_dir / log_type
            if not log_dir.exists():
                continue
            for log_file in log_dir.glob("*.jsonl"):
                try:
                    file_date = datetime.strptime(log_file.stem.split('_')[-1], "%Y-%m-%d")
                except ValueError:
                    continue
                if file_date < cutoff:
                    log_file.unlink()
                    removed += 1
        return removed


# Global logger instance
_global_logger = None


def get_run_logger() -> RunLogger:
    """The shared run logger; rebuilt whenever configure_logging swaps the configuration."""
    global _global_logger
    config = get_logging_config()
    if _global_logger is None or _global_logger.config is not config:
        _global_logger = RunLogger(config=config)
    return _global_logger


def log_fit_run(result, command: str = "fit", restart_index: int = 0,
                logger: RunLogger = None, **metadata) -> str:
    """Convenience function recording a FitResult."""
    state = result.state
    return (logger or get_run_logger()).log_run(
        command=command,
        seed=result.seed,
        restart_index=restart_index,
        log_posterior=result.log_posterior,
        iterations=result.iterations,
        converged=result.converged,
        n_views=state.n_views,
        n_clusters=state.n_clusters(),
        duration_ms=result.duration_ms,
        metadata=metadata,
    )


def log_fit_failure(error: BaseException, seed: int, command: str = "fit", restart_index: int = -1,
                    logger: RunLogger = None, **metadata) -> str:
    """Record a fit that raised; restart_index is -1 when no single restart is to blame."""
    return (logger or get_run_logger()).log_run(
        command=command,
        seed=seed,
        restart_index=restart_index,
        error=f"{type(error).__name__}: {error}",
        metadata=metadata,
    )
