"""
Phase timing metrics for wishmix commands.
"""

import json
import time
from dataclasses import dataclass, asdict
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict

from .config import get_logging_config, LoggingConfig


@dataclass
class MetricEntry:
    """A single recorded metric."""
    timestamp: str
    metric_name: str
    value: float
    unit: str
    metadata: Dict[str, Any]


class RunMetrics:
    """Collects performance metrics (durations of fit, whiten, simulate, ...)."""

    def __init__(self, logs_dir: str = None, config: LoggingConfig = None):
        self.config = config or get_logging_config()
        logs_dir = Path(logs_dir) if logs_dir is not None else self.config.get_logs_path()
        self.metrics_dir = logs_dir / "metrics"
        self.metrics_dir.mkdir(parents=True, exist_ok=True)

    def _get_metrics_filename(self, date: datetime = None) -> Path:
        day = (date or datetime.now()).strftime("%Y-%m-%d")
        return self.metrics_dir / f"metrics_{day}.jsonl"

    def record_metric(self, name: str, value: float, unit: str = "",
                      metadata: Dict[str, Any] = None):
        """
        Record a performance metric.

        Args:
            name: Metric name (e.g., 'fit_duration')
            value: Metric value
            unit: Unit of measurement (e.g., 'ms')
            metadata: Additional context
        """
        if not self.config.enable_metrics_logging:
            return
        entry = MetricEntry(
            timestamp=datetime.now().isoformat(),
            metric_name=name,
            value=float(value),
            unit=unit,
            metadata=metadata or {},
        )
        with open(self._get_metrics_filename(), 'a', encoding='utf-8') as f:
            f.write(json.dumps(asdict(entry), ensure_ascii=False) + '\n')

    def get_metric_summary(self, metric_name: str, days: int = 7) -> Dict[str, Any]:
        """
        Summary statistics of one metric over recent days.

        Returns:
            Dictionary with min, max, avg, total and count
        """
        values = []
        today = datetime.now()
        for i in range(days):
            filename = self._get_metrics_filename(today - timedelta(days=i))
            if not filename.exists():
                continue
            with open(filename, 'r', encoding='utf-8') as f:
                for line in f:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    if entry['metric_name'] == metric_name:
                        values.append(entry['value'])

        if not values:
            return {'count': 0}
        return {
            'count': len(values),
            'min': min(values),
            'max': max(values),
            'avg': sum(values) / len(values),
            'total': sum(values),
        }


class RunTimer:
    """Context manager recording `<operation>_duration` in milliseconds."""

    def __init__(self, operation_name: str, metadata: Dict[str, Any] = None,
                 metrics: RunMetrics = None):
        self.operation_name = operation_name
        self.metadata = metadata or {}
        self.start_time = None
        self.metrics = metrics

    def __enter__(self):
        if self.metrics is None:
            self.metrics = RunMetrics()
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.start_time is not None:
            metadata = dict(self.metadata)
            if exc_type is not None:
                metadata['error'] = str(exc_val)
            self.metrics.record_metric(
                f"{self.operation_name}_duration", self.get_elapsed_ms(), "ms", metadata
            )

    def get_elapsed_ms(self) -> float:
        """Get elapsed time in milliseconds."""
        if self.start_time is None:
            return 0.0
        return (time.perf_counter() - self.start_time) * 1000
