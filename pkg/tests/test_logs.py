"""
Tests for the run logger, phase metrics and logging configuration.
"""

import json
import tempfile
import unittest
from unittest import mock
import os
import sys
from pathlib import Path

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.logs import (
    LoggingConfig,
    RunLogger,
    RunMetrics,
    RunTimer,
    configure_logging,
    get_run_logger,
    log_fit_failure,
    log_fit_run,
)
from src.logs.config import get_logging_config
from src.model.errors import ConfigError, EmptyDofGridError
from src.model.types import FitResult, ModelState


def fit_result(seed=7, log_posterior=-12.5):
    state = ModelState(u=(1, 1, 2), y=((1, 1), (1,)), z=((1, 2), (1, 1)), T=9)
    return FitResult(state=state, log_posterior=log_posterior, seed=seed, iterations=4, converged=True,
                     duration_ms=12.5)


class LogsTestCase(unittest.TestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name
        self.config = LoggingConfig(logs_dir=self.tmp)

    def tearDown(self):
        self._tmp.cleanup()


class TestRunLogger(LogsTestCase):
    """JSONL records of fitting restarts."""

    def test_creates_directories(self):
        RunLogger(config=self.config)
        self.assertTrue((Path(self.tmp) / "runs").is_dir())
        self.assertTrue((Path(self.tmp) / "errors").is_dir())

    def test_log_and_read(self):
        logger = RunLogger(config=self.config)
        entry_id = logger.log_run("fit", seed=3, restart_index=0, log_posterior=-5.0,
                                  iterations=2, converged=True, n_views=1, n_clusters=[2])
        entries = logger.read_entries()
        self.assertEqual(len(entries), 1)
        self.assertEqual(entries[0]["id"], entry_id)
        self.assertEqual(entries[0]["n_clusters"], [2])
        self.assertEqual(logger.read_entries(log_type="errors"), [])

    def test_errors_are_duplicated(self):
        logger = RunLogger(config=self.config)
        logger.log_run("fit", seed=1, restart_index=2, error="boom")
        self.assertEqual(len(logger.read_entries(log_type="errors")), 1)
        self.assertEqual(logger.get_stats()["failed_runs"], 1)

    def test_fit_result_and_stats(self):
        logger = RunLogger(config=self.config)
        log_fit_run(fit_result(seed=1, log_posterior=-3.0), restart_index=0, logger=logger, source="a")
        log_fit_run(fit_result(seed=2, log_posterior=-1.0), restart_index=1, logger=logger, source="a")
        entries = logger.read_entries()
        self.assertEqual([e["seed"] for e in entries], [1, 2])
        self.assertEqual(entries[0]["n_views"], 2)
        self.assertEqual(entries[0]["n_clusters"], [2, 1])
        self.assertEqual(entries[0]["metadata"], {"source": "a"})
        self.assertEqual(entries[0]["duration_ms"], 12.5)

        stats = logger.get_stats()
        self.assertEqual(stats["total_runs"], 2)
        self.assertEqual(stats["converged_runs"], 2)
        self.assertEqual(stats["best_log_posterior"], -1.0)
        self.assertEqual(stats["avg_iterations"], 4.0)
        self.assertEqual(stats["runs_by_command"], {"fit": 2})

    def test_failure_goes_to_both_files(self):
        logger = RunLogger(config=self.config)
        log_fit_failure(EmptyDofGridError("grid is empty"), seed=9, logger=logger, source="b")
        entry = logger.read_entries(log_type="errors")[0]
        self.assertEqual(entry["error"], "EmptyDofGridError: grid is empty")
        self.assertEqual(entry["restart_index"], -1)
        self.assertIsNone(entry["log_posterior"])
        self.assertEqual(len(logger.read_entries()), 1)

    def test_shared_logger_follows_configuration(self):
        first = configure_logging(logs_dir=self.tmp)
        self.assertIs(get_run_logger().config, first)
        other = os.path.join(self.tmp, "other")
        configure_logging(logs_dir=other)
        self.assertEqual(get_run_logger().logs_dir, Path(other))

    def test_disabled_run_logging(self):
        config = LoggingConfig(logs_dir=self.tmp, enable_run_logging=False)
        logger = RunLogger(config=config)
        logger.log_run("fit", seed=1, restart_index=0, error="boom")
        self.assertEqual(logger.read_entries(), [])
        self.assertEqual(len(logger.read_entries(log_type="errors")), 1)

    def test_cleanup_old_logs(self):
        logger = RunLogger(config=self.config)
        logger.log_run("fit", seed=1, restart_index=0)
        old = Path(self.tmp) / "runs" / "runs_2000-01-01.jsonl"
        old.write_text("{}\n")
        (Path(self.tmp) / "runs" / "notes_unknown.jsonl").write_text("")
        self.assertEqual(logger.cleanup_old_logs(days_to_keep=30), 1)
        self.assertFalse(old.exists())
        self.assertEqual(len(logger.read_entries()), 1)


class TestMetrics(LogsTestCase):
    """Phase durations."""

    def test_record_and_summarize(self):
        metrics = RunMetrics(config=self.config)
        metrics.record_metric("fit_duration", 10.0, "ms")
        metrics.record_metric("fit_duration", 30.0, "ms")
        metrics.record_metric("whiten_duration", 1.0, "ms")
        summary = metrics.get_metric_summary("fit_duration")
        self.assertEqual(summary["count"], 2)
        self.assertEqual(summary["avg"], 20.0)
        self.assertEqual(summary["total"], 40.0)
        self.assertEqual(metrics.get_metric_summary("simulate_duration"), {"count": 0})

    def test_timer(self):
        metrics = RunMetrics(config=self.config)
        with RunTimer("whiten", {"n": 3}, metrics=metrics) as timer:
            pass
        self.assertGreaterEqual(timer.get_elapsed_ms(), 0.0)
        files = list((Path(self.tmp) / "metrics").glob("*.jsonl"))
        self.assertEqual(len(files), 1)
        entry = json.loads(files[0].read_text().splitlines()[0])
        self.assertEqual(entry["metric_name"], "whiten_duration")
        self.assertEqual(entry["metadata"], {"n": 3})

    def test_timer_records_errors(self):
        metrics = RunMetrics(config=self.config)
        with self.assertRaises(ValueError):
            with RunTimer("fit", metrics=metrics):
                raise ValueError("bad dataset")
        files = list((Path(self.tmp) / "metrics").glob("*.jsonl"))
        entry = json.loads(files[0].read_text().splitlines()[0])
        self.assertEqual(entry["metadata"]["error"], "bad dataset")

    def test_disabled_metrics(self):
        config = LoggingConfig(logs_dir=self.tmp, enable_metrics_logging=False)
        metrics = RunMetrics(config=config)
        metrics.record_metric("fit_duration", 1.0)
        self.assertEqual(list((Path(self.tmp) / "metrics").glob("*.jsonl")), [])


class TestLoggingConfig(LogsTestCase):

    def test_configure_sets_global(self):
        config = configure_logging(logs_dir=self.tmp, days_to_keep=3)
        self.assertIs(get_logging_config(), config)
        self.assertEqual(config.get_logs_path(), Path(self.tmp))
        self.assertEqual(config.days_to_keep, 3)

    def test_environment_default(self):
        with mock.patch.dict(os.environ, {"WISHMIX_LOGS_DIR": self.tmp, "WISHMIX_LOG_DAYS": "7"}):
            config = LoggingConfig()
        self.assertEqual(config.logs_dir, self.tmp)
        self.assertEqual(config.days_to_keep, 7)

    def test_invalid_retention(self):
        with self.assertRaises(ConfigError):
            LoggingConfig(logs_dir=self.tmp, days_to_keep=0)
        with mock.patch.dict(os.environ, {"WISHMIX_LOG_DAYS": "week"}):
            with self.assertRaises(ConfigError):
                LoggingConfig(logs_dir=self.tmp)


if __name__ == '__main__':
    # Run tests
    unittest.main(verbosity=2)
