"""
Slow end-to-end recovery checks on full-size synthetic data.

Skipped unless TEST_RUN_SLOW=true (or run_slow in tests/config/test_config.json).
Restart and replication counts come from the test configuration.
"""

import unittest
import os
import sys

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import load_test_config
from src.config.config import Hyperparams, RunConfig, SynthConfig
from src.inference.restarts import run_restarts, select_model
from src.metrics.matching import match_subjects
from src.metrics.partition import adjusted_rand_index, recovery_score
from src.model.types import Dataset
from src.preprocess.preprocess import whiten
from src.stats.priors import dof_grid
from src.synth.synthgen import generate

CONFIG = load_test_config()


def fit_and_score(config: SynthConfig, whiten_first: bool = False):
    data, truth = generate(config)
    if whiten_first:
        data, _ = whiten(data)
    hyper = Hyperparams(restarts=CONFIG.acceptance_restarts, seed=config.seed)
    results = run_restarts(data, hyper, RunConfig(workers=CONFIG.workers, verbose=CONFIG.verbose_output))
    chosen = select_model(results, hyper, "stable").result
    return recovery_score(truth, chosen.state), chosen


def mean_recovery(w: float, data_type: int, whiten_first: bool = False):
    view, cluster = [], []
    for r in range(CONFIG.acceptance_replications):
        config = SynthConfig.for_type(data_type, w=w, balanced=True, seed=CONFIG.acceptance_seed + r)
        report, _ = fit_and_score(config, whiten_first)
        view.append(report.view_ari)
        cluster.append(report.grand_mean_cluster_ari)
    return float(np.mean(view)), float(np.mean(cluster))


@unittest.skipUnless(CONFIG.run_slow, "slow acceptance runs are disabled")
class TestSyntheticRecovery(unittest.TestCase):
    """Planted views and clusters at p=30, n=100, V=3, K=4."""

    def test_type1_low_noise(self):
        for w in (0.0, 0.2, 0.4, 0.6):
            with self.subTest(w=w):
                view_ari, cluster_ari = mean_recovery(w, 1)
                self.assertGreaterEqual(view_ari, 0.95)
                self.assertGreaterEqual(cluster_ari, 0.95)

    def test_type2_with_whitening(self):
        for w in (0.0, 0.2, 0.4):
            with self.subTest(w=w):
                view_ari, cluster_ari = mean_recovery(w, 2, whiten_first=True)
                self.assertGreaterEqual(view_ari, 0.90)
                self.assertGreaterEqual(cluster_ari, 0.90)

    def test_heavy_noise_degrades(self):
        view_ari, _ = mean_recovery(0.9, 1)
        self.assertLessEqual(view_ari, 0.5)


@unittest.skipUnless(CONFIG.run_slow, "slow acceptance runs are disabled")
class TestTwoGroupSurrogate(unittest.TestCase):
    """Two planted object groups stand in for a two-condition study."""

    def test_some_view_recovers_the_split(self):
        config = SynthConfig(n_clusters=2, w=0.2, balanced=True, seed=CONFIG.acceptance_seed)
        data, truth = generate(config)
        hyper = Hyperparams(restarts=CONFIG.acceptance_restarts, seed=config.seed)
        results = run_restarts(data, hyper, RunConfig(workers=CONFIG.workers))
        chosen = select_model(results, hyper, "stable").result
        best = max(adjusted_rand_index(truth.cluster_labels[0], zv) for zv in chosen.state.z)
        self.assertGreaterEqual(best, 0.9)

    def test_identical_datasets_are_matched(self):
        config = SynthConfig(n_clusters=2, w=0.0, balanced=True, seed=CONFIG.acceptance_seed)
        data, _ = generate(config)
        grid = dof_grid(data.p, data.t_ori)
        for T in (grid.values[0], grid.values[-1]):
            with self.subTest(T=T):
                accuracy, predicted = match_subjects(data, data, list(range(data.p)), T)
                self.assertEqual(accuracy, 1.0)
                self.assertEqual(predicted.tolist(), list(range(data.n)))

    def test_scaled_copies_are_matched(self):
        config = SynthConfig(p=12, n=20, n_views=2, n_clusters=2, datapoints=400, seed=CONFIG.acceptance_seed)
        data, _ = generate(config)
        T = 400
        copy = Dataset(matrices=data.matrices * T, t_ori=data.t_ori, kind="covariance",
                       subject_ids=data.subject_ids)
        accuracy, predicted = match_subjects(data, copy, list(range(12)), T)
        self.assertEqual(accuracy, 1.0)
        self.assertEqual(predicted.tolist(), list(range(20)))


if __name__ == '__main__':
    # Run tests
    unittest.main(verbosity=2)
