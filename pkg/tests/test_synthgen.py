"""
Tests for the synthetic benchmark generator.
"""

import unittest
import os
import sys

import numpy as np
from scipy import stats

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.config.config import SynthConfig
from src.model.errors import ConfigError, InvalidLabelsError
from src.synth.synthgen import GroundTruth, generate, noise_matrix, random_correlation


class TestRandomCorrelation(unittest.TestCase):

    def test_one_dimension(self):
        np.testing.assert_array_equal(random_correlation(1, np.random.default_rng(0)), [[1.0]])

    def test_is_correlation_matrix(self):
        rng = np.random.default_rng(1)
        for dim in (2, 5, 10):
            corr = random_correlation(dim, rng)
            np.testing.assert_array_equal(np.diag(corr), 1.0)
            np.testing.assert_array_equal(corr, corr.T)
            np.linalg.cholesky(corr)

    def test_deterministic(self):
        a = random_correlation(6, np.random.default_rng(2))
        b = random_correlation(6, np.random.default_rng(2))
        np.testing.assert_array_equal(a, b)


class TestSynthConfig(unittest.TestCase):

    def test_defaults(self):
        config = SynthConfig()
        self.assertEqual((config.p, config.n, config.n_views, config.n_clusters), (30, 100, 3, 4))
        self.assertEqual(config.datapoints, 40)
        self.assertEqual(config.nodes_per_view, 10)

    def test_types(self):
        self.assertEqual(SynthConfig.for_type(1).background, 0.0)
        self.assertEqual(SynthConfig.for_type(2, w=0.3).background, 0.2)
        with self.assertRaises(ConfigError):
            SynthConfig.for_type(3)

    def test_validation(self):
        with self.assertRaises(ConfigError):
            SynthConfig(p=10, n_views=3)
        with self.assertRaises(ConfigError):
            SynthConfig(w=1.5)
        with self.assertRaises(ConfigError):
            SynthConfig(datapoints=1)

    def test_noise_matrix(self):
        noise = noise_matrix(3, 0.2)
        np.testing.assert_array_equal(np.diag(noise), 1.0)
        self.assertEqual(noise[0, 2], 0.2)
        np.testing.assert_array_equal(noise_matrix(4, 0.0), np.eye(4))


class TestGenerate(unittest.TestCase):
    """Datasets with planted structure."""

    def test_default_sizes(self):
        data, truth = generate(SynthConfig(balanced=True))
        self.assertEqual(data.matrices.shape, (100, 30, 30))
        self.assertEqual(data.t_ori, 40)
        self.assertEqual(data.kind, "correlation")
        self.assertEqual(truth.n_views, 3)
        self.assertEqual(truth.view_labels, tuple([1] * 10 + [2] * 10 + [3] * 10))
        for labels in truth.cluster_labels:
            self.assertEqual(np.bincount(labels)[1:].tolist(), [25, 25, 25, 25])

    def test_deterministic(self):
        config = SynthConfig(p=6, n=10, n_views=2, n_clusters=2, w=0.2, seed=5)
        a, truth_a = generate(config)
        b, truth_b = generate(config)
        np.testing.assert_array_equal(a.matrices, b.matrices)
        self.assertEqual(truth_a, truth_b)
        c, _ = generate(SynthConfig(p=6, n=10, n_views=2, n_clusters=2, w=0.2, seed=6))
        self.assertFalse(np.array_equal(a.matrices, c.matrices))

    def test_cross_view_correlation_vanishes_without_noise(self):
        """Type 1 at w=0: cross-view blocks are zero in the true covariance."""
        config = SynthConfig(p=4, n=6, n_views=2, n_clusters=1, w=0.0, datapoints=20000, seed=7)
        data, _ = generate(config)
        cross = data.matrices[:, :2, 2:]
        self.assertLess(np.max(np.abs(cross)), 0.05)

    def test_full_noise_is_identity(self):
        """w=1, Type 1: every object has identity covariance."""
        config = SynthConfig(p=4, n=5, n_views=2, n_clusters=2, w=1.0, datapoints=20000, seed=8)
        data, _ = generate(config)
        off = data.matrices - np.eye(4)
        self.assertLess(np.max(np.abs(off)), 0.05)

    def test_background_enters_with_noise(self):
        config = SynthConfig.for_type(2, p=4, n=4, n_views=2, n_clusters=1, w=1.0, datapoints=20000, seed=9)
        data, _ = generate(config)
        mask = ~np.eye(4, dtype=bool)
        self.assertAlmostEqual(float(np.mean(data.matrices[:, mask])), 0.2, delta=0.05)

    def test_uniform_labels(self):
        config = SynthConfig(p=2, n=2000, n_views=1, n_clusters=4, datapoints=8, seed=10)
        _, truth = generate(config)
        counts = np.bincount(truth.cluster_labels[0])[1:]
        self.assertEqual(counts.sum(), 2000)
        self.assertGreater(stats.chisquare(counts).pvalue, 0.001)

    def test_more_clusters_than_objects_stays_dense(self):
        _, truth = generate(SynthConfig(p=2, n=3, n_views=1, n_clusters=5, balanced=True, seed=11))
        self.assertEqual(sorted(set(truth.cluster_labels[0])), [1, 2, 3])


class TestGroundTruth(unittest.TestCase):

    def test_dense_labels_required(self):
        with self.assertRaises(InvalidLabelsError):
            GroundTruth(view_labels=(1, 3), cluster_labels=((1, 1),))
        with self.assertRaises(InvalidLabelsError):
            GroundTruth(view_labels=(1, 1), cluster_labels=((2, 2),))

    def test_as_state(self):
        truth = GroundTruth(view_labels=(1, 2, 1), cluster_labels=((1, 2), (1, 1)))
        state = truth.as_state(T=8)
        state.validate(n=2, p=3)
        self.assertEqual(state.y, ((1, 1), (1,)))
        self.assertEqual(truth.n, 2)


if __name__ == '__main__':
    # Run tests
    unittest.main(verbosity=2)
