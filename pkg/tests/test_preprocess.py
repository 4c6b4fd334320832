"""
Tests for correlation estimation, Ledoit-Wolf shrinkage, whitening and
node importance.
"""

import unittest
import os
import sys

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.model.errors import DimensionMismatchError, DomainError, NotPositiveDefiniteError
from src.model.types import Dataset
from src.preprocess.preprocess import (
    SHRINKAGE_EIGEN_FLOOR,
    WhitenReport,
    empirical_correlation,
    importance,
    importance_ranking,
    ledoit_wolf,
    pooled_mean,
    regularized_correlation,
    to_correlation,
    whiten,
)


def random_covariances(n, p, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a = rng.standard_normal((p, p + 3))
        out.append(a @ a.T / (p + 3) + 0.2 * np.eye(p))
    return np.stack(out)


def report_for(mean):
    data = Dataset(matrices=mean[np.newaxis], t_ori=50, kind="covariance")
    return whiten(data)[1]


class TestEmpiricalCorrelation(unittest.TestCase):
    """Pearson correlation of time series."""

    def test_identical_and_negated_columns(self):
        x = np.array([1.0, 4.0, 2.0, 8.0, 5.0])
        self.assertAlmostEqual(empirical_correlation(np.column_stack([x, x]))[0, 1], 1.0, places=12)
        self.assertAlmostEqual(empirical_correlation(np.column_stack([x, -x]))[0, 1], -1.0, places=12)

    def test_hand_value(self):
        series = np.array([[1, 2], [2, 1], [3, 4], [4, 3], [5, 6]], dtype=float)
        corr = empirical_correlation(series)
        self.assertAlmostEqual(corr[0, 1], 10.0 / np.sqrt(148.0), places=12)
        self.assertEqual(corr[0, 0], 1.0)
        self.assertEqual(corr[0, 1], corr[1, 0])

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        series = rng.standard_normal((30, 4))
        scaled = series * np.array([0.1, 3.0, 25.0, 1e3])
        np.testing.assert_allclose(empirical_correlation(scaled), empirical_correlation(series), atol=1e-12)

    def test_errors(self):
        with self.assertRaises(DomainError) as ctx:
            empirical_correlation(np.array([[1.0, 2.0], [1.0, 3.0], [1.0, 5.0]]))
        self.assertIn("column 0", str(ctx.exception))
        with self.assertRaises(DomainError):
            empirical_correlation(np.array([[1.0, 2.0]]))
        with self.assertRaises(DimensionMismatchError):
            empirical_correlation(np.arange(5.0))


class TestLedoitWolf(unittest.TestCase):
    """Shrinkage towards mu * I."""

    def test_scaled_identity_is_fixed(self):
        h = np.array([[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=float)
        series = 2.0 * h[:, 1:]
        shrunk, rho = ledoit_wolf(series)
        np.testing.assert_allclose(shrunk, 4.0 * np.eye(3), atol=1e-12)
        self.assertTrue(0.0 <= rho <= 1.0)

    def test_single_column_keeps_variance(self):
        rng = np.random.default_rng(1)
        series = rng.standard_normal((25, 1))
        shrunk, _ = ledoit_wolf(series)
        self.assertAlmostEqual(shrunk[0, 0], np.var(series), places=12)

    def test_shrinks_eigenvalue_spread(self):
        rng = np.random.default_rng(2)
        series = rng.standard_normal((20, 50))
        centered = series - series.mean(axis=0)
        sample = centered.T @ centered / 20
        shrunk, rho = ledoit_wolf(series)
        before, after = np.linalg.eigvalsh(sample), np.linalg.eigvalsh(shrunk)
        self.assertLess(after.max() - after.min(), before.max() - before.min())
        self.assertGreater(after.min(), before.min())
        self.assertTrue(0.0 < rho <= 1.0)

    def test_positive_definite_when_short(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            p = int(rng.integers(5, 15))
            t = int(rng.integers(2, p))
            series = rng.standard_normal((t, p))
            shrunk, rho = ledoit_wolf(series)
            self.assertTrue(0.0 <= rho <= 1.0)
            np.linalg.cholesky(shrunk)
            mu = np.trace(shrunk) / p
            self.assertGreaterEqual(np.linalg.eigvalsh(shrunk)[0], SHRINKAGE_EIGEN_FLOOR * mu * (1 - 1e-9))
            corr = regularized_correlation(series)
            np.testing.assert_allclose(np.diag(corr), 1.0)
            np.linalg.cholesky(corr)

    def test_two_time_points_get_the_floor(self):
        """Rank-one sample covariance: rho is raised just enough to reach the floor."""
        rng = np.random.default_rng(4)
        series = rng.standard_normal((2, 8))
        shrunk, rho = ledoit_wolf(series)
        self.assertGreater(rho, 0.0)
        self.assertLess(rho, 0.01)
        mu = np.trace(shrunk) / 8
        self.assertAlmostEqual(np.linalg.eigvalsh(shrunk)[0] / mu, SHRINKAGE_EIGEN_FLOOR, delta=1e-9)

    def test_degenerate_input(self):
        with self.assertRaises(DomainError):
            ledoit_wolf(np.zeros((10, 3)))
        with self.assertRaises(DomainError):
            ledoit_wolf(np.ones((1, 3)))


class TestWhiten(unittest.TestCase):
    """M -> Mbar^{-1/2} M Mbar^{-1/2}."""

    def test_equal_matrices_become_identity(self):
        m0 = random_covariances(1, 4, 4)[0]
        data = Dataset(matrices=np.stack([m0, m0, m0]), t_ori=20, kind="covariance")
        whitened, _ = whiten(data)
        for m in whitened.matrices:
            np.testing.assert_allclose(m, np.eye(4), atol=1e-10)

    def test_mean_of_whitened_is_identity(self):
        data = Dataset(matrices=random_covariances(6, 5, 5), t_ori=20, kind="covariance")
        whitened, _ = whiten(data)
        np.testing.assert_allclose(whitened.matrices.mean(axis=0), np.eye(5), atol=1e-9)

    def test_scalar_example(self):
        data = Dataset(matrices=np.array([[[0.5]], [[1.5]]]), t_ori=10, kind="covariance")
        whitened, report = whiten(data)
        self.assertAlmostEqual(report.mean_matrix[0, 0], 1.0)
        np.testing.assert_allclose(whitened.matrices.ravel(), [0.5, 1.5], atol=1e-12)
        for m in whitened.matrices:
            self.assertEqual(to_correlation(m)[0, 0], 1.0)

    def test_correlation_data_stays_correlation(self):
        rng = np.random.default_rng(6)
        mats = np.stack([empirical_correlation(rng.standard_normal((20, 4))) for _ in range(5)])
        data = Dataset(matrices=mats, t_ori=20)
        whitened, _ = whiten(data)
        self.assertEqual(whitened.kind, "correlation")
        for m in whitened.matrices:
            np.testing.assert_array_equal(np.diag(m), 1.0)
            np.linalg.cholesky(m)

    def test_report_square_roots(self):
        data = Dataset(matrices=random_covariances(4, 3, 7), t_ori=20, kind="covariance")
        _, report = whiten(data)
        np.testing.assert_allclose(
            report.mean_inv_sqrt @ report.mean_matrix @ report.mean_inv_sqrt, np.eye(3), atol=1e-8
        )
        np.testing.assert_allclose(report.mean_sqrt @ report.mean_sqrt, report.mean_matrix, atol=1e-8)
        self.assertEqual(report.p, 3)

    def test_injected_mean(self):
        mats = random_covariances(3, 3, 8)
        data = Dataset(matrices=mats, t_ori=20, kind="covariance")
        other = random_covariances(3, 3, 9)
        pooled = pooled_mean([data, Dataset(matrices=other, t_ori=20, kind="covariance")])
        np.testing.assert_allclose(pooled, np.concatenate([mats, other]).mean(axis=0))
        _, report = whiten(data, pooled)
        np.testing.assert_allclose(report.mean_matrix, pooled)

    def test_mean_must_be_positive_definite(self):
        data = Dataset(matrices=random_covariances(2, 2, 10), t_ori=20, kind="covariance")
        with self.assertRaises(NotPositiveDefiniteError):
            whiten(data, np.array([[1.0, 2.0], [2.0, 1.0]]))
        with self.assertRaises(DimensionMismatchError):
            whiten(data, np.eye(3))


class TestImportance(unittest.TestCase):
    """Importance of original nodes for a view of whitened nodes."""

    def test_identity_mean_is_membership(self):
        report = report_for(np.eye(4))
        np.testing.assert_allclose(importance_ranking([1, 3], report), [0.0, 1.0, 0.0, 1.0], atol=1e-12)

    def test_all_nodes_includes_diagonal(self):
        report = report_for(random_covariances(1, 4, 11)[0])
        for i in range(4):
            self.assertGreaterEqual(importance(i, range(4), report), 1.0)

    def test_two_by_two_square_root(self):
        """Mbar = [[1, .6], [.6, 1]]: sqrt has diagonal (sqrt(1.6)+sqrt(.4))/2."""
        report = report_for(np.array([[1.0, 0.6], [0.6, 1.0]]))
        a = (np.sqrt(1.6) + np.sqrt(0.4)) / 2
        b = (np.sqrt(1.6) - np.sqrt(0.4)) / 2
        np.testing.assert_allclose(report.mean_sqrt, [[a, b], [b, a]], atol=1e-12)
        self.assertAlmostEqual(importance(0, [1], report), 1.0 / 3.0, places=12)
        self.assertAlmostEqual(importance(0, [1], report, normalize=False), b, places=12)
        self.assertAlmostEqual(importance(0, [0, 1], report), 4.0 / 3.0, places=12)

    def test_order_of_view_nodes_is_irrelevant(self):
        report = report_for(random_covariances(1, 5, 12)[0])
        self.assertAlmostEqual(importance(2, [0, 3, 4], report), importance(2, [4, 0, 3], report), places=12)

    def test_empty_view_warns(self):
        report = report_for(np.eye(3))
        with self.assertLogs("src.preprocess.preprocess", level="WARNING"):
            self.assertEqual(importance(0, [], report), 0.0)

    def test_out_of_range(self):
        report = report_for(np.eye(3))
        with self.assertRaises(DimensionMismatchError):
            importance(3, [0], report)
        with self.assertRaises(DimensionMismatchError):
            importance(0, [5], report)

    def test_report_cross_correlation(self):
        report = WhitenReport(mean_matrix=4 * np.eye(2), mean_inv_sqrt=0.5 * np.eye(2), mean_sqrt=2 * np.eye(2))
        np.testing.assert_allclose(report.cross_correlation(), np.eye(2))
        np.testing.assert_allclose(report.cross_correlation(normalize=False), 2 * np.eye(2))


if __name__ == '__main__':
    # Run tests
    unittest.main(verbosity=2)
