"""
Tests for the CRP partition prior and the degree-of-freedom grid.
"""

import math
import unittest
import os
import sys

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.model.errors import DomainError, EmptyDofGridError, InvalidLabelsError
from src.stats.priors import (
    crp_enumerate_check,
    crp_log_prob,
    crp_log_prob_sizes,
    crp_sample,
    dof_grid,
    dof_upper_bound,
    set_partitions,
)


class TestCrpLogProb(unittest.TestCase):
    """CRP log-probability of a labelling."""

    def test_hand_value(self):
        """(1,1,1,2,2) with alpha=1 has probability 1/60."""
        self.assertAlmostEqual(crp_log_prob((1, 1, 1, 2, 2), 1.0), math.log(1 / 60), places=12)

    def test_sequential_seating_product(self):
        """Same value as multiplying the seating probabilities."""
        alpha = 0.7
        seating = 1.0 * (1 / (1 + alpha)) * (2 / (2 + alpha)) * (alpha / (3 + alpha)) * (1 / (4 + alpha))
        self.assertAlmostEqual(crp_log_prob((1, 1, 1, 2, 2), alpha), math.log(seating), places=12)

    def test_depends_only_on_block_sizes(self):
        rng = np.random.default_rng(0)
        labels = np.array([1, 1, 2, 3, 3, 3, 4, 2, 1, 1])
        reference = crp_log_prob(labels, 1.3)
        for _ in range(20):
            relabel = rng.permutation(4) + 1
            shuffled = relabel[labels - 1][rng.permutation(labels.size)]
            self.assertAlmostEqual(crp_log_prob(shuffled, 1.3), reference, places=12)

    def test_sizes_form(self):
        self.assertAlmostEqual(crp_log_prob_sizes([3, 2], 1.0), math.log(1 / 60), places=12)

    def test_single_element(self):
        self.assertAlmostEqual(crp_log_prob((1,), 2.5), 0.0, places=12)

    def test_invalid_input(self):
        with self.assertRaises(DomainError):
            crp_log_prob((1, 2), 0.0)
        with self.assertRaises(InvalidLabelsError):
            crp_log_prob((1, 3), 1.0)
        with self.assertRaises(InvalidLabelsError):
            crp_log_prob((), 1.0)


class TestCrpNormalization(unittest.TestCase):
    """Enumeration over all set partitions."""

    def test_bell_numbers(self):
        counts = [sum(1 for _ in set_partitions(m)) for m in range(1, 7)]
        self.assertEqual(counts, [1, 2, 5, 15, 52, 203])

    def test_partitions_are_restricted_growth(self):
        for labels in set_partitions(4):
            self.assertEqual(labels[0], 1)
            for i in range(1, len(labels)):
                self.assertLessEqual(labels[i], max(labels[:i]) + 1)

    def test_three_elements(self):
        probs = sorted(math.exp(crp_log_prob(labels, 1.0)) for labels in set_partitions(3))
        np.testing.assert_allclose(probs, [1 / 6, 1 / 6, 1 / 6, 1 / 6, 1 / 3], atol=1e-12)

    def test_sums_to_one(self):
        for alpha in (0.3, 1.0, 3.0):
            for m in range(1, 9):
                with self.subTest(alpha=alpha, m=m):
                    self.assertAlmostEqual(crp_enumerate_check(m, alpha), 1.0, delta=1e-10)

    def test_enumeration_limits(self):
        with self.assertRaises(DomainError):
            crp_enumerate_check(9, 1.0)
        with self.assertRaises(DomainError):
            crp_enumerate_check(0, 1.0)


class TestCrpSample(unittest.TestCase):

    def test_dense_and_deterministic(self):
        a = crp_sample(40, 1.0, np.random.default_rng(11))
        b = crp_sample(40, 1.0, np.random.default_rng(11))
        np.testing.assert_array_equal(a, b)
        self.assertEqual(a[0], 1)
        np.testing.assert_array_equal(np.unique(a), np.arange(1, a.max() + 1))

    def test_small_alpha_concentrates(self):
        rng = np.random.default_rng(12)
        counts = [crp_sample(10, 0.01, rng).max() for _ in range(1000)]
        self.assertLess(np.mean(counts), 1.2)

    def test_expected_block_count(self):
        """Mean number of blocks is sum_j alpha / (alpha + j - 1)."""
        rng = np.random.default_rng(13)
        alpha, m = 2.0, 12
        expected = sum(alpha / (alpha + j) for j in range(m))
        counts = [crp_sample(m, alpha, rng).max() for _ in range(2000)]
        self.assertAlmostEqual(np.mean(counts), expected, delta=0.15)


class TestDofGrid(unittest.TestCase):
    """Uniform prior grid over the degree of freedom."""

    def test_thirty_nodes(self):
        grid = dof_grid(30, 40, 3)
        self.assertEqual(grid.values, tuple(range(35, 60, 3)))
        self.assertEqual(grid.values[-1], 59)
        self.assertEqual(grid.q, 9)
        self.assertAlmostEqual(grid.prob, 1 / 9)
        self.assertAlmostEqual(grid.log_prob, -math.log(9))

    def test_one_node(self):
        grid = dof_grid(1, 100, 3)
        self.assertEqual(grid.values[0], 6)
        self.assertEqual(grid.values[-1], 99)
        self.assertEqual(grid.q, 32)

    def test_short_series_uses_twice_p(self):
        self.assertEqual(dof_upper_bound(30, 10), 60)
        self.assertEqual(dof_grid(30, 10, 3), dof_grid(30, 40, 3))

    def test_values_increase_within_bound(self):
        for p, t_ori, delta in [(5, 50, 2), (12, 30, 4), (7, 7, 1)]:
            grid = dof_grid(p, t_ori, delta)
            self.assertTrue(all(a < b for a, b in zip(grid.values, grid.values[1:])))
            self.assertLessEqual(grid.values[-1], max(2 * p, t_ori))

    def test_empty_grid(self):
        with self.assertRaises(EmptyDofGridError) as ctx:
            dof_grid(2, 5, 3)
        self.assertIn("t_ori", str(ctx.exception))

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            dof_grid(0, 10, 3)
        with self.assertRaises(DomainError):
            dof_grid(3, 10, 0)

    def test_upper_bound_value(self):
        grid = dof_grid(30, 40, 3)
        self.assertEqual(grid.upper_bound_value(60), 59)
        self.assertEqual(grid.upper_bound_value(40), 38)
        self.assertEqual(grid.upper_bound_value(10), 35)
        self.assertIn(41, grid)
        self.assertNotIn(40, grid)


if __name__ == '__main__':
    # Run tests
    unittest.main(verbosity=2)
