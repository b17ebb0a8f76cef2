"""
Tests for the replication suite
"""

import math
import unittest
from unittest.mock import patch

import numpy as np

from restricted_proj.acceptance import CANTOR_ALPHA, CANTOR_RATIO, CHECKS, replicate_acceptance, slab_annulus_area


class TestAcceptance(unittest.TestCase):
    """Test cases for replicate_acceptance"""

    def test_constants(self):
        """Three pieces of ratio r give dimension log 2 / log 3"""
        self.assertAlmostEqual(math.log(3.0) / math.log(1.0 / CANTOR_RATIO), CANTOR_ALPHA, places=12)

    def test_slab_area(self):
        self.assertAlmostEqual(slab_annulus_area(0.1), 0.40033, places=4)
        self.assertLess(abs(slab_annulus_area(1e-4) / 1e-4 - 4.0), 1e-6)

    def test_quick_structural_checks(self):
        names = ["xi_identity", "decomposition", "ball_mass", "oracle_equivalence", "lie_structure"]
        results = replicate_acceptance(scale="quick", seed=0, only=names)
        self.assertEqual([r.name for r in results], names)
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")
            self.assertGreaterEqual(result.seconds, 0.0)

    def test_quick_statistical_checks(self):
        """The sampled checks pass at quick scale"""
        names = ["transversality", "energy_growth", "finitary_sweep", "degenerate_direction", "dimension_preservation"]
        results = replicate_acceptance(scale="quick", seed=0, only=names)
        self.assertEqual([r.name for r in results], names)
        for result in results:
            self.assertTrue(result.passed, f"{result.name}: {result.detail}")

    def test_transversality_full_scale(self):
        results = replicate_acceptance(scale="full", seed=0, only=["transversality"])
        self.assertTrue(results[0].passed, results[0].detail)

    def test_projection_that_keeps_r1_fails(self):
        """Sweep and dimension checks notice a π_t that drops w and r2"""

        def keep_r1(fam, t, X):
            return np.asarray(X, dtype=float)[..., 0]

        names = ["finitary_sweep", "dimension_preservation"]
        with patch("restricted_proj.projection.project", side_effect=keep_r1):
            results = replicate_acceptance(scale="quick", seed=0, only=names)
        self.assertEqual([r.name for r in results], names)
        for result in results:
            self.assertFalse(result.passed, f"{result.name}: {result.detail}")

    def test_suite_order(self):
        self.assertEqual(len(CHECKS), 10)
        results = replicate_acceptance(scale="quick", only=["lie_structure", "xi_identity"])
        self.assertEqual([r.name for r in results], ["xi_identity", "lie_structure"])

    def test_unknown_arguments(self):
        with self.assertRaises(ValueError):
            replicate_acceptance(scale="huge")
        with self.assertRaises(ValueError):
            replicate_acceptance(only=["no_such_check"])


if __name__ == "__main__":
    unittest.main()
