"""
Tests for the projection family and the moment-curve decomposition
"""

import math
import unittest

import numpy as np

from restricted_proj.errors import ContractViolation, Rejection
from restricted_proj.geometry import (
    ProjectionFamily,
    annulus_volume,
    factor_map,
    make_rng,
    moment_expand,
    param_samples,
    project,
    sample_annulus,
    validate_family,
)
from restricted_proj.models import MomentVector, ParamVector, Point


class TestProject(unittest.TestCase):
    """Test cases for π_t and f_t"""

    def setUp(self):
        self.standard4 = ProjectionFamily.standard(4)

    def test_zero_parameter_keeps_r1(self):
        """π_0(X) = r1 for any family"""
        fam = ProjectionFamily([[2.0, 1.0], [0.0, 3.0]], [[1.0, 0.2], [0.2, 2.0]])
        self.assertEqual(project(fam, [0.0, 0.0], [0.3, 5.0, -7.0, 0.9]), 0.3)
        np.testing.assert_array_equal(factor_map(fam, [0.0, 0.0], [0.3, 5.0, -7.0, 0.9]), [0.3, 0.0, 0.0])

    def test_standard_family_hand_value(self):
        """n=4, q_st, t=(1,1), X=(2,(3,4),5) gives 14"""
        X = Point(r1=2.0, w=(3.0, 4.0), r2=5.0)
        self.assertEqual(project(self.standard4, ParamVector(t=(1.0, 1.0)), X), 14.0)
        np.testing.assert_array_equal(factor_map(self.standard4, [1.0, 1.0], X), [2.0, 7.0, 5.0])

    def test_scalar_family_hand_value(self):
        """n=3, L=1, q(t)=t², t=2, X=(1,3,1) gives 11"""
        fam = ProjectionFamily(1.0, 1.0)
        self.assertEqual(project(fam, 2.0, [1.0, 3.0, 1.0]), 11.0)

    def test_batch_matches_single(self):
        """An (N, n) array projects row by row"""
        rng = make_rng(3)
        points = rng.uniform(-0.5, 0.5, size=(20, 4))
        batch = project(self.standard4, [1.2, -0.4], points)
        self.assertEqual(batch.shape, (20,))
        for i in range(20):
            self.assertEqual(batch[i], project(self.standard4, [1.2, -0.4], points[i]))

    def test_batch_matches_single_high_dimension(self):
        """Batched and single evaluation agree exactly for long w blocks"""
        rng = make_rng(17)
        fam = ProjectionFamily(rng.uniform(-1.0, 1.0, size=(6, 6)) + 2.0 * np.eye(6), np.eye(6))
        points = rng.uniform(-0.5, 0.5, size=(500, 8))
        t = sample_annulus(6, 1, seed=5)[0]
        batch = project(fam, t, points)
        triples = factor_map(fam, t, points)
        for i in range(0, 500, 7):
            self.assertEqual(batch[i], project(fam, t, points[i]))
            np.testing.assert_array_equal(triples[i], factor_map(fam, t, points[i]))

    def test_dimension_mismatch(self):
        """Mismatched lengths raise a contract violation"""
        with self.assertRaises(ContractViolation):
            project(self.standard4, [1.0], [0.0, 1.0, 2.0, 3.0])
        with self.assertRaises(ContractViolation):
            factor_map(self.standard4, [1.0, 1.0], [0.0, 1.0, 2.0])
        with self.assertRaises(ValueError):
            project(self.standard4, [1.0, 1.0, 1.0], [0.0, 1.0, 2.0, 3.0])

    def test_decomposition_identity(self):
        """π_{st}(X) = (1, s, s²)·f_t(X) to rounding"""
        rng = make_rng(11)
        fam = ProjectionFamily([[1.0, 0.5], [-0.3, 2.0]], [[1.5, 0.1], [0.1, 0.7]])
        for _ in range(50):
            t = rng.uniform(-2.0, 2.0, size=2)
            X = rng.uniform(-1.0, 1.0, size=4)
            for s in (0.0, 0.5, 1.0, 1.7):
                lhs = project(fam, s * t, X)
                rhs = float(moment_expand(s) @ factor_map(fam, t, X))
                self.assertTrue(math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-12), (lhs, rhs))

    def test_difference_depends_on_displacement(self):
        """π_t(X) - π_t(X') only sees X - X'"""
        t = [0.7, 1.1]
        X = np.array([0.1, 0.2, 0.3, 0.4])
        Y = np.array([-0.2, 0.5, 0.0, 0.1])
        shift = np.array([0.05, -0.1, 0.2, 0.3])
        a = project(self.standard4, t, X) - project(self.standard4, t, Y)
        b = project(self.standard4, t, X + shift) - project(self.standard4, t, Y + shift)
        self.assertAlmostEqual(a, b, places=12)


class TestMomentExpand(unittest.TestCase):
    """Test cases for moment_expand"""

    def test_values(self):
        """(1, s, s²) at s = 0, 1, 2"""
        np.testing.assert_array_equal(moment_expand(0.0), [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(moment_expand(MomentVector(s=1.0)), [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(moment_expand(2.0), [1.0, 2.0, 4.0])

    def test_moment_vector_range(self):
        """s outside [0, 2] is rejected by the model"""
        with self.assertRaises(ValueError):
            MomentVector(s=2.5)


class TestValidateFamily(unittest.TestCase):
    """Test cases for validate_family"""

    def test_standard_family(self):
        """(id, q_st) is valid with q_min = 0.5"""
        report = validate_family(ProjectionFamily.standard(5))
        self.assertTrue(report.valid)
        self.assertAlmostEqual(report.q_min, 0.5)
        self.assertAlmostEqual(report.l_norm, 1.0)
        self.assertEqual(report.failures, [])

    def test_singular_l(self):
        """A zero L is singular"""
        report = validate_family(ProjectionFamily(np.zeros((2, 2)), np.eye(2)))
        self.assertFalse(report.valid)
        self.assertTrue(any("singular" in f for f in report.failures))

    def test_indefinite_q(self):
        """A negative eigenvalue makes q invalid"""
        fam = ProjectionFamily(np.eye(2), [[1.0, 0.0], [0.0, -1.0]])
        report = validate_family(fam)
        self.assertFalse(report.valid)
        self.assertTrue(any("positive definite" in f for f in report.failures))
        with self.assertRaises(Rejection):
            fam.require_valid()

    def test_asymmetric_q(self):
        """Q must be symmetric"""
        with self.assertRaises(ContractViolation):
            ProjectionFamily(np.eye(2), [[1.0, 0.5], [0.0, 1.0]])

    def test_standard_needs_n_three(self):
        with self.assertRaises(ContractViolation):
            ProjectionFamily.standard(2)


class TestAnnulus(unittest.TestCase):
    """Test cases for the parameter annulus B"""

    def test_membership_is_closed(self):
        """‖t‖ = 1 and ‖t‖ = 2 belong to B"""
        self.assertTrue(ParamVector(t=(1.0,)).in_annulus())
        self.assertTrue(ParamVector(t=(0.0, 2.0)).in_annulus())
        self.assertFalse(ParamVector(t=(0.5, 0.5)).in_annulus())

    def test_volume(self):
        """|B| = 2 for m=1 and 3π for m=2"""
        self.assertAlmostEqual(annulus_volume(1), 2.0)
        self.assertAlmostEqual(annulus_volume(2), 3.0 * math.pi)

    def test_samples_inside_and_seeded(self):
        """Samples lie in B and repeat for a fixed seed"""
        a = sample_annulus(2, 500, seed=4)
        b = sample_annulus(2, 500, seed=4)
        self.assertEqual(a.shape, (500, 2))
        np.testing.assert_array_equal(a, b)
        norms = np.linalg.norm(a, axis=1)
        self.assertTrue(np.all((norms >= 1.0) & (norms <= 2.0)))

    def test_param_samples(self):
        """ParamVectors and arrays coerce to an (M, m) array"""
        arr = param_samples(1, [ParamVector(t=(1.5,)), 1.2])
        np.testing.assert_array_equal(arr, [[1.5], [1.2]])
        with self.assertRaises(Rejection):
            param_samples(1, [])
        with self.assertRaises(ContractViolation):
            param_samples(2, [[1.0]])


if __name__ == "__main__":
    unittest.main()
