"""
Tests for point clouds, ball counting, generators and box counting
"""

import math
import os
import tempfile
import unittest

import numpy as np

from restricted_proj.errors import Rejection
from restricted_proj.geometry import ProjectionFamily, make_rng, project
from restricted_proj.models import GeneratorSpec
from restricted_proj.pointcloud import (
    GridIndex,
    PointCloud,
    box_dimension,
    brute_force_count,
    count_in_ball,
    count_in_balls,
    dyadic_ladder,
    generate,
    is_dyadic,
    load_cloud,
    save_cloud,
    verify_regularity,
)


def _random_ball_points(rng, count, n=3, radius=0.4):
    directions = rng.normal(size=(count, n))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    radii = radius * rng.random(count) ** (1.0 / n)
    return directions * radii[:, None]


class TestPointCloud(unittest.TestCase):
    """Test cases for PointCloud construction"""

    def test_rejects_bad_clouds(self):
        """Every failed check is listed in the rejection"""
        with self.assertRaises(Rejection) as ctx:
            PointCloud(np.empty((0, 3)), delta0=0.5, claimed_alpha=1.0, claimed_C=1.0)
        self.assertIn("cloud is empty", ctx.exception.failures)

        with self.assertRaises(Rejection) as ctx:
            PointCloud([[0.0, 0.0, 0.0]], delta0=0.3, claimed_alpha=1.5, claimed_C=0.5)
        self.assertEqual(len(ctx.exception.failures), 3)

        with self.assertRaises(Rejection):
            PointCloud([[1.0, 1.0, 0.0]], delta0=0.5, claimed_alpha=1.0, claimed_C=1.0)

        with self.assertRaises(Rejection):
            PointCloud([[0.6, 0.0, 0.0], [-0.6, 0.0, 0.0]], delta0=0.5, claimed_alpha=1.0, claimed_C=1.0)

    def test_properties(self):
        cloud = PointCloud([[0.1, 0.2, 0.3], [0.0, 0.0, 0.0]], delta0=2.0**-5, claimed_alpha=0.5, claimed_C=2.0)
        self.assertEqual(cloud.size, 2)
        self.assertEqual(cloud.n, 3)
        self.assertEqual(cloud.k0, 5)
        self.assertEqual(cloud.point(0).r2, 0.3)
        copy = cloud.with_claims(alpha=1.0)
        self.assertEqual(copy.claimed_alpha, 1.0)
        self.assertEqual(copy.claimed_C, 2.0)

    def test_dyadic_helpers(self):
        self.assertTrue(is_dyadic(2.0**-7))
        self.assertFalse(is_dyadic(0.3))
        self.assertFalse(is_dyadic(0.0))
        self.assertEqual(dyadic_ladder(2.0**-3), [0.125, 0.25, 0.5, 1.0])
        self.assertEqual(dyadic_ladder(2.0**-6, 2.0**-4), [2.0**-6, 2.0**-5, 2.0**-4])


class TestCounting(unittest.TestCase):
    """Test cases for count_in_ball and the grid index"""

    def test_singleton(self):
        """A singleton cloud counts its point at any radius"""
        cloud = PointCloud([[0.1, -0.2, 0.3]], delta0=1.0, claimed_alpha=1.0, claimed_C=1.0)
        for delta in (1e-9, 0.5, 1.0):
            self.assertEqual(count_in_ball(cloud, [0.1, -0.2, 0.3], delta), 1)

    def test_grid_window(self):
        """The grid {0, δ0, ..., 1} holds 7 points within 3.5δ0 of 0.5"""
        cloud = generate(GeneratorSpec(kind="finite_grid", k0=6))
        delta0 = 2.0**-6
        self.assertEqual(cloud.size, 65)
        self.assertEqual(count_in_ball(cloud, [0.5, 0.0, 0.0], 3.5 * delta0), 7)
        index = GridIndex(cloud.points, 3.5 * delta0)
        self.assertEqual(index.count(np.array([0.5, 0.0, 0.0]), 3.5 * delta0), 7)

    def test_matches_brute_force(self):
        """Grid-indexed counts equal brute force"""
        rng = make_rng(2024)
        for trial in range(20):
            points = _random_ball_points(rng, 600)
            cloud = PointCloud(points, delta0=2.0**-10, claimed_alpha=1.0, claimed_C=1.0)
            delta = float(rng.choice([0.01, 0.05, 0.1, 0.3]))
            counts = count_in_balls(cloud, delta)
            for i in range(0, 600, 37):
                self.assertEqual(counts[i], brute_force_count(points, points[i], delta), (trial, i))
            center = rng.uniform(-0.4, 0.4, size=3)
            self.assertEqual(count_in_ball(cloud, center, delta), brute_force_count(points, center, delta))

    def test_small_clouds_match_brute_force(self):
        rng = make_rng(7)
        for _ in range(200):
            points = _random_ball_points(rng, 300)
            cloud = PointCloud(points, delta0=2.0**-10, claimed_alpha=1.0, claimed_C=1.0)
            index = GridIndex(points, 0.08)
            center = points[int(rng.integers(300))]
            expected = brute_force_count(points, center, 0.08)
            self.assertEqual(count_in_ball(cloud, center, 0.08), expected)
            self.assertEqual(index.count(center, 0.08), expected)


class TestRegularity(unittest.TestCase):
    """Test cases for verify_regularity"""

    def test_uniform_segment(self):
        """A spaced segment is 1-regular with C <= 4"""
        cloud = generate(GeneratorSpec(kind="uniform_segment", size=1024))
        report = verify_regularity(cloud)
        self.assertTrue(report.passed)
        self.assertLessEqual(report.worst_ratio, 3.0 + 1e-9)
        self.assertLessEqual(cloud.claimed_C, 4.0)
        self.assertEqual(len(report.per_scale_table), 11)

    def test_singleton(self):
        """The single scale δ=1 gives ratio 1"""
        cloud = PointCloud([[0.0, 0.0, 0.0]], delta0=1.0, claimed_alpha=0.3, claimed_C=1.0)
        report = verify_regularity(cloud)
        self.assertEqual(report.worst_ratio, 1.0)
        self.assertTrue(report.passed)
        self.assertEqual(report.witnessing_pair, (0, 1.0))

    def test_middle_thirds_bounded(self):
        """Cantor levels 6..10 stay below a fixed constant"""
        for level in range(6, 11):
            cloud = generate(GeneratorSpec(kind="cantor_product", branches=2, ratio=1.0 / 3.0, level=level))
            report = verify_regularity(cloud)
            self.assertTrue(report.passed, level)
            self.assertLessEqual(report.worst_ratio, 8.0)

    def test_subsample_is_recorded(self):
        cloud = generate(GeneratorSpec(kind="uniform_segment", size=600))
        report = verify_regularity(cloud, subsample_above=100, seed=5)
        self.assertEqual(report.subsample_size, 100)
        self.assertEqual(report.subsample_seed, 5)
        self.assertTrue(report.passed)


class TestGenerators(unittest.TestCase):
    """Test cases for generate"""

    def test_claimed_alpha(self):
        segment = generate(GeneratorSpec(kind="uniform_segment", size=1024))
        self.assertEqual(segment.claimed_alpha, 1.0)
        cantor = generate(GeneratorSpec(kind="cantor_product", ratio=1.0 / 3.0, level=8))
        self.assertAlmostEqual(cantor.claimed_alpha, math.log(2) / math.log(3), places=12)
        self.assertEqual(cantor.size, 256)

    def test_cantor_along_direction(self):
        """A one-coordinate Cantor set laid on a line keeps its distances"""
        axis = generate(GeneratorSpec(kind="cantor_product", branches=3, ratio=0.2, level=4))
        line = generate(GeneratorSpec(kind="cantor_product", branches=3, ratio=0.2, level=4, direction=[0.0, 3.0, 4.0]))
        self.assertEqual(line.size, 81)
        self.assertEqual(line.delta0, axis.delta0)
        self.assertEqual(line.claimed_C, axis.claimed_C)
        np.testing.assert_array_equal(line.points[:, 0], np.zeros(81))
        np.testing.assert_allclose(line.points[:, 1:], axis.points[:, :1] * np.array([[0.6, 0.8]]), atol=1e-15)
        with self.assertRaises(Rejection):
            generate(GeneratorSpec(kind="cantor_product", coordinates=[0, 1], direction=[0.0, 1.0, 0.0]))
        with self.assertRaises(Rejection):
            generate(GeneratorSpec(kind="cantor_product", direction=[1.0, 0.0]))

    def test_kernel_hyperplane_projects_to_c(self):
        """π_{t0} collapses the cloud to c"""
        fam = ProjectionFamily.standard(4)
        for c in (0.0, 0.25):
            cloud = generate(GeneratorSpec(kind="kernel_hyperplane", n=4, t0=[1.0, 0.5], c=c, size=800), seed=1)
            values = project(fam, [1.0, 0.5], cloud.points)
            self.assertLess(float(np.max(np.abs(values - c))), 1e-12)
            image = box_dimension(values, fit_range=(2.0**-10, 2.0**-2))
            self.assertLess(abs(image.slope), 0.01)

    def test_alpha_regular_random(self):
        spec = GeneratorSpec(kind="alpha_regular_random", target_alpha=0.5, size=256)
        a = generate(spec, seed=3)
        b = generate(spec, seed=3)
        c = generate(spec, seed=4)
        np.testing.assert_array_equal(a.points, b.points)
        self.assertFalse(np.array_equal(a.points, c.points))
        self.assertEqual(a.size, 256)
        self.assertTrue(verify_regularity(a).passed)

    def test_invalid_parameters(self):
        """Bad generator parameters raise a structured rejection"""
        with self.assertRaises(Rejection):
            generate(GeneratorSpec(kind="cantor_product", ratio=0.6, branches=2))
        with self.assertRaises(Rejection):
            generate(GeneratorSpec(kind="uniform_segment"))
        with self.assertRaises(Rejection):
            generate(GeneratorSpec(kind="kernel_hyperplane", t0=[1.0, 1.0]))
        with self.assertRaises(Rejection):
            generate(GeneratorSpec(kind="alpha_regular_random"))
        with self.assertRaises(Rejection):
            generate(GeneratorSpec(kind="finite_grid", coordinates=[0, 7]))


class TestBoxDimension(unittest.TestCase):
    """Test cases for box_dimension"""

    def test_uniform_samples(self):
        values = make_rng(0).uniform(0.0, 1.0, size=4096)
        estimate = box_dimension(values, delta0=2.0**-12)
        self.assertAlmostEqual(estimate.slope, 1.0, delta=0.05)
        self.assertEqual(estimate.fit_range, (2.0**-10, 0.25))

    def test_middle_thirds(self):
        cloud = generate(GeneratorSpec(kind="cantor_product", ratio=1.0 / 3.0, level=10))
        estimate = box_dimension(cloud.points[:, 0], fit_range=(2.0**-14, 2.0**-2))
        self.assertAlmostEqual(estimate.slope, math.log(2) / math.log(3), delta=0.05)

    def test_repeated_value(self):
        estimate = box_dimension(np.full(100, 0.3), delta0=2.0**-10)
        self.assertAlmostEqual(estimate.slope, 0.0, delta=0.01)

    def test_permutation_invariance(self):
        rng = make_rng(1)
        points = rng.uniform(-0.3, 0.3, size=(2000, 3))
        a = box_dimension(points, fit_range=(2.0**-9, 2.0**-2))
        b = box_dimension(points[rng.permutation(2000)], fit_range=(2.0**-9, 2.0**-2))
        self.assertEqual(a.slope, b.slope)

    def test_too_few_scales(self):
        with self.assertRaises(Rejection):
            box_dimension([0.1, 0.2], fit_range=(0.25, 1.0))
        with self.assertRaises(Rejection):
            box_dimension([0.1, 0.2])
        with self.assertRaises(Rejection):
            box_dimension([0.1, 0.2], fit_range=(2.0**-8, 0.25), delta0=2.0**-6)


class TestSerialization(unittest.TestCase):
    """Test cases for save_cloud and load_cloud"""

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_round_trip(self):
        """Text files keep every coordinate and claim"""
        cloud = generate(GeneratorSpec(kind="alpha_regular_random", target_alpha=0.7, size=64), seed=9)
        path = save_cloud(cloud, os.path.join(self.tmpdir.name, "cloud.txt"))
        with open(path) as f:
            header = f.readline().split()
        self.assertEqual(header[0], "3")
        self.assertEqual(header[-1], "64")
        loaded = load_cloud(path)
        np.testing.assert_array_equal(loaded.points, cloud.points)
        self.assertEqual(loaded.delta0, cloud.delta0)
        self.assertEqual(loaded.claimed_alpha, cloud.claimed_alpha)
        self.assertEqual(loaded.claimed_C, cloud.claimed_C)

    def test_bad_header(self):
        path = os.path.join(self.tmpdir.name, "bad.txt")
        with open(path, "w") as f:
            f.write("3 0.5\n0 0 0\n")
        with self.assertRaises(Rejection):
            load_cloud(path)


if __name__ == "__main__":
    unittest.main()
