"""Test the volume laws of random inscribed simplices."""

import math
import unittest

import numpy as np
from django.test import SimpleTestCase

from django_polytopes.checks import SuiteOptions, run_suite
from django_polytopes.conf import lab_setting
from django_polytopes.exceptions import InvalidArgument, Unsupported
from django_polytopes.simplex_law import (
    cdf_bounds,
    draw_volumes,
    estimate_moment,
    lemma_a_n,
    lemma_b_n,
    miles_expected_volume,
    verify_blaschke_petkantschin,
    verify_cdf_sandwich,
    verify_second_moment_bound,
)
from django_polytopes.sphere import RngStream, ball_volume


class MilesTestCase(SimpleTestCase):
    def test_closed_form(self):
        # the mean area of a triangle inscribed in the unit circle is 3 / (2 pi)
        self.assertAlmostEqual(miles_expected_volume(2), 3 / (2 * math.pi), places=12)

    def test_dimension(self):
        with self.assertRaises(InvalidArgument):
            miles_expected_volume(1)

    def test_monte_carlo_mean(self):
        for n in (2, 3):
            estimate = estimate_moment(RngStream(51), n, 1, 200_000)
            self.assertLess(abs(estimate.value - miles_expected_volume(n)), 5 * estimate.stderr)

    def test_moment_needs_samples(self):
        with self.assertRaises(InvalidArgument):
            estimate_moment(RngStream(51), 3, 2, 100)
        with self.assertRaises(InvalidArgument):
            estimate_moment(RngStream(51), 3, 0, 10_000)

    def test_volumes_do_not_depend_on_threads(self):
        single = draw_volumes(RngStream(52), 3, 250_000, threads=1)
        pooled = draw_volumes(RngStream(52), 3, 250_000, threads=4)
        np.testing.assert_array_equal(single, pooled)

    def test_volumes_stay_below_the_regular_simplex(self):
        volumes = draw_volumes(RngStream(53), 2, 10_000)
        self.assertLessEqual(volumes.max(), 3 * math.sqrt(3) / 4 + 1e-12)
        self.assertGreaterEqual(volumes.min(), 0.0)


class CdfTestCase(SimpleTestCase):
    def test_linear_constants(self):
        self.assertAlmostEqual(lemma_b_n(3), 3 * math.pi, places=10)
        for n in (3, 4, 5):
            self.assertLess(lemma_a_n(n), lemma_b_n(n))
        with self.assertRaises(InvalidArgument):
            lemma_a_n(2)

    def test_bounds_shape(self):
        bounds = cdf_bounds(3, 0.01)
        self.assertAlmostEqual(bounds.upper, 0.03 * math.pi, places=10)
        self.assertAlmostEqual(bounds.lower, lemma_a_n(3) * 0.01, places=14)
        self.assertIsNone(cdf_bounds(3, ball_volume(3) + 0.1).lower)
        self.assertEqual(cdf_bounds(3, 10.0).upper, 1.0)
        self.assertEqual(cdf_bounds(2, 1.0).upper, 1.0)
        self.assertIsNone(cdf_bounds(2, 4.0).lower)
        with self.assertRaises(InvalidArgument):
            cdf_bounds(3, -1.0)

    def test_sandwich_holds(self):
        for n, grid in ((2, (0.01, 0.1, 1.0)), (3, (0.001, 0.01, 0.1))):
            reports = verify_cdf_sandwich(RngStream(54), n, grid, 200_000)
            self.assertEqual(len(reports), 3)
            for report in reports:
                self.assertEqual(report.status, "pass", report.to_dict())

    def test_second_moment_bound(self):
        for n in (2, 3, 4):
            report = verify_second_moment_bound(RngStream(55), n, 100_000)
            self.assertEqual(report.status, "pass", report.to_dict())


class BlaschkePetkantschinTestCase(SimpleTestCase):
    def test_constant_integrand(self):
        report = verify_blaschke_petkantschin(RngStream(56), 3, 200_000)
        self.assertAlmostEqual(report.bound_value / (4 * math.pi) ** 3, 1.0, places=12)
        self.assertEqual(report.status, "pass", report.to_dict())

    def test_planar_identity_is_unsupported(self):
        with self.assertRaises(Unsupported):
            verify_blaschke_petkantschin(RngStream(56), 2, 10_000)

    @unittest.skipUnless(lab_setting("SLOW_TESTS"), "acceptance-scale run")
    def test_volume_integrand(self):
        def volume(tuples):
            edges = tuples[:, 1:, :] - tuples[:, :1, :]
            return np.sqrt(np.clip(np.linalg.det(edges @ np.swapaxes(edges, 1, 2)), 0.0, None)) / 2

        report = verify_blaschke_petkantschin(RngStream(57), 3, 1_000_000, integrand=volume)
        self.assertEqual(report.status, "pass", report.to_dict())

    @unittest.skipUnless(lab_setting("SLOW_TESTS"), "acceptance-scale run")
    def test_simplex_and_bp_suites(self):
        for suite in ("simplex", "bp"):
            reports = run_suite(suite, 20240601, SuiteOptions())
            self.assertFalse([r.to_dict() for r in reports if r.status == "fail"])
