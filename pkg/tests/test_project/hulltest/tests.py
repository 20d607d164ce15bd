"""Test the hull engines against each other, on exact fixtures and on degenerate input."""

import itertools
import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from django_polytopes import hull as hull_module
from django_polytopes.caps import cap_from, sample_cap
from django_polytopes.conf import HULL_METHODS
from django_polytopes.exceptions import DegenerateHull, InvalidArgument
from django_polytopes.hull import _FacetStore, convex_hull, facet_statistics
from django_polytopes.sphere import PointCloud, RngStream, sample_sphere


def vertex_sets(hull):
    return {facet.vertex_indices for facet in hull.facets}


def brute_force_facets(points, tol=1e-12):
    """Every n-subset whose plane has all the other points on one side."""
    count, n = points.shape
    subsets = np.array(list(itertools.combinations(range(count), n)))
    homogeneous = np.hstack([points, np.ones((count, 1))])
    planes = np.linalg.svd(homogeneous[subsets])[2][:, -1, :]
    heights = homogeneous @ planes.T
    facets = set()
    for column, subset in enumerate(subsets):
        others = np.delete(heights[:, column], subset)
        if np.all(others > -tol) or np.all(others < tol):
            facets.add(tuple(int(i) for i in subset))
    return facets


class HullTestCase(SimpleTestCase):
    def test_matches_qhull(self):
        for n, N in ((2, 25), (3, 60), (4, 30)):
            cloud = sample_sphere(RngStream(41, n), n, N)
            ours = convex_hull(cloud, method="beneath_beyond")
            reference = convex_hull(cloud, method="qhull")
            self.assertEqual(vertex_sets(ours), vertex_sets(reference))
            ours_volumes = sorted(f.volume for f in ours.facets)
            reference_volumes = sorted(f.volume for f in reference.facets)
            np.testing.assert_allclose(ours_volumes, reference_volumes, rtol=1e-9)

    def test_matches_brute_force(self):
        gen = np.random.default_rng(40)
        for index in range(500):
            n = int(gen.integers(2, 5))
            N = int(gen.integers(n + 2, 13))
            cloud = sample_sphere(RngStream(40, index), n, N)
            self.assertEqual(vertex_sets(convex_hull(cloud)), brute_force_facets(cloud.points), (n, N, index))

    def test_closed_surface(self):
        cloud = sample_sphere(RngStream(42), 3, 80)
        hull = convex_hull(cloud)
        # every point of a generic cloud on S^2 is a vertex, so Euler gives 2N - 4 facets
        self.assertEqual(len(hull), 2 * 80 - 4)
        self.assertTrue(all(count == 2 for count in hull.ridge_counts().values()))
        self.assertLessEqual(hull.max_violation(cloud.points), 1e-9)
        self.assertTrue(hull.contains_origin)
        for facet in hull.facets:
            self.assertAlmostEqual(float(np.linalg.norm(facet.normal)), 1.0, places=12)
            self.assertLessEqual(facet.offset, 1.0)

    def test_polygon(self):
        cloud = sample_sphere(RngStream(43), 2, 30)
        hull = convex_hull(cloud)
        self.assertEqual(len(hull), 30)
        perimeter = sum(f.volume for f in hull.facets)
        self.assertLess(perimeter, 2 * math.pi)
        self.assertGreater(perimeter, 6.0)

    def test_facet_statistics(self):
        hull = convex_hull(sample_sphere(RngStream(44), 3, 40))
        stats = facet_statistics(hull)
        volumes = [f.volume for f in hull.facets]
        self.assertEqual(stats.min_vol, min(volumes))
        self.assertEqual(stats.max_vol, max(volumes))
        self.assertAlmostEqual(stats.max_cap_height, 1.0 - stats.min_offset)
        self.assertGreater(stats.min_offset, 0.0)

    def test_cloud_inside_a_cap_misses_the_origin(self):
        points = sample_cap(RngStream(45), cap_from(3, offset=0.5), 20)
        hull = convex_hull(PointCloud(3, points))
        self.assertFalse(hull.degenerate)
        self.assertFalse(hull.contains_origin)
        self.assertLess(facet_statistics(hull).min_offset, 0.0)

    def test_degenerate_cloud(self):
        angles = np.linspace(0.0, 2 * math.pi, 10, endpoint=False)
        points = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(10)])
        hull = convex_hull(PointCloud(3, points))
        self.assertTrue(hull.degenerate)
        self.assertEqual(len(hull), 0)
        with self.assertRaises(DegenerateHull):
            facet_statistics(hull)

    def test_too_few_points(self):
        with self.assertRaises(InvalidArgument):
            convex_hull(sample_sphere(RngStream(46), 3, 3))

    def test_unknown_method(self):
        with self.assertRaises(InvalidArgument):
            convex_hull(sample_sphere(RngStream(47), 3, 10), method="gift_wrapping")

    @override_settings(POLYTOPES_HULL_METHOD="qhull")
    def test_method_setting(self):
        cloud = sample_sphere(RngStream(48), 3, 30)
        self.assertEqual(vertex_sets(convex_hull(cloud)), vertex_sets(convex_hull(cloud, method="beneath_beyond")))

    @override_settings(POLYTOPES_HULL_AUTO_POINTS=20)
    def test_auto_method_switches_on_cloud_size(self):
        with mock.patch("django_polytopes.hull._qhull", wraps=hull_module._qhull) as qhull:
            convex_hull(sample_sphere(RngStream(49), 3, 19), method="auto")
            self.assertFalse(qhull.called)
            convex_hull(sample_sphere(RngStream(49), 3, 20), method="auto")
            self.assertTrue(qhull.called)


class FixtureTestCase(SimpleTestCase):
    """Small polytopes whose facets are known exactly, built by every engine."""

    def hulls(self, dim, points):
        cloud = PointCloud(dim, np.array(points, dtype=float))
        for method in HULL_METHODS:
            with self.subTest(method=method):
                yield convex_hull(cloud, method=method)

    def test_square(self):
        for hull in self.hulls(2, [[1, 0], [0, 1], [-1, 0], [0, -1]]):
            self.assertEqual(len(hull), 4)
            for facet in hull.facets:
                self.assertAlmostEqual(facet.volume, math.sqrt(2), places=12)
                self.assertAlmostEqual(facet.offset, 1 / math.sqrt(2), places=12)
            self.assertTrue(hull.contains_origin)

    def test_octahedron(self):
        points = np.vstack([np.eye(3), -np.eye(3)])
        for hull in self.hulls(3, points):
            self.assertEqual(len(hull), 8)
            for facet in hull.facets:
                self.assertAlmostEqual(facet.volume, math.sqrt(3) / 2, places=12)
            stats = facet_statistics(hull)
            self.assertAlmostEqual(stats.max_cap_height, 1 - 1 / math.sqrt(3), places=12)
            self.assertEqual(f"{stats.max_cap_height:.4f}", "0.4226")

    def test_equilateral_triangle(self):
        angles = [0.0, 2 * math.pi / 3, 4 * math.pi / 3]
        points = [[math.cos(a), math.sin(a)] for a in angles]
        for hull in self.hulls(2, points):
            stats = facet_statistics(hull)
            np.testing.assert_allclose(tuple(stats), (math.sqrt(3), math.sqrt(3), 0.5, 0.5), atol=1e-12)


class FacetStoreTestCase(SimpleTestCase):
    def test_removed_facets_are_compacted(self):
        store = _FacetStore(2, capacity=2)
        normals = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        store.add([(0, 1), (1, 2), (2, 3), (0, 3)], normals, [0.1, 0.2, 0.3, 0.4])
        store.remove(np.array([1]))
        self.assertEqual(len(store), 4)
        store.remove(np.array([0, 3]))
        self.assertEqual(len(store), 1)
        self.assertEqual(store.vertices, [(2, 3)])
        np.testing.assert_array_equal(store.live_ids(), [0])
        np.testing.assert_array_equal(store.normals[0], [-1.0, 0.0])
        self.assertEqual(store.offsets[0], 0.3)

    def test_store_stays_small_during_a_build(self):
        cloud = sample_sphere(RngStream(50), 3, 400)
        sizes = []
        add = _FacetStore.add

        def recording_add(store, *args):
            add(store, *args)
            sizes.append((len(store), len(store.live_ids())))

        with mock.patch.object(_FacetStore, "add", recording_add):
            hull = convex_hull(cloud, method="beneath_beyond")
        self.assertEqual(len(hull), 2 * 400 - 4)
        # dead facets never outnumber live ones
        self.assertTrue(all(total <= 2 * live for total, live in sizes))
