"""Facet enumeration of the convex hull of points on the sphere."""

import collections
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from django_polytopes.conf import HULL_METHODS, lab_setting
from django_polytopes.exceptions import DegenerateHull, InvalidArgument
from django_polytopes.sphere import simplex_volumes

logger = logging.getLogger("django_polytopes.hull")

MAX_HULL_DIM = 6

FacetStatistics = collections.namedtuple("FacetStatistics", "min_vol,max_vol,max_cap_height,min_offset")


@dataclass(frozen=True)
class Facet:
    vertex_indices: tuple
    normal: np.ndarray
    offset: float
    volume: float

    @property
    def cap_height(self):
        return 1.0 - self.offset


@dataclass(frozen=True)
class HullResult:
    dim: int
    facets: tuple
    contains_origin: bool
    degenerate: bool

    def __len__(self):
        return len(self.facets)

    def ridge_counts(self):
        """How many facets share each (n-2)-face; a closed hull has every count equal to 2."""
        counts = collections.Counter()
        for facet in self.facets:
            counts.update(itertools.combinations(facet.vertex_indices, self.dim - 1))
        return counts

    def max_violation(self, points):
        """Largest amount by which any point sits outside any facet plane."""
        if not self.facets:
            return 0.0
        normals = np.array([f.normal for f in self.facets])
        offsets = np.array([f.offset for f in self.facets])
        return float((np.asarray(points) @ normals.T - offsets).max())


class _FacetStore:
    """
    Growable arrays holding the current facets of an incremental hull.

    Removed facets are only flagged; once they outnumber the live ones the arrays are compacted,
    which renumbers the facets. Ids are therefore only valid between two calls to :meth:`remove`.
    """

    def __init__(self, n, capacity=64):
        self.n = n
        self.vertices = []
        self.normals = np.empty((capacity, n))
        self.offsets = np.empty(capacity)
        self.alive = np.zeros(capacity, dtype=bool)
        self.dead = 0

    def __len__(self):
        return len(self.vertices)

    def add(self, vertices, normals, offsets):
        size = len(self.vertices)
        needed = size + len(vertices)
        if needed > len(self.offsets):
            capacity = max(needed, 2 * len(self.offsets))
            self.normals = np.resize(self.normals, (capacity, self.n))
            self.offsets = np.resize(self.offsets, capacity)
            alive = np.zeros(capacity, dtype=bool)
            alive[:size] = self.alive[:size]
            self.alive = alive
        self.vertices.extend(vertices)
        self.normals[size:needed] = normals
        self.offsets[size:needed] = offsets
        self.alive[size:needed] = True

    def live_ids(self):
        return np.flatnonzero(self.alive[: len(self.vertices)])

    def remove(self, ids):
        self.alive[ids] = False
        self.dead += len(ids)
        if 2 * self.dead > len(self.vertices):
            self.compact()

    def compact(self):
        live = self.live_ids()
        count = len(live)
        self.vertices = [self.vertices[j] for j in live]
        self.normals[:count] = self.normals[live]
        self.offsets[:count] = self.offsets[live]
        self.alive[:] = False
        self.alive[:count] = True
        self.dead = 0


def _oriented_planes(points, vertex_sets, interior):
    """Unit normals and offsets of the facet planes, oriented so that ``interior`` lies beneath."""
    batch = points[np.asarray(vertex_sets)]
    edges = batch[:, 1:, :] - batch[:, :1, :]
    _, _, vt = np.linalg.svd(edges)
    normals = vt[:, -1, :]
    offsets = np.einsum("mj,mj->m", normals, batch[:, 0, :])
    flip = normals @ interior - offsets > 0
    normals[flip] *= -1.0
    offsets[flip] *= -1.0
    return normals, offsets


def _exact_height(normal, offset, x):
    return math.fsum([*(normal * x), -offset])


def _initial_simplex(points, tol):
    """Greedily pick n + 1 affinely independent points, or None when all points lie on a hyperplane."""
    n = points.shape[1]
    chosen = [0]
    for _ in range(n):
        rel = points - points[chosen[0]]
        if len(chosen) > 1:
            q, _ = np.linalg.qr((points[chosen[1:]] - points[chosen[0]]).T)
            rel = rel - (rel @ q) @ q.T
        distance = np.linalg.norm(rel, axis=1)
        best = int(np.argmax(distance))
        if distance[best] <= tol:
            return None
        chosen.append(best)
    return chosen


def _beneath_beyond(points, tol):
    n = points.shape[1]
    simplex = _initial_simplex(points, lab_setting("DEGENERACY_TOL"))
    if simplex is None:
        return None
    interior = points[simplex].mean(axis=0)
    store = _FacetStore(n)
    faces = [tuple(sorted(face)) for face in itertools.combinations(simplex, n)]
    store.add(faces, *_oriented_planes(points, faces, interior))

    placed = set(simplex)
    for i in range(len(points)):
        if i in placed:
            continue
        x = points[i]
        live = store.live_ids()
        heights = store.normals[live] @ x - store.offsets[live]
        close = np.abs(heights) < 10 * tol
        for j in np.flatnonzero(close):
            heights[j] = _exact_height(store.normals[live[j]], store.offsets[live[j]], x)
        # points on a facet plane count as beneath it
        visible = live[heights > tol]
        if not len(visible):
            continue

        ridges = collections.Counter()
        for facet_id in visible:
            ridges.update(itertools.combinations(store.vertices[facet_id], n - 1))
        store.remove(visible)
        horizon = [ridge for ridge, count in ridges.items() if count == 1]
        faces = [tuple(sorted((*ridge, i))) for ridge in horizon]
        store.add(faces, *_oriented_planes(points, faces, interior))

    live = store.live_ids()
    return [store.vertices[j] for j in live], store.normals[live], store.offsets[live]


def _qhull(points):
    try:
        hull = ConvexHull(points)
    except QhullError:
        return None
    vertices = [tuple(sorted(int(v) for v in simplex)) for simplex in hull.simplices]
    # Qhull stores outward normals as a . x + b <= 0 inside
    return vertices, hull.equations[:, :-1].copy(), -hull.equations[:, -1]


def convex_hull(cloud, method=None):
    """
    Enumerate the facets of conv(cloud).

    ``beneath_beyond`` is an incremental construction: starting from a simplex of n + 1
    affinely independent points, each further point removes the facets it sees and cones
    the horizon ridges to itself. Visibility is the sign of the point's height over a facet
    plane (recomputed with compensated summation close to zero); points on a plane are kept
    beneath it. ``qhull`` delegates to ``scipy.spatial.ConvexHull``. ``auto``, the default,
    uses ``beneath_beyond`` below ``POLYTOPES_HULL_AUTO_POINTS`` points and ``qhull`` from there on.

    Outward normals are fixed by the interior point of the starting simplex, so a facet's
    signed offset is non-negative exactly when the origin lies on its inner side.
    """
    points = cloud.points
    count, n = points.shape
    if n > MAX_HULL_DIM:
        raise InvalidArgument(f"Hulls are supported up to dimension {MAX_HULL_DIM}, got {n}")
    if count < n + 1:
        raise InvalidArgument(f"A hull in R^{n} needs at least {n + 1} points, got {count}")
    method = method or lab_setting("HULL_METHOD")
    if method == "auto":
        method = "qhull" if count >= lab_setting("HULL_AUTO_POINTS") else "beneath_beyond"
    if method == "beneath_beyond":
        built = _beneath_beyond(points, lab_setting("ORIENTATION_TOL"))
    elif method == "qhull":
        built = _qhull(points)
    else:
        raise InvalidArgument(f"Unknown hull method {method!r}, expected one of {HULL_METHODS}")

    if built is None:
        logger.debug("degenerate hull for %s points in R^%s", count, n)
        return HullResult(n, (), False, True)

    vertices, normals, offsets = built
    volumes = simplex_volumes(points[np.asarray(vertices)])
    order = sorted(range(len(vertices)), key=vertices.__getitem__)
    facets = tuple(
        Facet(vertices[j], normals[j].copy(), float(offsets[j]), float(volumes[j])) for j in order
    )
    return HullResult(n, facets, bool(np.all(offsets > 0)), False)


def facet_statistics(hull):
    """
    Extremal facet volumes, the largest cap height (a lower bound on d_H(P_N, B^n)) and the smallest offset.
    """
    if hull.degenerate or not hull.facets:
        raise DegenerateHull("Facet statistics are undefined for a degenerate hull")
    volumes = [f.volume for f in hull.facets]
    offsets = [f.offset for f in hull.facets]
    return FacetStatistics(min(volumes), max(volumes), 1.0 - min(offsets), min(offsets))
