"""Seeded sampling on the unit sphere, simplex geometry and the special functions used by the analytic formulas."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from django_polytopes.conf import lab_setting
from django_polytopes.exceptions import DegenerateSimplex, InvalidArgument

MAX_DIM = 10
NORM_TOL = 1e-12
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """
    A reproducible random stream.

    The generator is a counter-based Philox keyed by a ``SeedSequence`` built from the
    (masked) 64-bit master seed, with ``(stream_index, *substream)`` as the spawn key. Two
    streams with the same key always replay the same sequence; distinct keys give
    independent streams.
    """

    master_seed: int
    stream_index: int = 0
    substream: tuple = field(default=())

    def generator(self):
        seq = np.random.SeedSequence(entropy=self.master_seed & SEED_MASK, spawn_key=(self.stream_index, *self.substream))
        return np.random.Generator(np.random.Philox(seq))

    def child(self, index):
        return RngStream(self.master_seed, self.stream_index, (*self.substream, index))


def as_generator(rng):
    """Accept either an ``RngStream`` or an already running ``numpy.random.Generator``."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidArgument(f"Expected an RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class PointCloud:
    dim: int
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise InvalidArgument(f"Point array of shape {points.shape} does not match dimension {self.dim}")
        if len(points) < 1:
            raise InvalidArgument("A point cloud needs at least one point")
        deviation = np.max(np.abs(np.linalg.norm(points, axis=1) - 1.0))
        if deviation > NORM_TOL:
            raise InvalidArgument(f"Points are not on the unit sphere (max norm deviation {deviation:.3g})")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Hyperplane:
    normal: np.ndarray
    offset: float

    def signed_distance(self, points):
        return np.asarray(points, dtype=float) @ self.normal - self.offset


def _check_dim(n):
    if n < 2 or n > MAX_DIM:
        raise InvalidArgument(f"Dimension must be between 2 and {MAX_DIM}, got {n}")


def sample_sphere(rng, n, count):
    """
    Draw ``count`` i.i.d. uniform points on S^{n-1} as normalised standard Gaussian vectors.

    >>> cloud = sample_sphere(RngStream(1), 3, 5)
    >>> len(cloud), cloud.dim
    (5, 3)
    """
    _check_dim(n)
    if count < 1:
        raise InvalidArgument(f"count must be at least 1, got {count}")
    return PointCloud(n, gaussian_directions(as_generator(rng), (count, n)))


def gaussian_directions(gen, shape):
    """Uniform unit vectors along the last axis of ``shape``."""
    g = gen.standard_normal(shape)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def simplex_volume(points):
    """
    The (k-1)-volume of the simplex spanned by k points, via the Gram determinant of the edge matrix.

    >>> round(simplex_volume(np.eye(3)), 12) == round(math.sqrt(3) / 2, 12)
    True
    """
    points = np.asarray(points, dtype=float)
    k, n = points.shape
    if k < 2 or k > n + 1:
        raise InvalidArgument(f"Need between 2 and {n + 1} points in R^{n}, got {k}")
    return float(simplex_volumes(points[np.newaxis])[0])


def simplex_volumes(batch):
    """Vectorised ``simplex_volume`` over an array of shape (M, k, n)."""
    batch = np.asarray(batch, dtype=float)
    edges = batch[:, 1:, :] - batch[:, :1, :]
    gram = edges @ np.swapaxes(edges, 1, 2)
    det = np.clip(np.linalg.det(gram), 0.0, None)
    return np.sqrt(det) / math.factorial(batch.shape[1] - 1)


def _null_normals(batch):
    edges = batch[:, 1:, :] - batch[:, :1, :]
    # The last right-singular vector spans the orthogonal complement of the edges.
    _, _, vt = np.linalg.svd(edges)
    normals = vt[:, -1, :]
    offsets = np.einsum("mj,mj->m", normals, batch.mean(axis=1))
    flip = offsets < 0
    normals[flip] *= -1.0
    offsets[flip] *= -1.0
    return normals, offsets


def hyperplane_through(points):
    """
    The hyperplane through n affinely independent points of R^n, oriented so that its offset is non-negative.

    Raises ``DegenerateSimplex`` when the points span less than a hyperplane.
    """
    points = np.asarray(points, dtype=float)
    k, n = points.shape
    if k != n:
        raise InvalidArgument(f"A hyperplane in R^{n} needs exactly {n} points, got {k}")
    if simplex_volume(points) <= lab_setting("DEGENERACY_TOL"):
        raise DegenerateSimplex("Points are affinely dependent")
    normals, offsets = _null_normals(points[np.newaxis])
    return Hyperplane(normals[0], float(offsets[0]))


def hyperplanes_through(batch):
    """Vectorised ``hyperplane_through`` over (M, n, n); degenerate rows are not rejected."""
    return _null_normals(np.asarray(batch, dtype=float))


def householder_complement(theta):
    """
    Orthonormal bases of the complements of unit vectors.

    ``theta`` has shape (M, n); the result has shape (M, n - 1, n) and its rows span theta-perp.
    """
    theta = np.asarray(theta, dtype=float)
    m, n = theta.shape
    sign = np.where(theta[:, 0] >= 0, 1.0, -1.0)
    v = theta.copy()
    v[:, 0] += sign
    reflector = np.eye(n)[np.newaxis] - 2.0 * np.einsum("mi,mj->mij", v, v) / np.einsum("mi,mi->m", v, v)[:, None, None]
    # The reflector maps e_1 to -sign * theta, so its remaining columns span theta-perp.
    return np.swapaxes(reflector[:, :, 1:], 1, 2)


def sample_sections(gen, theta, offsets, count):
    """
    Uniform points on the sections H(theta, p) ∩ S^{n-1}.

    Returns an array (M, count, n): for each of the M planes, ``count`` points of the
    (n-2)-sphere of radius sqrt(1 - p^2) centred at p * theta.
    """
    theta = np.asarray(theta, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    m, n = theta.shape
    basis = householder_complement(theta)
    local = gaussian_directions(gen, (m, count, n - 1))
    radius = np.sqrt(np.clip(1.0 - offsets**2, 0.0, None))
    return radius[:, None, None] * (local @ basis) + offsets[:, None, None] * theta[:, None, :]


def ln_gamma(x):
    if x <= 0:
        raise InvalidArgument(f"ln_gamma needs a positive argument, got {x}")
    return float(special.gammaln(x))


def ln_factorial(k):
    return float(special.gammaln(k + 1))


def beta(x, y):
    if x <= 0 or y <= 0:
        raise InvalidArgument(f"beta needs positive arguments, got ({x}, {y})")
    return math.exp(special.betaln(x, y))


def ball_volume(n):
    """vol_n(B_2^n) = pi^{n/2} / Gamma(n/2 + 1)."""
    if n < 1:
        raise InvalidArgument(f"Dimension must be positive, got {n}")
    return math.exp(n / 2 * math.log(math.pi) - special.gammaln(n / 2 + 1))


def sphere_area(n):
    """vol_{n-1}(S^{n-1}) = n * vol_n(B_2^n)."""
    return n * ball_volume(n)
