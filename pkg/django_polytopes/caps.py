"""Spherical caps: parametrisations, exact surface area, angle bounds and equal-area cap packings."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from django_polytopes.conf import lab_setting
from django_polytopes.exceptions import InvalidArgument, PackingFailure
from django_polytopes.sphere import as_generator, ball_volume, gaussian_directions, householder_complement, sphere_area

logger = logging.getLogger("django_polytopes.caps")

ANGLE_XTOL = 1e-12
PACKING_BATCH = 512


def _pole(n):
    center = np.zeros(n)
    center[0] = 1.0
    return center


@dataclass(frozen=True)
class Cap:
    """
    The cap {x in S^{n-1} : <x, center> >= offset}.

    The offset p, height 1 - p, polar angle arccos p and area fraction are interchangeable
    descriptions of the same cap.
    """

    dim: int
    center: np.ndarray
    offset: float

    def __post_init__(self):
        if not -1.0 <= self.offset <= 1.0:
            raise InvalidArgument(f"Cap offset must lie in [-1, 1], got {self.offset}")
        center = np.asarray(self.center, dtype=float)
        if center.shape != (self.dim,) or abs(np.linalg.norm(center) - 1.0) > 1e-12:
            raise InvalidArgument("Cap center must be a unit vector of the cap dimension")
        object.__setattr__(self, "center", center)

    @property
    def height(self):
        return 1.0 - self.offset

    @property
    def angle(self):
        return math.acos(self.offset)

    @property
    def radius(self):
        return math.sqrt(max(0.0, 1.0 - self.offset**2))

    @property
    def area(self):
        return cap_area(self.dim, self.offset)

    @property
    def fraction(self):
        return self.area / sphere_area(self.dim)

    def contains(self, points):
        return np.asarray(points, dtype=float) @ self.center >= self.offset


@dataclass(frozen=True)
class CapPacking:
    dim: int
    area_fraction_denominator: float
    caps: tuple
    delta: float

    def __len__(self):
        return len(self.caps)

    @property
    def centers(self):
        return np.array([cap.center for cap in self.caps])

    def min_center_angle(self):
        """Smallest angular distance between two cap centres (pi for a single cap)."""
        if len(self.caps) < 2:
            return math.pi
        gram = np.clip(self.centers @ self.centers.T, -1.0, 1.0)
        np.fill_diagonal(gram, -1.0)
        return float(np.arccos(gram.max()))

    def pairwise_disjoint(self):
        return self.min_center_angle() >= 2 * self.caps[0].angle - 1e-12

    def count_within_bounds(self):
        k = len(self.caps)
        return 3.0 ** (-self.dim) * self.area_fraction_denominator <= k <= self.area_fraction_denominator


def cap_area(n, p):
    """
    Surface area of the cap of S^{n-1} cut off at offset p.

    Closed form for n = 2 (2 arccos p) and n = 3 (2 pi (1 - p)); for larger n the
    integral |S^{n-2}| int_p^1 (1 - s^2)^{(n-3)/2} ds is the regularised incomplete Beta
    function I_{1-p^2}((n-1)/2, 1/2) times half the sphere.
    """
    if n < 2:
        raise InvalidArgument(f"Cap dimension must be at least 2, got {n}")
    if not -1.0 <= p <= 1.0:
        raise InvalidArgument(f"Cap offset must lie in [-1, 1], got {p}")
    if n == 2:
        return 2.0 * math.acos(p)
    if n == 3:
        return 2.0 * math.pi * (1.0 - p)
    half = sphere_area(n) / 2.0 * float(special.betainc((n - 1) / 2.0, 0.5, 1.0 - p * p))
    return half if p >= 0 else sphere_area(n) - half


def cap_area_bounds(n, p):
    """Projection bounds on the cap area for n >= 4 and 0 < p <= 1: (lower, lower / p)."""
    if n < 4:
        raise InvalidArgument(f"The projection bounds need n >= 4, got {n}")
    if not 0.0 < p <= 1.0:
        raise InvalidArgument(f"The projection bounds need 0 < p <= 1, got {p}")
    lower = (1.0 - p * p) ** ((n - 1) / 2.0) * ball_volume(n - 1)
    return lower, lower / p


def angle_for_area(n, area):
    """The polar angle of the cap of S^{n-1} with the given surface area."""
    total = sphere_area(n)
    if not 0.0 <= area <= total:
        raise InvalidArgument(f"Cap area must lie in [0, {total}], got {area}")
    if n == 2:
        return area / 2.0
    if area == 0.0:
        return 0.0
    if area == total:
        return math.pi
    return optimize.brentq(lambda phi: cap_area(n, math.cos(phi)) - area, 0.0, math.pi, xtol=ANGLE_XTOL)


def cap_angle_from_fraction(n, R):
    """
    The angle phi of the cap with area |S^{n-1}| / R, together with the two-sided bound

        c^{1/(n-1)} <= phi <= (pi/2)^{(n-2)/(n-1)} c^{1/(n-1)},  c = |S^{n-1}| / (R |B^{n-1}|).
    """
    if n < 2:
        raise InvalidArgument(f"Cap dimension must be at least 2, got {n}")
    if R < 2:
        raise InvalidArgument(f"The area fraction denominator must be at least 2, got {R}")
    phi = angle_for_area(n, sphere_area(n) / R)
    base = (sphere_area(n) / (R * ball_volume(n - 1))) ** (1.0 / (n - 1))
    return phi, base, (math.pi / 2.0) ** ((n - 2) / (n - 1)) * base


def cap_from(n, center=None, *, offset=None, height=None, angle=None, fraction=None):
    """
    Build a cap from exactly one of its parametrisations.

    >>> round(cap_from(3, height=0.5).area, 12) == round(math.pi, 12)
    True
    """
    given = [value is not None for value in (offset, height, angle, fraction)]
    if sum(given) != 1:
        raise InvalidArgument("Specify exactly one of offset, height, angle or fraction")
    center = _pole(n) if center is None else np.asarray(center, dtype=float)
    if height is not None:
        if not 0.0 <= height <= 2.0:
            raise InvalidArgument(f"Cap height must lie in [0, 2], got {height}")
        offset = 1.0 - height
    elif angle is not None:
        if not 0.0 <= angle <= math.pi:
            raise InvalidArgument(f"Cap angle must lie in [0, pi], got {angle}")
        offset = math.cos(angle)
    elif fraction is not None:
        if not 0.0 < fraction <= 1.0:
            raise InvalidArgument(f"Cap area fraction must lie in (0, 1], got {fraction}")
        offset = math.cos(angle_for_area(n, fraction * sphere_area(n)))
    elif not -1.0 <= offset <= 1.0:
        raise InvalidArgument(f"Cap offset must lie in [-1, 1], got {offset}")
    return Cap(n, center, float(np.clip(offset, -1.0, 1.0)))


def sample_cap(rng, cap, count):
    """
    Uniform points on a cap.

    The polar angle is drawn by inverting the cap-area function with the inverse regularised
    incomplete Beta function; the azimuthal direction is uniform in the base. Caps larger than
    a hemisphere are sampled by rejection from the whole sphere.
    """
    gen = as_generator(rng)
    n = cap.dim
    if cap.offset < 0:
        accepted = []
        total = 0
        while total < count:
            batch = gaussian_directions(gen, (2 * count, n))
            batch = batch[cap.contains(batch)]
            accepted.append(batch)
            total += len(batch)
        return np.concatenate(accepted)[:count]
    u = gen.random(count)
    if n == 2:
        alpha = u * cap.angle
        sin_alpha = np.sin(alpha)
    else:
        a = (n - 1) / 2.0
        top = special.betainc(a, 0.5, cap.radius**2)
        sin_sq = special.betaincinv(a, 0.5, u * top)
        sin_alpha = np.sqrt(sin_sq)
        alpha = np.arcsin(sin_alpha)
    basis = householder_complement(cap.center[np.newaxis])[0]
    azimuth = gaussian_directions(gen, (count, n - 1)) @ basis
    return np.cos(alpha)[:, None] * cap.center + sin_alpha[:, None] * azimuth


def _greedy_net(gen, n, delta, max_streak):
    # ||x - y|| >= delta  <=>  <x, y> <= 1 - delta^2 / 2
    threshold = 1.0 - delta * delta / 2.0
    accepted = np.empty((0, n))
    streak = 0
    while streak < max_streak:
        batch = gaussian_directions(gen, (PACKING_BATCH, n))
        if len(accepted):
            clear = (batch @ accepted.T).max(axis=1) <= threshold
        else:
            clear = np.ones(len(batch), dtype=bool)
        fresh = []
        for candidate, ok in zip(batch, clear):
            if ok and (not fresh or max(float(candidate @ other) for other in fresh) <= threshold):
                fresh.append(candidate)
                streak = 0
            else:
                streak += 1
                if streak >= max_streak:
                    break
        if fresh:
            accepted = np.vstack([accepted, np.array(fresh)])
    return accepted


def build_cap_packing(rng, n, R, max_streak=None, max_attempts=None):
    """
    Pack S^{n-1} with interior-disjoint caps of area |S^{n-1}| / R.

    The centres form a greedy maximal delta-net (random candidates, stop after ``max_streak``
    consecutive rejections) and the caps are the balls of radius delta / 2 around them. The
    count k is checked against 3^{-n} R <= k <= R; a construction that misses the window is
    retried on a fresh substream and ``PackingFailure`` is raised once attempts run out.
    """
    if n < 2:
        raise InvalidArgument(f"Cap dimension must be at least 2, got {n}")
    if R < 2:
        raise InvalidArgument(f"The area fraction denominator must be at least 2, got {R}")
    max_streak = max_streak or lab_setting("PACKING_REJECTION_STREAK")
    max_attempts = max_attempts or lab_setting("PACKING_MAX_ATTEMPTS")

    phi, _, _ = cap_angle_from_fraction(n, R)
    offset = math.cos(phi)
    # B(x, delta/2) ∩ S^{n-1} is the cap with offset 1 - delta^2 / 8
    delta = math.sqrt(8.0 * (1.0 - offset))

    for attempt in range(max_attempts):
        gen = as_generator(rng.child(attempt)) if hasattr(rng, "child") else as_generator(rng)
        centers = _greedy_net(gen, n, delta, max_streak)
        packing = CapPacking(n, R, tuple(Cap(n, c / np.linalg.norm(c), offset) for c in centers), delta)
        if packing.count_within_bounds() and packing.pairwise_disjoint():
            return packing
        logger.info("cap packing n=%s R=%s attempt %s gave %s caps, retrying", n, R, attempt, len(packing))
    raise PackingFailure(f"Could not build a packing with {3.0 ** -n * R:.3g} <= k <= {R} caps for n={n}")
