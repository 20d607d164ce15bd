"""
Monte-Carlo estimates of the cap events behind the extremal facet bounds.

Both events need the section aff(xi_1..xi_n) ∩ S^{n-1} to lie inside a fixed cap C centred at e_1,
which forces every xi_i into C. The estimators therefore draw the n-tuples uniformly from C and
multiply the hit frequency by (|C| / |S^{n-1}|)^n.
"""

import logging
import math

import numpy as np

from django_polytopes.bounds import large_facet_event_bounds, small_facet_event_bounds, vol_rn
from django_polytopes.caps import cap_from, sample_cap
from django_polytopes.exceptions import InvalidArgument
from django_polytopes.reports import BoundReport
from django_polytopes.simplex_law import estimate_moment, miles_expected_volume
from django_polytopes.sphere import hyperplanes_through, simplex_volumes
from django_polytopes.workers import run_sharded

logger = logging.getLogger("django_polytopes.events")

MOMENT_STREAM = 2_000_003
MOMENT_SAMPLES = 200_000
SMALL_FACET_DIMS = (3, 4, 5)


def section_inside_cap(normals, offsets, cap):
    """
    Whether the cap cut off by each plane lies in ``cap``: angle(normal, centre) + arccos(offset) <= cap angle.

    The comparison is closed, so a section touching the boundary of ``cap`` counts as inside.
    """
    tilt = np.arccos(np.clip(normals @ cap.center, -1.0, 1.0))
    return tilt + np.arccos(np.clip(offsets, -1.0, 1.0)) <= cap.angle


def _tuples_in_cap(gen, cap, size):
    n = cap.dim
    tuples = sample_cap(gen, cap, size * n).reshape(size, n, n)
    normals, offsets = hyperplanes_through(tuples)
    return normals, offsets, simplex_volumes(tuples)


def _estimate(rng, cap, trials, hit, threads):
    hits = np.concatenate(run_sharded(rng, trials, lambda gen, size: hit(*_tuples_in_cap(gen, cap, size)), threads))
    count = int(hits.sum())
    frequency = count / trials
    scale = cap.fraction**cap.dim
    stderr = math.sqrt(frequency * (1 - frequency) / trials)
    return count, scale * frequency, scale * stderr


def estimate_event_H(rng, n, R, trials, v1=None, v2=None, threads=None):
    """
    Probability that n uniform points span a section inside a cap of area |S^{n-1}| / R with a large simplex.

    "Large" means volume >= vol_rn(n, R). ``v1`` defaults to Miles' formula for the section simplex,
    ``v2`` to a Monte-Carlo estimate on a dedicated substream. Zero hits give an inconclusive report.
    """
    if n < 3:
        raise InvalidArgument(f"The large-facet cap event needs n >= 3, got {n}")
    if R < math.pi**n * n:
        raise InvalidArgument(f"R must be at least pi^n n = {math.pi**n * n:.4g}, got {R}")
    v1 = miles_expected_volume(n - 1) if v1 is None else v1
    if v2 is None:
        moment_rng = rng.child(MOMENT_STREAM) if hasattr(rng, "child") else rng
        v2 = estimate_moment(moment_rng, n - 1, 2, MOMENT_SAMPLES, threads).value
    cap = cap_from(n, fraction=1.0 / R)
    threshold = vol_rn(n, R, v1)

    def hit(normals, offsets, volumes):
        return section_inside_cap(normals, offsets, cap) & (volumes >= threshold)

    count, estimate, stderr = _estimate(rng, cap, trials, hit, threads)
    lower, upper = large_facet_event_bounds(n, R, v1, v2)
    logger.info("large-facet cap event n=%s R=%.4g: %s hits in %s tuples", n, R, count, trials)
    return BoundReport(
        "large_facet_cap_event",
        {"n": n, "R": R, "trials": trials},
        upper,
        estimate,
        stderr,
        side="sandwich",
        lower_value=lower,
        inconclusive=count == 0,
        note="no accepted tuples" if count == 0 else "",
    )


def estimate_event_Htilde(rng, n, N, t, trials, threads=None):
    """
    Probability that n uniform points span a section inside a cap of area |S^{n-1}| / N with a small simplex.

    "Small" means volume <= t (1 - q^2)^{(n-1)/2}, q the distance of the plane from the origin.
    """
    if n not in SMALL_FACET_DIMS:
        raise InvalidArgument(f"The small-facet cap event is estimated for n in {SMALL_FACET_DIMS}, got {n}")
    if t < 0:
        raise InvalidArgument(f"t must be non-negative, got {t}")
    cap = cap_from(n, fraction=1.0 / N)

    def hit(normals, offsets, volumes):
        limit = t * np.clip(1.0 - offsets**2, 0.0, None) ** ((n - 1) / 2)
        return section_inside_cap(normals, offsets, cap) & (volumes <= limit)

    count, estimate, stderr = _estimate(rng, cap, trials, hit, threads)
    lower, upper = small_facet_event_bounds(n, N, t)
    logger.info("small-facet cap event n=%s N=%s t=%.4g: %s hits in %s tuples", n, N, t, count, trials)
    return BoundReport(
        "small_facet_cap_event",
        {"n": n, "N": N, "t": t, "trials": trials},
        upper,
        estimate,
        stderr,
        side="sandwich",
        lower_value=lower,
        inconclusive=count == 0 and t > 0,
        note="no accepted tuples" if count == 0 and t > 0 else "",
    )
