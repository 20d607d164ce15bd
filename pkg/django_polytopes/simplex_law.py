"""Volume laws of random simplices inscribed in the sphere."""

import collections
import logging
import math
from dataclasses import dataclass

import numpy as np

from django_polytopes.exceptions import InvalidArgument, Unsupported
from django_polytopes.reports import BoundReport
from django_polytopes.sphere import (
    ball_volume,
    gaussian_directions,
    ln_factorial,
    ln_gamma,
    sample_sections,
    simplex_volumes,
    sphere_area,
)
from django_polytopes.workers import run_sharded

logger = logging.getLogger("django_polytopes.simplex_law")

CdfBounds = collections.namedtuple("CdfBounds", "lower,upper")

N2_LOWER_EXPONENT = 2.0 / 3.0
N2_UPPER_CONSTANT = 342.0
LHS_STREAM = 1_000_003


@dataclass(frozen=True)
class MomentEstimate:
    k: int
    n: int
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class CdfBoundPair:
    """Constants of the distribution-function sandwich for the volume of a random inscribed simplex."""

    n: int
    a_n: float
    b_n: float

    def evaluate(self, t):
        if t < 0:
            raise InvalidArgument(f"Volume threshold must be non-negative, got {t}")
        if self.n == 2:
            lower = (2 * t) ** N2_LOWER_EXPONENT / math.pi ** (8.0 / 3.0) if t <= math.pi else None
            return CdfBounds(lower, min(1.0, N2_UPPER_CONSTANT * t**N2_LOWER_EXPONENT))
        lower = self.a_n * t if t <= ball_volume(self.n) else None
        return CdfBounds(lower, min(1.0, self.b_n * t))


def _check_dim(n):
    if n < 2:
        raise InvalidArgument(f"Dimension must be at least 2, got {n}")


def miles_expected_volume(n):
    """
    Expected n-volume of the simplex spanned by n + 1 uniform points on S^{n-1} (Miles).

    >>> round(miles_expected_volume(2), 7)
    0.4774648
    """
    _check_dim(n)
    log_value = (
        -ln_factorial(n)
        + ln_gamma((n * n + 1) / 2)
        - ln_gamma(n * n / 2)
        + n * (ln_gamma(n / 2) - ln_gamma((n + 1) / 2))
        + ln_gamma(n / 2)
        - ln_gamma(0.5)
    )
    return math.exp(log_value)


def random_simplex_volumes(gen, n, count):
    """Volumes of ``count`` simplices spanned by n + 1 uniform points of S^{n-1}."""
    return simplex_volumes(gaussian_directions(gen, (count, n + 1, n)))


def draw_volumes(rng, n, samples, threads=None):
    return np.concatenate(run_sharded(rng, samples, lambda gen, size: random_simplex_volumes(gen, n, size), threads))


def estimate_moment(rng, n, k, samples, threads=None):
    """Monte-Carlo estimate of V_{k,n}, the k-th moment of the random inscribed simplex volume."""
    _check_dim(n)
    if k < 1:
        raise InvalidArgument(f"Moment order must be at least 1, got {k}")
    if samples < 1000:
        raise InvalidArgument(f"Need at least 1000 samples, got {samples}")
    powers = draw_volumes(rng, n, samples, threads) ** k
    return MomentEstimate(k, n, float(powers.mean()), float(powers.std(ddof=1) / math.sqrt(samples)), samples)


def lemma_a_n(n):
    """Linear lower constant of the volume distribution function, n >= 3."""
    if n < 3:
        raise InvalidArgument(f"The linear CDF constants need n >= 3, got {n}")
    log_inner = (
        -0.5 - 0.5 * math.log(n)
        + (n + 1) * math.log(sphere_area(n - 1))
        - 2 * math.log(n)
        - n * math.log(sphere_area(n))
        + ln_gamma(((n - 1) ** 2 + 1) / 2)
        - ln_gamma((n - 1) ** 2 / 2)
        + (n - 1) * (ln_gamma((n - 1) / 2) - ln_gamma(n / 2))
        + ln_gamma((n - 1) / 2)
        - ln_gamma(0.5)
    )
    return math.exp(log_inner) / ball_volume(n)


def lemma_b_n(n):
    """
    Linear upper constant of the volume distribution function, n >= 3.

    >>> round(lemma_b_n(3) / math.pi, 12)
    3.0
    """
    if n < 3:
        raise InvalidArgument(f"The linear CDF constants need n >= 3, got {n}")
    log_value = (
        ln_factorial(n)
        + (n + 1) * math.log(sphere_area(n - 1))
        - n * math.log(sphere_area(n))
        + ln_gamma(0.5)
        + ln_gamma((n * n - 3 * n + 2) / 2)
        - ln_gamma((n * n - 3 * n + 3) / 2)
    )
    return math.exp(log_value)


def cdf_constants(n):
    _check_dim(n)
    if n == 2:
        return CdfBoundPair(2, 2 ** N2_LOWER_EXPONENT / math.pi ** (8.0 / 3.0), N2_UPPER_CONSTANT)
    return CdfBoundPair(n, lemma_a_n(n), lemma_b_n(n))


def cdf_bounds(n, t):
    """
    Sandwich on P(vol_n(simplex) <= t).

    For n = 2 it is ((2t)^{2/3} / pi^{8/3}, 342 t^{2/3}), for n >= 3 (a_n t, b_n t). The upper
    side is clamped at 1; the lower side is None outside its range (t > pi for n = 2,
    t > |B^n| otherwise).
    """
    return cdf_constants(n).evaluate(t)


def _binomial_stderr(p, samples):
    return math.sqrt(max(p * (1 - p), 0.0) / samples)


def verify_cdf_sandwich(rng, n, t_grid, samples, threads=None):
    """Compare the empirical volume CDF with the sandwich at each threshold; one report per threshold."""
    constants = cdf_constants(n)
    volumes = draw_volumes(rng, n, samples, threads)
    reports = []
    for t in t_grid:
        bounds = constants.evaluate(t)
        empirical = float(np.mean(volumes <= t))
        reports.append(
            BoundReport(
                "volume_cdf",
                {"n": n, "t": t, "samples": samples},
                bounds.upper,
                empirical,
                _binomial_stderr(empirical, samples),
                side="sandwich",
                lower_value=bounds.lower,
            )
        )
    return reports


def verify_second_moment_bound(rng, n, samples, threads=None):
    """
    Check P(vol >= V_1 / 2) >= V_1^2 / (4 V_2) with both sides estimated from the same draws.

    The stderr combines the binomial error of the left side with a delta-method error of the right side.
    """
    _check_dim(n)
    volumes = draw_volumes(rng, n, samples, threads)
    v1 = float(volumes.mean())
    v2 = float(np.mean(volumes**2))
    lhs = float(np.mean(volumes >= v1 / 2))
    rhs = v1 * v1 / (4 * v2)
    cov = np.cov(np.vstack([volumes, volumes**2])) / samples
    grad = np.array([v1 / (2 * v2), -v1 * v1 / (4 * v2 * v2)])
    rhs_var = float(grad @ cov @ grad)
    stderr = math.sqrt(_binomial_stderr(lhs, samples) ** 2 + max(rhs_var, 0.0))
    return BoundReport("second_moment", {"n": n, "samples": samples}, rhs, lhs, stderr, side="lower")


def _section_weights(gen, n, count, integrand):
    p = gen.random(count)
    theta = gaussian_directions(gen, (count, n))
    xi = sample_sections(gen, theta, p, n)
    r_sq = 1.0 - p * p
    # density of (p, theta, xi_1..xi_n) is 1 / (|S^{n-1}| (|S^{n-2}| r^{n-2})^n)
    log_measure = (
        math.log(sphere_area(n)) + n * math.log(sphere_area(n - 1)) + n * (n - 2) / 2 * np.log(r_sq)
    )
    jacobian = math.factorial(n - 1) * simplex_volumes(xi) / r_sq ** (n / 2)
    return np.exp(log_measure) * jacobian * integrand(xi)


def _ones(tuples):
    return np.ones(len(tuples))


def verify_blaschke_petkantschin(rng, n=3, samples=1_000_000, integrand=None, threads=None):
    """
    Monte-Carlo check of the spherical Blaschke-Petkantschin identity.

    The right side integrates over p uniform on [0, 1], theta uniform on S^{n-1} and n points
    uniform on the section H(theta, p) ∩ S^{n-1}. With ``integrand`` left at f = 1 the left
    side is exactly |S^{n-1}|^n; any other integrand (a function of an (M, n, n) array of
    tuples) is integrated on the left by plain Monte-Carlo.
    """
    if n == 2:
        raise Unsupported("The section measure is zero-dimensional for n = 2")
    if n < 3:
        raise InvalidArgument(f"Dimension must be at least 3, got {n}")
    f = integrand or _ones
    weights = np.concatenate(run_sharded(rng, samples, lambda gen, size: _section_weights(gen, n, size, f), threads))
    rhs = float(weights.mean())
    rhs_err = float(weights.std(ddof=1) / math.sqrt(samples))
    if integrand is None:
        lhs, lhs_err = sphere_area(n) ** n, 0.0
    else:
        sphere_tuples = np.concatenate(
            run_sharded(
                rng.child(LHS_STREAM) if hasattr(rng, "child") else rng,
                samples,
                lambda gen, size: f(gaussian_directions(gen, (size, n, n))),
                threads,
            )
        )
        scale = sphere_area(n) ** n
        lhs = float(scale * sphere_tuples.mean())
        lhs_err = float(scale * sphere_tuples.std(ddof=1) / math.sqrt(samples))
    logger.info("blaschke-petkantschin n=%s: lhs %.6g, rhs %.6g +- %.3g", n, lhs, rhs, rhs_err)
    return BoundReport(
        "blaschke_petkantschin",
        {"n": n, "samples": samples},
        lhs,
        rhs,
        math.hypot(rhs_err, lhs_err),
        side="equality",
    )
