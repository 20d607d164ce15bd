"""Closed-form evaluators for the explicit bounds on extremal facets of random inscribed polytopes."""

import collections
import logging
import math
import warnings
from dataclasses import dataclass

from scipy import integrate

from django_polytopes.caps import angle_for_area, cap_area
from django_polytopes.exceptions import InvalidArgument, NumericalFailure, Unsupported
from django_polytopes.reports import BoundReport
from django_polytopes.simplex_law import lemma_a_n, lemma_b_n, miles_expected_volume
from django_polytopes.sphere import ball_volume, ln_factorial, sphere_area

logger = logging.getLogger("django_polytopes.bounds")

TailBound = collections.namedtuple("TailBound", "raw,clamped")
MinFacetInterval = collections.namedtuple("MinFacetInterval", "lower,upper,exponent")

MIN_FACET_EXPONENTS = {2: -2.0, 3: -1.6}
INTEGRAL_EPSREL = 1e-8
INTEGRAL_DEFAULT_N = {4: 10_000, 5: 100_000}


def _tail(raw):
    return TailBound(raw, min(1.0, max(0.0, raw)))


def _area_ratio(n):
    """|S^{n-1}| / |B^{n-1}|."""
    return sphere_area(n) / ball_volume(n - 1)


def _check_dim(n):
    if n < 2:
        raise InvalidArgument(f"Dimension must be at least 2, got {n}")


def regular_simplex_volume(n, side):
    """
    Volume of the regular (n-1)-simplex with n vertices and the given side length.

    >>> round(regular_simplex_volume(3, math.sqrt(2)), 12) == round(math.sqrt(3) / 2, 12)
    True
    """
    _check_dim(n)
    return math.sqrt(n) / math.factorial(n - 1) * (side / math.sqrt(2)) ** (n - 1)


def lemma8_volume_bound(n, delta):
    """Largest (n-1)-volume of a simplex with vertices on S^{n-1} whose plane cuts off a cap of height delta."""
    _check_dim(n)
    if delta < 0:
        raise InvalidArgument(f"Cap height must be non-negative, got {delta}")
    return (2 * n / (n - 1)) ** ((n - 1) / 2) * math.sqrt(n) / math.factorial(n - 1) * delta ** ((n - 1) / 2)


def hausdorff_tail_bound(n, N, delta):
    """
    Upper bound on P(d_H(P_N, B^n) >= delta) for 0 < delta <= 1.

    >>> f"{hausdorff_tail_bound(2, 50, 1.0).raw:.3g}"
    '0.000212'
    """
    _check_dim(n)
    if not 0.0 < delta <= 1.0:
        raise InvalidArgument(f"delta must lie in (0, 1], got {delta}")
    if N < 1:
        raise InvalidArgument(f"N must be at least 1, got {N}")
    scale = (delta / 3.0) ** ((n - 1) / 2)
    base = 1.0 - scale / _area_ratio(n)
    return _tail(base**N / scale * _area_ratio(n))


def max_facet_tail_coefficients(n):
    prefactor = math.sqrt(n) / math.factorial(n - 1) * (6 * n / (n - 1)) ** ((n - 1) / 2) * _area_ratio(n)
    decay = math.factorial(n - 1) / math.sqrt(n) * ((n - 1) / (6 * n)) ** ((n - 1) / 2) / _area_ratio(n)
    return prefactor, decay


def max_facet_tail_bound(n, N, t):
    """
    Upper bound on P(max facet volume >= t).

    The raw value is prefactor / t * (1 - decay * t)^N, and 0 once the base is no longer positive.
    """
    _check_dim(n)
    if t <= 0:
        raise InvalidArgument(f"t must be positive, got {t}")
    prefactor, decay = max_facet_tail_coefficients(n)
    base = 1.0 - decay * t
    if base <= 0:
        return TailBound(0.0, 0.0)
    return _tail(prefactor / t * math.exp(N * math.log(base)))


def max_facet_expectation_constant(n):
    _check_dim(n)
    log_value = n / 2 * math.log(6) + 0.5 * (1 + math.log(n)) - ln_factorial(n - 1) + math.log(_area_ratio(n))
    return math.exp(log_value)


def max_facet_expectation_bound(n, N):
    """Upper bound on E[max facet volume]: an explicit constant times log N / N."""
    if N < 3:
        raise InvalidArgument(f"The expectation bound needs N >= 3, got {N}")
    return max_facet_expectation_constant(n) * math.log(N) / N


def max_facet_lower_constant(n, v1=None, v2=None):
    """
    Constant c with E[max facet volume] >= c log N / N for large N.

    For n >= 3 it needs the first two moments ``v1``, ``v2`` of the volume of a random simplex
    inscribed in the (n-2)-sphere of a hyperplane section.
    """
    _check_dim(n)
    if n == 2:
        return 1 / (2 * math.pi)
    if v1 is None or v2 is None:
        raise InvalidArgument("The lower constant for n >= 3 needs the moments v1 and v2")
    if v2 <= 0:
        raise InvalidArgument(f"v2 must be positive, got {v2}")
    log_value = (
        math.log(_area_ratio(n))
        + 3 * math.log(v1)
        - math.log(v2)
        + (n * n - n - 7) * math.log(2)
        - (n + 3) * math.log(3)
        - (2 * n * n - 3 * n - 1) * math.log(math.pi)
    )
    return math.exp(log_value)


def theorem11_n2_lower(N):
    """Finite-N lower bound on E[longest edge] for n = 2."""
    if N < 3:
        raise InvalidArgument(f"N must be at least 3, got {N}")
    return ((1 / N) + math.log(N)) / N / (2 * math.pi) - math.ldexp(N, -(N - 1))


def min_facet_interval(n, N):
    """
    Two-sided bound on E[min facet volume].

    Only n = 2 has explicit constants, [3 sqrt 3 / N^2, 2 pi / N^2]; for n >= 3 the sides are None
    and only the exponent of N is known.
    """
    _check_dim(n)
    if N < n + 1:
        raise InvalidArgument(f"N must be at least {n + 1}, got {N}")
    if n == 2:
        return MinFacetInterval(3 * math.sqrt(3) / N**2, 2 * math.pi / N**2, -2.0)
    return MinFacetInterval(None, None, MIN_FACET_EXPONENTS.get(n, -1.5))


def min_facet_existence_constant(n):
    if n == 3:
        return 57 * math.pi
    log_value = (
        math.log(4 * math.sqrt(2))
        + math.log(lemma_b_n(n - 1))
        + 3 * math.log(sphere_area(n - 1))
        - math.log(n)
        - 2 * math.log(sphere_area(n))
        + (n - 4) * math.log(n - 1)
        + ln_factorial(n - 4)
    )
    return math.exp(log_value)


def min_facet_existence_bound(n, N, t):
    """
    Upper bound on P(some facet has volume <= t).

    n = 3: 57 pi N^{8/3} t^{5/3}; n >= 4: a constant (built from b_{n-1}) times t^2 N^3.

    >>> f"{min_facet_existence_bound(3, 100, 1e-5).raw:.3f}"
    '0.179'
    """
    if n < 3:
        raise Unsupported(f"The existence bound is stated for n >= 3, got {n}")
    if t < 0:
        raise InvalidArgument(f"t must be non-negative, got {t}")
    if n == 3:
        return _tail(min_facet_existence_constant(3) * N ** (8 / 3) * t ** (5 / 3))
    return _tail(min_facet_existence_constant(n) * t * t * N**3)


def vol_rn(n, R, v1=None):
    """The volume threshold |S^{n-1}| / |B^{n-1}| * v1 / (2R) of a large facet inside a cap of area |S^{n-1}| / R."""
    if n < 3:
        raise InvalidArgument(f"vol_rn is defined for n >= 3, got {n}")
    if R < 1:
        raise InvalidArgument(f"R must be at least 1, got {R}")
    v1 = miles_expected_volume(n - 1) if v1 is None else v1
    return _area_ratio(n) * v1 / (2 * R)


def large_facet_event_bounds(n, R, v1, v2):
    """(lower, upper) on the probability of the large-facet cap event, for n >= 3 and R >= pi^n n."""
    if n < 3:
        raise InvalidArgument(f"The cap event bounds need n >= 3, got {n}")
    common = ln_factorial(n - 1) + (n - 3) * math.log(n - 1) + math.log(sphere_area(n - 1)) - n * math.log(R)
    lower = math.exp(common + 3 * math.log(v1) - math.log(v2) - math.log(96) - (n * n - 2 * n - 1) * math.log(math.pi))
    upper = math.exp(common + math.log(v1) + n * (n - 2) * math.log(math.pi / 2))
    return lower, upper


def small_facet_event_bounds(n, N, t):
    """
    (lower, upper) on the probability of the small-facet cap event; the lower side is None outside its range.
    """
    if n == 3:
        lower = 4 / (math.pi**3 * 1e5) * t ** (5 / 3) / N**3 if t <= math.pi else None
        return lower, 171 * math.pi**7 * t ** (5 / 3) / (16 * N**3)
    if n < 3:
        raise Unsupported(f"The small-facet cap event is defined for n >= 3, got {n}")
    common = 2 * math.log(t) - n * math.log(N) if t > 0 else -math.inf
    common += ln_factorial(n - 1) + (n - 3) * math.log(n - 1) + math.log(sphere_area(n - 1))
    upper = math.exp(common + math.log(lemma_b_n(n - 1)) + (n * n - n) * math.log(math.pi / 2))
    if t > ball_volume(n - 1):
        return None, upper
    lower = math.exp(
        common
        + math.log(3)
        + 2 * math.log(lemma_a_n(n - 1))
        - math.log(32)
        - math.log(lemma_b_n(n - 1))
        - (n * n - n - 2) * math.log(math.pi)
    )
    return lower, upper


@dataclass(frozen=True)
class TheoremConstants:
    """Every explicit constant of the extremal facet bounds for one dimension."""

    n: int
    v1: float
    v2: float
    thm10_A: float
    thm10_B: float
    thm10_expectation: float
    thm11_constant: float
    prop16_constant: float

    def vol_rn(self, R):
        return vol_rn(self.n, R, self.v1)

    def to_dict(self):
        return {
            "n": self.n,
            "v1": self.v1,
            "v2": self.v2,
            "thm10_A": self.thm10_A,
            "thm10_B": self.thm10_B,
            "thm10_expectation": self.thm10_expectation,
            "thm11_constant": self.thm11_constant,
            "prop16_constant": self.prop16_constant,
        }


def theorem_constants(n, v1=None, v2=None):
    """
    Assemble ``TheoremConstants`` for dimension n.

    ``v1`` defaults to Miles' closed form for the section simplex; ``v2`` has no closed form and
    must come from a Monte-Carlo estimate when n >= 3.
    """
    _check_dim(n)
    prefactor, decay = max_facet_tail_coefficients(n)
    if n == 2:
        return TheoremConstants(2, None, None, prefactor, decay, max_facet_expectation_constant(2), 1 / (2 * math.pi), None)
    v1 = miles_expected_volume(n - 1) if v1 is None else v1
    return TheoremConstants(
        n,
        v1,
        v2,
        prefactor,
        decay,
        max_facet_expectation_constant(n),
        max_facet_lower_constant(n, v1, v2) if v2 is not None else None,
        min_facet_existence_constant(n),
    )


def _avoidance_log_integrand(n, N, p):
    fraction = cap_area(n, p) / sphere_area(n)
    if fraction >= 1.0:
        return -math.inf
    return (n * n - 4 * n + 1) / 2 * math.log1p(-p * p) + (N - n) * math.log1p(-fraction)


def lemma17_sides(n, N):
    """
    Both sides of the cap-avoidance integral inequality.

    The left side is integrated with ``scipy.integrate.quad``, breaking the interval where the
    cap fraction crosses 1/(N - n), 10/(N - n) and 100/(N - n); a quadrature warning raises
    ``NumericalFailure``.
    """
    if n < 4:
        raise InvalidArgument(f"The integral inequality needs n >= 4, got {n}")
    if N <= n:
        raise InvalidArgument(f"N must exceed n, got N={N}")
    total = sphere_area(n)
    points = sorted(
        {
            math.cos(angle_for_area(n, total * k / (N - n)))
            for k in (1, 10, 100)
            if k / (N - n) < 0.5
        }
    )

    def integrand(p):
        if p >= 1.0:
            return 0.0
        return math.exp(_avoidance_log_integrand(n, N, p))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            lhs, abserr = integrate.quad(integrand, 0.0, 1.0, points=points or None, epsrel=INTEGRAL_EPSREL, limit=500)
        except integrate.IntegrationWarning as exc:
            raise NumericalFailure(f"Quadrature did not converge for n={n}, N={N}: {exc}") from exc
    log_rhs = (
        math.log(2 * math.sqrt(2))
        + (n - 4) * math.log(n - 1)
        + (n - 3) * (math.log(total) - math.log(sphere_area(n - 1)))
        + ln_factorial(n - 4)
        - (n - 3) * math.log(N - n)
    )
    return lhs, abserr, math.exp(log_rhs)


def lemma17_integral_check(n, N=None):
    """``BoundReport`` comparing the quadrature left side with the closed-form right side."""
    N = N or INTEGRAL_DEFAULT_N.get(n, 100_000)
    lhs, abserr, rhs = lemma17_sides(n, N)
    return BoundReport("lemma17_integral", {"n": n, "N": N}, rhs, lhs, abserr, side="upper", slack=1.0)


def lemma17_threshold_scan(n, start=None, stop=10**7, factor=2):
    """
    Scan N geometrically from ``start`` and return the first N at which the inequality holds, or None.
    """
    if factor <= 1:
        raise InvalidArgument(f"The scan factor must exceed 1, got {factor}")
    N = start or n + 1
    while N <= stop:
        lhs, _, rhs = lemma17_sides(n, N)
        logger.debug("integral inequality n=%s N=%s: lhs %.6g rhs %.6g", n, N, lhs, rhs)
        if lhs <= rhs:
            return N
        N = max(N + 1, int(N * factor))
    return None


BoundEvaluator = collections.namedtuple("BoundEvaluator", "function,grid_name,needs_N,help")


EVALUATORS = {
    "hausdorff_tail": BoundEvaluator(
        lambda n, N, x: hausdorff_tail_bound(n, N, x), "delta", True, "P(d_H(P_N, B^n) >= delta)"
    ),
    "max_facet_tail": BoundEvaluator(lambda n, N, x: max_facet_tail_bound(n, N, x), "t", True, "P(max facet >= t)"),
    "max_facet_expectation": BoundEvaluator(
        lambda n, N, x: max_facet_expectation_bound(n, N), None, True, "E[max facet] upper bound"
    ),
    "max_facet_lower": BoundEvaluator(
        lambda n, N, x: max_facet_lower_constant(2) * math.log(N) / N if n == 2 else None,
        None,
        True,
        "E[max facet] lower bound (n = 2)",
    ),
    "min_facet_interval": BoundEvaluator(
        lambda n, N, x: min_facet_interval(n, N), None, True, "E[min facet] interval (n = 2)"
    ),
    "min_facet_existence": BoundEvaluator(
        lambda n, N, x: min_facet_existence_bound(n, N, x), "t", True, "P(some facet <= t)"
    ),
    "lemma8_volume": BoundEvaluator(lambda n, N, x: lemma8_volume_bound(n, x), "delta", False, "facet volume vs cap height"),
    "lemma17_integral": BoundEvaluator(lambda n, N, x: lemma17_sides(n, N)[::2], None, True, "integral inequality sides"),
}


def tabulate(name, n_list, N_list, grid):
    """Evaluate a named bound over the n x N x grid product; one dict per point."""
    if name not in EVALUATORS:
        raise InvalidArgument(f"Unknown bound {name!r}, expected one of {sorted(EVALUATORS)}")
    evaluator = EVALUATORS[name]
    grid = grid if evaluator.grid_name else [None]
    N_values = N_list if evaluator.needs_N else [None]
    rows = []
    for n in n_list:
        for N in N_values:
            for x in grid:
                value = evaluator.function(n, N, x)
                row = {"bound": name, "n": n, "N": N}
                if evaluator.grid_name:
                    row[evaluator.grid_name] = x
                if isinstance(value, TailBound):
                    row.update(value=value.raw, clamped=value.clamped)
                elif isinstance(value, MinFacetInterval):
                    row.update(lower=value.lower, upper=value.upper, exponent=value.exponent)
                elif isinstance(value, tuple):
                    row.update(lhs=value[0], rhs=value[1])
                else:
                    row["value"] = value
                rows.append(row)
    return rows
