"""Verification suites: every analytic claim of the lab checked against Monte-Carlo or exact evaluation."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from django_polytopes import bounds
from django_polytopes.caps import build_cap_packing, cap_angle_from_fraction, cap_area, cap_area_bounds, cap_from
from django_polytopes.events import estimate_event_H, estimate_event_Htilde
from django_polytopes.exceptions import InvalidArgument, PackingFailure
from django_polytopes.extremal import (
    aggregate,
    expected_max_gap,
    expected_min_gap,
    wendel_outside_probability,
)
from django_polytopes.reports import BoundReport
from django_polytopes.signals import check_completed
from django_polytopes.simplex_law import (
    estimate_moment,
    miles_expected_volume,
    verify_blaschke_petkantschin,
    verify_cdf_sandwich,
    verify_second_moment_bound,
)
from django_polytopes.sphere import RngStream, sample_sphere, sphere_area

logger = logging.getLogger("django_polytopes.verify")

# exact evaluations are compared up to this absolute error
ANALYTIC_TOL = 1e-9
CAP_GRID = [(n, p) for n in (2, 3, 4, 5) for p in (-0.5, 0.0, 0.3, 0.8)]
CDF_GRIDS = {2: (0.01, 0.1, 1.0), 3: (0.001, 0.01, 0.1), 4: (0.0001, 0.001, 0.01)}
HAUSDORFF_GRID = (0.05, 0.1, 0.2, 0.5, 1.0)
EXISTENCE_LEVELS = (0.01, 0.03, 0.1, 0.3, 0.5)
TAIL_POINTS = 8


@dataclass(frozen=True)
class SuiteOptions:
    """Budget of a verification run; None means the suite's own default."""

    n_list: tuple = None
    N_list: tuple = None
    trials: int = None
    samples: int = None
    threads: int = None
    hull_method: str = None

    def dims(self, default):
        return tuple(self.n_list or default)

    def sizes(self, default):
        return tuple(self.N_list or default)


def _binomial(p, count):
    return math.sqrt(max(p * (1 - p), 0.0) / count)


def _analytic(name, params, bound, value, side="upper", lower=None):
    return BoundReport(name, params, bound, value, ANALYTIC_TOL, side=side, lower_value=lower, slack=1.0)


def caps_suite(rng, options):
    samples = options.samples or 1_000_000
    reports = []
    for index, (n, p) in enumerate(CAP_GRID):
        cap = cap_from(n, offset=p)
        points = sample_sphere(rng.child(index), n, samples).points
        hit = float(np.mean(cap.contains(points)))
        reports.append(
            BoundReport(
                "cap_area_fraction",
                {"n": n, "p": p, "samples": samples},
                cap_area(n, p) / sphere_area(n),
                hit,
                _binomial(hit, samples),
                side="equality",
            )
        )
    for n in (4, 5, 6):
        for p in np.round(np.arange(0.1, 1.0, 0.1), 1):
            lower, upper = cap_area_bounds(n, float(p))
            reports.append(
                _analytic("cap_area_bounds", {"n": n, "p": float(p)}, upper, cap_area(n, float(p)), "sandwich", lower)
            )
    for n in range(2, 7):
        for R in (2, 10, 100, 10_000):
            phi, lower, upper = cap_angle_from_fraction(n, R)
            reports.append(_analytic("cap_angle", {"n": n, "R": R}, upper, phi, "sandwich", lower))
    for n in (2, 3, 4):
        for R in (10, 100, 1000):
            params = {"n": n, "R": R}
            try:
                packing = build_cap_packing(rng.child(1000 + 10 * n).child(R), n, R)
            except PackingFailure as exc:
                reports.append(BoundReport("cap_packing", params, R, math.nan, 0.0, "sandwich", 3.0**-n * R, note=str(exc)))
                continue
            reports.append(_analytic("cap_packing", params, R, len(packing), "sandwich", 3.0**-n * R))
            separation = 2 * packing.caps[0].angle
            reports.append(_analytic("cap_packing_separation", params, separation, packing.min_center_angle(), "lower"))
    return reports


def simplex_suite(rng, options):
    samples = options.samples or 1_000_000
    reports = []
    for n in options.dims((2, 3)):
        stream = rng.child(n)
        first = estimate_moment(stream.child(0), n, 1, samples, options.threads)
        reports.append(
            BoundReport(
                "miles_mean_volume",
                {"n": n, "samples": samples},
                miles_expected_volume(n),
                first.value,
                first.stderr,
                side="equality",
                slack=5.0,
            )
        )
        second = estimate_moment(stream.child(0), n, 2, samples, options.threads)
        # same draws for both moments, so Jensen's inequality holds for the estimates themselves
        reports.append(
            BoundReport("jensen_second_moment", {"n": n, "samples": samples}, first.value**2, second.value, 0.0, "lower")
        )
        if n in CDF_GRIDS:
            reports.extend(verify_cdf_sandwich(stream.child(1), n, CDF_GRIDS[n], samples, options.threads))
        reports.append(verify_second_moment_bound(stream.child(2), n, samples, options.threads))
    return reports


def bp_suite(rng, options):
    samples = options.samples or 1_000_000
    return [verify_blaschke_petkantschin(rng.child(n), n, samples, threads=options.threads) for n in options.dims((3,))]


def _tail_grid(n):
    """Points t between a fiftieth and the root of the base of the max-facet tail bound."""
    _, decay = bounds.max_facet_tail_coefficients(n)
    return np.geomspace(0.02 / decay, 1.0 / decay, TAIL_POINTS)


def _existence_t(n, N, level):
    if n == 3:
        return (level / (bounds.min_facet_existence_constant(3) * N ** (8 / 3))) ** 0.6
    return math.sqrt(level / (bounds.min_facet_existence_constant(n) * N**3))


def _trial_reports(n, N, summaries, stat):
    trials = len(summaries)
    params = {"n": n, "N": N, "trials": trials}
    max_facets = np.array([s.max_facet_vol for s in summaries])
    min_facets = np.array([s.min_facet_vol for s in summaries])
    heights = np.array([s.max_cap_height for s in summaries])
    reports = []

    for t in _tail_grid(n):
        p = float(np.mean(max_facets >= t))
        bound = bounds.max_facet_tail_bound(n, N, float(t)).clamped
        reports.append(BoundReport("max_facet_tail", {**params, "t": float(t)}, bound, p, _binomial(p, trials)))
    for delta in HAUSDORFF_GRID:
        p = float(np.mean(heights >= delta))
        bound = bounds.hausdorff_tail_bound(n, N, delta).clamped
        reports.append(BoundReport("hausdorff_tail", {**params, "delta": delta}, bound, p, _binomial(p, trials)))
    reports.append(
        BoundReport(
            "max_facet_expectation",
            params,
            bounds.max_facet_expectation_bound(n, N),
            stat.mean("max_facet"),
            stat.stderr("max_facet") or 0.0,
        )
    )
    reports.append(
        BoundReport("cap_height_volume_bound", params, 0, sum(s.cap_bound_violations for s in summaries), 0.0)
    )
    reports.append(
        BoundReport(
            "origin_containment",
            params,
            1.0 - wendel_outside_probability(n, N),
            stat.mean("origin_inside"),
            _binomial(1.0 - wendel_outside_probability(n, N), trials),
            side="equality",
        )
    )

    if n == 2:
        interval = bounds.min_facet_interval(2, N)
        reports.append(
            BoundReport(
                "min_edge_interval",
                params,
                interval.upper,
                stat.mean("min_facet"),
                stat.stderr("min_facet") or 0.0,
                side="sandwich",
                lower_value=interval.lower,
            )
        )
        reports.append(
            BoundReport(
                "min_arc_gap",
                params,
                expected_min_gap(N),
                stat.mean("min_arc_gap"),
                stat.stderr("min_arc_gap") or 0.0,
                side="equality",
            )
        )
        reports.append(
            BoundReport(
                "max_arc_gap",
                params,
                expected_max_gap(N),
                stat.mean("max_arc_gap"),
                stat.stderr("max_arc_gap") or 0.0,
                side="equality",
            )
        )
        reports.append(
            BoundReport(
                "max_edge_lower",
                params,
                bounds.theorem11_n2_lower(N),
                stat.mean("max_facet"),
                stat.stderr("max_facet") or 0.0,
                side="lower",
            )
        )
    else:
        for level in EXISTENCE_LEVELS:
            t = _existence_t(n, N, level)
            p = float(np.mean(min_facets <= t))
            bound = bounds.min_facet_existence_bound(n, N, t).clamped
            reports.append(BoundReport("min_facet_existence", {**params, "t": t}, bound, p, _binomial(p, trials)))
    return reports


def tails_suite(rng, options):
    trials = options.trials or 1000
    reports = []
    for n in options.dims((2, 3)):
        for N in options.sizes((50, 200)):
            summaries = []
            stat = aggregate(
                rng, n, N, trials, options.threads, summaries=summaries, hull_method=options.hull_method
            )
            reports.extend(_trial_reports(n, N, summaries, stat))
    return reports


def lemma17_suite(rng, options):
    return [bounds.lemma17_integral_check(n, N) for n in options.dims((4, 5)) for N in options.sizes((10**4, 10**5))]


def events_suite(rng, options):
    trials = options.trials or 200_000
    reports = []
    for n in options.dims((3,)):
        reports.append(estimate_event_H(rng.child(n), n, math.ceil(math.pi**n * n), trials, threads=options.threads))
    for n in (3, 4):
        for t in (0.01, 0.1):
            reports.append(estimate_event_Htilde(rng.child(10 + n), n, 100, t, trials, threads=options.threads))
    return reports


SUITES = {
    "caps": caps_suite,
    "simplex": simplex_suite,
    "bp": bp_suite,
    "tails": tails_suite,
    "lemma17": lemma17_suite,
    "events": events_suite,
}


def run_suite(name, rng, options=None):
    """
    Run a named suite and announce each report through ``check_completed``.

    ``rng`` is an ``RngStream`` or an integer master seed.
    """
    if name not in SUITES:
        raise InvalidArgument(f"Unknown suite {name!r}, expected one of {sorted(SUITES)}")
    rng = rng if isinstance(rng, RngStream) else RngStream(int(rng))
    reports = SUITES[name](rng, options or SuiteOptions())
    for report in reports:
        check_completed.send(sender=name, report=report)
    failed = sum(1 for report in reports if report.status == "fail")
    logger.info("suite %s: %s checks, %s failed", name, len(reports), failed)
    return reports
