"""Per-trial extremal facet statistics of random inscribed polytopes and their aggregation over trials."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from django_polytopes.bounds import lemma8_volume_bound
from django_polytopes.conf import lab_setting
from django_polytopes.exceptions import InvalidArgument, TrialFailure
from django_polytopes.hull import convex_hull, facet_statistics
from django_polytopes.signals import aggregate_completed, trial_completed
from django_polytopes.sphere import RngStream, sample_sphere
from django_polytopes.workers import map_ordered

logger = logging.getLogger("django_polytopes.extremal")

CAP_BOUND_RTOL = 1e-9
STATISTICS = ("min_facet", "max_facet", "max_cap_height", "origin_inside", "cap_bound_violations")
GAP_STATISTICS = ("min_arc_gap", "max_arc_gap")
# geodesic arc length on the unit circle, not a fraction of the circumference
ARC_GAP_UNIT = "radians"


@dataclass(frozen=True)
class TrialSummary:
    n: int
    N: int
    trial_index: int
    min_facet_vol: float
    max_facet_vol: float
    max_cap_height: float
    min_offset: float
    contains_origin: bool
    facet_count: int
    cap_bound_violations: int = 0
    resamples: int = 0
    min_arc_gap: float = None
    max_arc_gap: float = None

    def statistic(self, name):
        return {
            "min_facet": self.min_facet_vol,
            "max_facet": self.max_facet_vol,
            "max_cap_height": self.max_cap_height,
            "origin_inside": float(self.contains_origin),
            "cap_bound_violations": float(self.cap_bound_violations),
            "min_arc_gap": self.min_arc_gap,
            "max_arc_gap": self.max_arc_gap,
        }[name]


@dataclass(frozen=True)
class AggregateStat:
    """
    Mean and standard error of each trial statistic at one (n, N).

    ``values`` maps a statistic name to ``(mean, stderr)``; the stderr is ``None`` for a single trial.
    """

    n: int
    N: int
    trials: int
    values: dict = field(default_factory=dict)
    resamples: int = 0

    def mean(self, name):
        return self.values[name][0]

    def stderr(self, name):
        return self.values[name][1]


def arc_gaps(points):
    """Geodesic gaps, in radians, between circularly consecutive points of S^1, in angular order."""
    angles = np.sort(np.arctan2(points[:, 1], points[:, 0]))
    return np.append(np.diff(angles), 2 * math.pi - (angles[-1] - angles[0]))


def expected_min_gap(N):
    """E[min arc gap] in radians for N uniform points of S^1; divide by 2 pi for the fraction of the circle."""
    return 2 * math.pi / N**2


def expected_max_gap(N):
    """
    E[max arc gap] = (2 pi / N) * H_N in radians for N uniform points of S^1.

    As a fraction of the circumference this is H_N / N, e.g. 0.051874 for N = 100.
    """
    return 2 * math.pi / N * math.fsum(1.0 / i for i in range(1, N + 1))


def wendel_outside_probability(n, N):
    """
    Probability that the hull of N uniform points of S^{n-1} misses the origin (Wendel).

    >>> wendel_outside_probability(2, 3)
    0.75
    """
    if N <= n:
        return 1.0
    terms = [special.comb(N - 1, k, exact=True) for k in range(n)]
    return math.ldexp(float(sum(terms)), -(N - 1))


def trial_stream(rng, n, N, trial_index):
    """The stream owned by one trial: ``trial_index`` is the stream index, (n, N) keys the substream."""
    return RngStream(rng.master_seed, trial_index, (*rng.substream, n, N))


def _as_stream(rng):
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, int):
        return RngStream(rng)
    raise InvalidArgument(f"Trials need an RngStream or integer seed, got {type(rng).__name__}")


def run_trial(rng, n, N, trial_index=0, hull_method=None):
    """
    Sample N points of S^{n-1}, build their hull and summarise its extremal facets.

    A degenerate hull is thrown away and the trial resampled from the next substream of
    ``rng``; more than ``POLYTOPES_MAX_RESAMPLES`` resamples raise ``TrialFailure``. ``hull_method`` is
    passed to ``convex_hull`` (None means ``POLYTOPES_HULL_METHOD``).
    """
    if N < n + 1:
        raise InvalidArgument(f"A hull in R^{n} needs N >= {n + 1}, got {N}")
    rng = _as_stream(rng)
    max_resamples = lab_setting("MAX_RESAMPLES")
    for attempt in range(max_resamples + 1):
        cloud = sample_sphere(rng.child(attempt), n, N)
        hull = convex_hull(cloud, method=hull_method)
        if not hull.degenerate:
            break
        logger.warning("degenerate hull in trial %s (n=%s, N=%s), resampling", trial_index, n, N)
    else:
        raise TrialFailure(f"Trial {trial_index} stayed degenerate after {max_resamples} resamples")

    stats = facet_statistics(hull)
    violations = sum(
        1 for f in hull.facets if f.volume > lemma8_volume_bound(n, f.cap_height) * (1 + CAP_BOUND_RTOL) + CAP_BOUND_RTOL
    )
    gaps = arc_gaps(cloud.points) if n == 2 else None
    return TrialSummary(
        n=n,
        N=N,
        trial_index=trial_index,
        min_facet_vol=stats.min_vol,
        max_facet_vol=stats.max_vol,
        max_cap_height=stats.max_cap_height,
        min_offset=stats.min_offset,
        contains_origin=hull.contains_origin,
        facet_count=len(hull),
        cap_bound_violations=violations,
        resamples=attempt,
        min_arc_gap=None if gaps is None else float(gaps.min()),
        max_arc_gap=None if gaps is None else float(gaps.max()),
    )


def run_trials(rng, n, N, trials, threads=None, hull_method=None):
    """Run ``trials`` independent trials; the summaries come back in trial order whatever the thread count."""
    if trials < 1:
        raise InvalidArgument(f"Need at least one trial, got {trials}")
    rng = _as_stream(rng)

    def task(trial_index):
        try:
            return run_trial(trial_stream(rng, n, N, trial_index), n, N, trial_index, hull_method)
        except Exception as exc:
            exc.trial_index = trial_index
            exc.stream_index = trial_index
            raise

    return map_ordered(task, list(range(trials)), threads)


def _mean_stderr(values):
    values = np.asarray(values, dtype=float)
    # np.add.reduce sums pairwise over trial order, so the result does not depend on threading
    mean = float(np.add.reduce(values) / len(values))
    if len(values) < 2:
        return mean, None
    return mean, float(values.std(ddof=1) / math.sqrt(len(values)))


def summarise(summaries):
    """Reduce trial summaries of one (n, N) into an ``AggregateStat``."""
    first = summaries[0]
    names = STATISTICS + (GAP_STATISTICS if first.n == 2 else ())
    values = {name: _mean_stderr([s.statistic(name) for s in summaries]) for name in names}
    return AggregateStat(first.n, first.N, len(summaries), values, sum(s.resamples for s in summaries))


def aggregate(rng, n, N, trials, threads=None, summaries=None, hull_method=None):
    """
    Mean and stderr of every trial statistic over ``trials`` independent trials at (n, N).

    The result depends only on the master seed, n, N, ``trials`` and the hull engine. Errors from a trial
    propagate with ``trial_index`` and ``stream_index`` attached. Pass ``summaries`` (a list)
    to also collect the per-trial records.
    """
    logger.info("aggregate n=%s N=%s trials=%s", n, N, trials)
    results = run_trials(rng, n, N, trials, threads, hull_method)
    for summary in results:
        trial_completed.send(sender=TrialSummary, summary=summary)
    stat = summarise(results)
    if summaries is not None:
        summaries.extend(results)
    if stat.resamples:
        logger.warning("aggregate n=%s N=%s needed %s resamples", n, N, stat.resamples)
    logger.info(
        "aggregate n=%s N=%s done: min facet %.6g, max facet %.6g",
        n,
        N,
        stat.mean("min_facet"),
        stat.mean("max_facet"),
    )
    aggregate_completed.send(sender=AggregateStat, stat=stat)
    return stat
