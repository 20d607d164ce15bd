"""Fitting scaling laws E[stat] ~ c N^alpha (or c log N / N) across a grid of N."""

import math
from dataclasses import dataclass, field

import numpy as np

from django_polytopes.exceptions import InvalidInput
from django_polytopes.extremal import AggregateStat

MODELS = ("power", "log_over_N")
MIN_POINTS = 4
FIT_STATISTICS = ("min_facet", "max_facet")
MAX_RATIO_SPREAD = 2.0
MIN_FACET_WINDOWS = {2: (-2.15, -1.85), 3: (-1.75, -1.45)}
HIGH_DIM_WINDOW = (-1.65, -1.35)


def expected_exponent_window(statistic, n):
    """The accepted range for the fitted exponent of ``statistic`` in dimension n, or None when none applies."""
    if statistic != "min_facet":
        return None
    return MIN_FACET_WINDOWS.get(n, HIGH_DIM_WINDOW)


@dataclass(frozen=True)
class ScalingFit:
    statistic: str
    n: int
    model: str
    N_grid: tuple
    means: tuple
    stderrs: tuple
    constant: float
    exponent: float = None
    residuals: tuple = ()
    ratios: tuple = ()
    window: tuple = None
    weighted: bool = field(default=False)

    @property
    def residual_rms(self):
        return math.sqrt(math.fsum(r * r for r in self.residuals) / len(self.residuals))

    @property
    def ratio_spread(self):
        return max(self.ratios) / min(self.ratios) if self.ratios else None

    @property
    def status(self):
        if self.model == "power":
            if self.window is None:
                return "n/a"
            low, high = self.window
            return "pass" if low <= self.exponent <= high else "fail"
        if self.statistic == "max_facet":
            return "pass" if self.ratio_spread < MAX_RATIO_SPREAD else "fail"
        return "n/a"

    def model_value(self, N):
        if self.model == "power":
            return self.constant * N**self.exponent
        return self.constant * math.log(N) / N

    def plot_rows(self):
        """Rows (N, mean, stderr, model) for re-plotting the fit."""
        return [
            [N, mean, "" if stderr is None else stderr, self.model_value(N)]
            for N, mean, stderr in zip(self.N_grid, self.means, self.stderrs)
        ]

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "n": self.n,
            "model": self.model,
            "N_grid": list(self.N_grid),
            "exponent": self.exponent,
            "constant": self.constant,
            "residuals": list(self.residuals),
            "residual_rms": self.residual_rms,
            "ratios": list(self.ratios),
            "ratio_spread": self.ratio_spread,
            "window": list(self.window) if self.window else None,
            "weighted": self.weighted,
            "status": self.status,
        }


def _grid(stats, statistic):
    if len(stats) < MIN_POINTS:
        raise InvalidInput(f"A scaling fit needs at least {MIN_POINTS} grid points, got {len(stats)}")
    dims = {stat.n for stat in stats}
    if len(dims) != 1:
        raise InvalidInput(f"All grid points must share one dimension, got {sorted(dims)}")
    points = sorted((stat.N, *stat.values[statistic]) for stat in stats if statistic in stat.values)
    if len(points) < MIN_POINTS:
        raise InvalidInput(f"Only {len(points)} grid points carry the statistic {statistic!r}")
    if len({N for N, _, _ in points}) != len(points):
        raise InvalidInput("Grid points must have distinct N")
    if any(mean <= 0 for _, mean, _ in points):
        raise InvalidInput(f"Every mean of {statistic!r} must be positive for a log-scale fit")
    return dims.pop(), points


def _weights(points):
    """1 / stderr weights when every point has a positive stderr, otherwise None."""
    stderrs = [stderr for _, _, stderr in points]
    if any(s is None or s <= 0 for s in stderrs):
        return None
    return np.array(stderrs)


def fit_scaling(stats, model="power", statistic="min_facet"):
    """
    Fit one statistic of a sequence of ``AggregateStat`` (same n, at least four N) against N.

    ``power`` is a least-squares line through (log N, log mean), each point weighted by the inverse
    variance of log mean (stderr / mean to first order). ``log_over_N`` fits mean = c log N / N
    with inverse-variance weights and records mean * N / log N at every point.
    """
    if model not in MODELS:
        raise InvalidInput(f"Unknown scaling model {model!r}, expected one of {MODELS}")
    n, points = _grid(stats, statistic)
    N_grid = np.array([N for N, _, _ in points], dtype=float)
    means = np.array([mean for _, mean, _ in points])
    stderrs = _weights(points)
    common = {
        "statistic": statistic,
        "n": n,
        "model": model,
        "N_grid": tuple(int(N) for N in N_grid),
        "means": tuple(float(m) for m in means),
        "stderrs": tuple(stderr for _, _, stderr in points),
        "weighted": stderrs is not None,
    }

    if model == "power":
        w = None if stderrs is None else means / stderrs
        slope, intercept = np.polyfit(np.log(N_grid), np.log(means), 1, w=w)
        residuals = np.log(means) - (slope * np.log(N_grid) + intercept)
        return ScalingFit(
            constant=float(math.exp(intercept)),
            exponent=float(slope),
            residuals=tuple(float(r) for r in residuals),
            window=expected_exponent_window(statistic, n),
            **common,
        )

    if np.any(N_grid < 2):
        raise InvalidInput("The log N / N model needs N >= 2 at every grid point")
    x = np.log(N_grid) / N_grid
    w = np.ones_like(x) if stderrs is None else 1.0 / stderrs**2
    constant = float(np.sum(w * x * means) / np.sum(w * x * x))
    ratios = means / x
    return ScalingFit(
        constant=constant,
        residuals=tuple(float(r) for r in np.log(means) - np.log(constant * x)),
        ratios=tuple(float(r) for r in ratios),
        **common,
    )


def stats_from_rows(rows):
    """Regroup long-format aggregate rows into one ``AggregateStat`` per (n, N)."""
    grouped = {}
    for row in rows:
        key = (row["n"], row["N"])
        trials, values = grouped.setdefault(key, (row["trials"], {}))
        if row["trials"] != trials:
            raise InvalidInput(f"Rows for n={key[0]}, N={key[1]} disagree on the trial count")
        values[row["stat"]] = (row["mean"], row["stderr"])
    return [AggregateStat(n, N, trials, values) for (n, N), (trials, values) in sorted(grouped.items())]


def fit_rows(rows, model="power", statistics=None):
    """
    Fit the facet statistics of aggregate rows, one fit per (n, statistic).

    Raises ``InvalidInput`` when a dimension carries fewer than four values of N.
    """
    stats = stats_from_rows(rows)
    fits = []
    for n in sorted({stat.n for stat in stats}):
        group = [stat for stat in stats if stat.n == n]
        present = {name for stat in group for name in stat.values}
        names = statistics or [name for name in FIT_STATISTICS if name in present]
        for name in names:
            fits.append(fit_scaling(group, model, name))
    return fits
