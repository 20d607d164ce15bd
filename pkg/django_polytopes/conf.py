"""Lab defaults, overridable from Django settings as ``POLYTOPES_<NAME>``, and the experiment configuration."""

import hashlib
import json
from dataclasses import asdict, dataclass, field

from django.conf import settings

from django_polytopes import __version__
from django_polytopes.exceptions import InvalidArgument

DEFAULTS = {
    "MASTER_SEED": 20240601,
    "TRIALS": 1000,
    "THREADS": 1,
    "SIGMA_SLACK": 4.0,
    "DEGENERACY_TOL": 1e-12,
    "ORIENTATION_TOL": 1e-12,
    "PLANE_TOL": 1e-10,
    "MAX_RESAMPLES": 10,
    "PACKING_REJECTION_STREAK": 10_000,
    "PACKING_MAX_ATTEMPTS": 5,
    "HULL_METHOD": "auto",
    "HULL_AUTO_POINTS": 500,
    "FORMAT": "csv",
    "LOG_CHECKS": True,
    "SLOW_TESTS": False,
}

FORMATS = ("csv", "json")
# "auto" builds small hulls with beneath_beyond and hands clouds of HULL_AUTO_POINTS or more to Qhull
HULL_METHODS = ("auto", "beneath_beyond", "qhull")

# keys of a --config file, with the parser for each value
CONFIG_KEYS = {
    "n": lambda value: int_list(value),
    "N": lambda value: int_list(value),
    "trials": int,
    "samples": int,
    "seed": int,
    "threads": int,
    "out": str,
    "format": str,
    "model": str,
    "hull_method": str,
    "stat": lambda value: str_list(value),
    "grid": lambda value: float_list(value),
}

# options that never change results, so they stay out of the config hash
UNHASHED = ("out", "threads", "format")


def lab_setting(name):
    """
    Look up ``POLYTOPES_<name>`` in the Django settings, falling back to the lab default.

    >>> lab_setting("SIGMA_SLACK")
    4.0
    """
    if name not in DEFAULTS:
        raise KeyError(f"Unknown lab setting: {name!r}")
    return getattr(settings, f"POLYTOPES_{name}", DEFAULTS[name])


def _split(value):
    return [item.strip() for item in str(value).split(",") if item.strip()]


def int_list(value):
    """
    Parse a comma-separated list of integers; ``1e4`` style values are accepted when integral.

    >>> int_list("100, 200,1e3")
    (100, 200, 1000)
    """
    items = []
    for item in _split(value):
        try:
            number = float(item)
        except ValueError:
            raise InvalidArgument(f"Not an integer: {item!r}") from None
        if not number.is_integer():
            raise InvalidArgument(f"Not an integer: {item!r}")
        items.append(int(number))
    if not items:
        raise InvalidArgument("Expected a non-empty comma-separated list")
    return tuple(items)


def float_list(value):
    try:
        items = tuple(float(item) for item in _split(value))
    except ValueError as exc:
        raise InvalidArgument(f"Not a list of numbers: {value!r}") from exc
    if not items:
        raise InvalidArgument("Expected a non-empty comma-separated list")
    return items


def str_list(value):
    return tuple(_split(value))


def read_config_file(path):
    """
    Parse a flat ``key = value`` file whose keys mirror the long command-line flags.

    Blank lines and ``#`` comments are ignored; unknown keys raise ``InvalidArgument``.
    """
    values = {}
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not value:
                raise InvalidArgument(f"{path}:{number}: expected 'key = value'")
            if key not in CONFIG_KEYS:
                raise InvalidArgument(f"{path}:{number}: unknown key {key!r}")
            try:
                values[key] = CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise InvalidArgument(f"{path}:{number}: bad value for {key!r} ({exc})") from exc
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    n_list: tuple = ()
    N_list: tuple = ()
    trials: int = None
    master_seed: int = None
    statistics: tuple = ()
    grid: tuple = ()
    samples: int = None
    model: str = None
    out: str = None
    format: str = "csv"
    threads: int = 1
    hull_method: str = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise InvalidArgument(f"trials must be at least 1, got {self.trials}")
        if self.threads < 1:
            raise InvalidArgument(f"threads must be at least 1, got {self.threads}")
        if self.format not in FORMATS:
            raise InvalidArgument(f"Unknown format {self.format!r}, expected one of {FORMATS}")
        if self.hull_method is not None and self.hull_method not in HULL_METHODS:
            raise InvalidArgument(f"Unknown hull method {self.hull_method!r}, expected one of {HULL_METHODS}")

    @classmethod
    def merge(cls, command, flags, config_path=None, trial_default=True, extra=None):
        """
        Build a config with flags over the ``--config`` file over the settings defaults.

        ``flags`` maps the config-file keys to parsed flag values, None meaning "not given".
        With ``trial_default`` false an unset trial count stays None for the caller to choose.
        """
        from_file = read_config_file(config_path) if config_path else {}

        def pick(key, default=None):
            if flags.get(key) is not None:
                return flags[key]
            return from_file.get(key, default)

        return cls(
            command=command,
            n_list=tuple(pick("n", ())),
            N_list=tuple(pick("N", ())),
            trials=pick("trials", lab_setting("TRIALS") if trial_default else None),
            master_seed=pick("seed", lab_setting("MASTER_SEED")),
            statistics=tuple(pick("stat", ())),
            grid=tuple(pick("grid", ())),
            samples=pick("samples"),
            model=pick("model"),
            out=pick("out"),
            format=pick("format", lab_setting("FORMAT")),
            threads=pick("threads", lab_setting("THREADS")),
            hull_method=pick("hull_method", lab_setting("HULL_METHOD")),
            extra=extra or {},
        )

    def config_hash(self):
        """First 16 hex digits of the SHA-256 of the canonical JSON form (output-only options excluded)."""
        data = {key: value for key, value in asdict(self).items() if key not in UNHASHED}
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def metadata(self):
        return {
            "command": self.command,
            "seed": self.master_seed,
            "config_hash": self.config_hash(),
            "version": __version__,
        }
