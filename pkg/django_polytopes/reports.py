"""Check reports and the CSV / JSON artifacts the commands write."""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

from django_polytopes.conf import lab_setting
from django_polytopes.exceptions import InvalidInput

AGGREGATE_HEADER = ["n", "N", "trials", "stat", "mean", "stderr"]
SIDES = ("upper", "lower", "sandwich", "equality")


def _finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


@dataclass
class BoundReport:
    """
    One comparison of an analytic bound with a Monte-Carlo estimate.

    ``side`` says how the two are compared: an upper bound passes when
    empirical <= bound + slack * stderr, a lower bound when empirical >= bound - slack * stderr,
    a sandwich when both hold (with ``lower_value`` as the lower side) and an equality when
    |empirical - bound| <= slack * stderr. A report flagged ``inconclusive`` is neither passed
    nor failed.
    """

    bound_name: str
    params: dict
    bound_value: float
    empirical_value: float
    empirical_stderr: float
    side: str = "upper"
    lower_value: float = None
    slack: float = field(default_factory=lambda: lab_setting("SIGMA_SLACK"))
    inconclusive: bool = False
    note: str = ""

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"Unknown comparison side {self.side!r}")

    @property
    def satisfied(self):
        margin = self.slack * self.empirical_stderr
        if self.side == "upper":
            return self.empirical_value <= self.bound_value + margin
        if self.side == "lower":
            return self.empirical_value >= self.bound_value - margin
        if self.side == "equality":
            return abs(self.empirical_value - self.bound_value) <= margin
        below = self.lower_value is None or self.empirical_value >= self.lower_value - margin
        return below and self.empirical_value <= self.bound_value + margin

    @property
    def status(self):
        if self.inconclusive:
            return "inconclusive"
        return "pass" if self.satisfied else "fail"

    def params_label(self):
        return ", ".join(f"{key}={value}" for key, value in self.params.items())

    def to_dict(self):
        data = asdict(self)
        for key in ("bound_value", "empirical_value", "empirical_stderr", "lower_value"):
            data[key] = _finite_or_none(data[key])
        data["satisfied"] = self.satisfied
        data["status"] = self.status
        return data


def metadata_lines(metadata):
    return [f"# {key}={value}" for key, value in metadata.items()]


def aggregate_rows(stats):
    """Long-format rows (n, N, trials, stat, mean, stderr) for a sequence of ``AggregateStat``."""
    rows = []
    for stat in stats:
        for name, (mean, stderr) in stat.values.items():
            rows.append([stat.n, stat.N, stat.trials, name, repr(float(mean)), "" if stderr is None else repr(stderr)])
    return rows


def render_aggregate_csv(stats, metadata):
    buffer = io.StringIO()
    for line in metadata_lines(metadata):
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(AGGREGATE_HEADER)
    writer.writerows(aggregate_rows(stats))
    return buffer.getvalue()


def render_aggregate_json(stats, metadata):
    rows = [dict(zip(AGGREGATE_HEADER, row)) for row in aggregate_rows(stats)]
    for row in rows:
        row["mean"] = float(row["mean"])
        row["stderr"] = float(row["stderr"]) if row["stderr"] != "" else None
    return json.dumps({"metadata": metadata, "rows": rows}, indent=2, sort_keys=True) + "\n"


def read_aggregate_rows(path):
    """
    Parse an aggregate file (CSV with ``#`` metadata lines, or the JSON rendering) into dict rows.

    Raises ``InvalidInput`` when the file does not follow the aggregate schema.
    """
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    if text.lstrip().startswith("{"):
        try:
            rows = json.loads(text)["rows"]
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidInput(f"{path}: not an aggregate JSON file ({exc})") from exc
    else:
        lines = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
        reader = csv.DictReader(lines)
        if reader.fieldnames != AGGREGATE_HEADER:
            raise InvalidInput(f"{path}: expected header {','.join(AGGREGATE_HEADER)}, got {reader.fieldnames}")
        rows = list(reader)
    parsed = []
    for number, row in enumerate(rows, start=1):
        try:
            stderr = row.get("stderr")
            parsed.append(
                {
                    "n": int(row["n"]),
                    "N": int(row["N"]),
                    "trials": int(row["trials"]),
                    "stat": str(row["stat"]),
                    "mean": float(row["mean"]),
                    "stderr": None if stderr in (None, "") else float(stderr),
                }
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"{path}: malformed row {number} ({exc})") from exc
    return parsed


def render_json(payload):
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _table_cell(value):
    return _finite_or_none(value) if isinstance(value, float) else value


def render_table_csv(rows, metadata):
    """CSV of dict rows; the columns are the union of the row keys in first-seen order."""
    rows = [{key: _table_cell(value) for key, value in row.items()} for row in rows]
    buffer = io.StringIO()
    for line in metadata_lines(metadata):
        buffer.write(line + "\n")
    fields = list(dict.fromkeys(key for row in rows for key in row))
    writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def render_table_json(rows, metadata):
    rows = [{key: _table_cell(value) for key, value in row.items()} for row in rows]
    return render_json({"metadata": metadata, "rows": rows})
