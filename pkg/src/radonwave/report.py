"""Experiment reports: parameter sweeps with measured values, bounds, ratios.

A report is a small table plus metadata: one row per sweep point, each row
mapping column names to numbers (or short strings), an optional fitted
log-log exponent, and a verdict in {"bounded", "unconverged", "violation"}.
Serialization to CSV (rows only) and JSON (everything) is deterministic:
given identical inputs the emitted bytes are identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["ExperimentReport", "fit_loglog", "ratio_envelope"]

VERDICTS = ("bounded", "unconverged", "violation")


def fit_loglog(x, y):
    """Least-squares slope of log(y) against log(x).

    Returns None when fewer than two distinct positive points are
    available (the exponent is then undefined, reported as absent).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size < 2 or np.unique(x).size < 2:
        return None
    slope = np.polyfit(np.log(x), np.log(y), 1)[0]
    return float(slope)


def ratio_envelope(ratios):
    """max/min over positive finite ratios; None if fewer than one survives."""
    r = np.asarray([v for v in ratios if v is not None], dtype=float)
    r = r[np.isfinite(r) & (r > 0)]
    if r.size == 0:
        return None
    return float(r.max() / r.min())


def _jsonify(value):
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


@dataclass
class ExperimentReport:
    name: str
    parameters: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    fitted_exponent: float | None = None
    verdict: str = "bounded"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")

    @property
    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.columns
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow([_format_cell(row.get(c)) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "name": self.name,
            "parameters": {k: _jsonify(v) for k, v in sorted(self.parameters.items())},
            "rows": [{k: _jsonify(v) for k, v in row.items()} for row in self.rows],
            "fitted_exponent": _jsonify(self.fitted_exponent),
            "verdict": self.verdict,
            "extra": {k: _jsonify(v) for k, v in sorted(self.extra.items())},
        }
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"

    def write(self, directory, stem: str | None = None):
        """Write <stem>.csv and <stem>.json under ``directory``; returns the paths."""
        import pathlib

        directory = pathlib.Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        stem = stem or self.name
        csv_path = directory / f"{stem}.csv"
        json_path = directory / f"{stem}.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json())
        return csv_path, json_path

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        data = json.loads(text)
        return cls(
            name=data["name"],
            parameters=data.get("parameters", {}),
            rows=data.get("rows", []),
            fitted_exponent=data.get("fitted_exponent"),
            verdict=data.get("verdict", "bounded"),
            extra=data.get("extra", {}),
        )


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return value
