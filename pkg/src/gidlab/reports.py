"""Experiment reports (JSON) and CSV artifacts."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


@dataclass
class ExperimentReport:
    experiment: str
    parameters: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    verdict: str = "pass"
    seed: int | None = None
    runtime_seconds: float = 0.0
    artifacts: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "metrics": self.metrics,
            "verdict": self.verdict,
            "seed": self.seed,
            "runtime_seconds": self.runtime_seconds,
            "artifacts": [str(a) for a in self.artifacts],
        }


def _plain(obj: Any):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def report_json(report: ExperimentReport) -> str:
    return json.dumps(_plain(report.as_dict()), sort_keys=True, indent=2)


def emit_report(report: ExperimentReport, path) -> None:
    """Write ``report`` as JSON with sorted keys."""
    Path(path).write_text(report_json(report) + "\n")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_times_csv(path) -> np.ndarray:
    """First column of a CSV with a header row (``value`` or ``time``)."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        next(r, None)
        return np.array([float(row[0]) for row in r if row], dtype=float)
