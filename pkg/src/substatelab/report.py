"""Check rows and experiment reports written by the command line runner."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("check_name", "measured", "bound", "tolerance", "pass")


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


@dataclass
class CheckRow:
    """``measured <= bound + tolerance`` (or ``>=`` with ``sense=">="``)."""

    check_name: str
    measured: float
    bound: float
    tolerance: float = 0.0
    sense: str = "<="
    passed: bool | None = None

    def __post_init__(self):
        self.measured, self.bound, self.tolerance = float(self.measured), float(self.bound), float(self.tolerance)
        if self.passed is None:
            if self.sense == "<=":
                self.passed = self.measured <= self.bound + self.tolerance
            elif self.sense == ">=":
                self.passed = self.measured >= self.bound - self.tolerance
            elif self.sense == "==":
                self.passed = abs(self.measured - self.bound) <= self.tolerance
            else:
                raise ValueError(f"unknown sense {self.sense!r}")
        self.passed = bool(self.passed)

    def to_json(self) -> dict:
        return clean({"check_name": self.check_name, "measured": self.measured, "bound": self.bound,
                      "tolerance": self.tolerance, "sense": self.sense, "pass": self.passed})


@dataclass
class ExperimentReport:
    command: str
    seed: int
    inputs: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0
    shortfall: bool = False

    def add(self, *rows: CheckRow) -> None:
        self.rows.extend(rows)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def input_digest(self) -> str:
        blob = json.dumps(clean(self.inputs), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def exit_code(self) -> int:
        if not self.passed:
            return 1
        return 3 if self.shortfall else 0

    def to_json(self, with_time: bool = True) -> dict:
        out = {
            "command": self.command,
            "seed": self.seed,
            "input_digest": self.input_digest,
            "inputs": self.inputs,
            "passed": self.passed,
            "shortfall": self.shortfall,
            "rows": [r.to_json() for r in self.rows],
            "details": self.details,
        }
        if with_time:
            out["wall_time"] = self.wall_time
        return clean(out)

    def dumps(self, with_time: bool = True) -> str:
        return json.dumps(self.to_json(with_time), sort_keys=True, indent=2)

    def write(self, out_dir: Path, stem: str | None = None) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = stem or self.command.replace(" ", "_")
        jpath, cpath = out_dir / f"{stem}.json", out_dir / f"{stem}.csv"
        jpath.write_text(self.dumps() + "\n")
        with cpath.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in self.rows:
                w.writerow([r.check_name, repr(r.measured), repr(r.bound), repr(r.tolerance), r.passed])
        return jpath, cpath


def strip_wall_time(doc):
    """Drop every ``wall_time`` entry, recursively."""
    if isinstance(doc, dict):
        return {k: strip_wall_time(v) for k, v in doc.items() if k != "wall_time"}
    if isinstance(doc, list):
        return [strip_wall_time(v) for v in doc]
    return doc
