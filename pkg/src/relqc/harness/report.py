"""Rows, reports and their CSV / JSON serialization.

Every row carries the observed value next to its analytic target, the
tolerance and the comparison used, so a CSV can be checked on its own.
Floats are written with ``repr`` so files round-trip exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

from ..errors import ConfigError

RELATIONS = ("abs", "ge", "le")
FIXED_COLUMNS = ("quantity", "relation", "target", "observed", "tolerance", "passed")


def check(relation: str, target: float, observed: float, tolerance: float) -> bool:
    if not (math.isfinite(observed) and math.isfinite(target)):
        return False
    if relation == "abs":
        return abs(observed - target) <= tolerance
    if relation == "ge":
        return observed >= target - tolerance
    if relation == "le":
        return observed <= target + tolerance
    raise ValueError(f"unknown relation {relation!r}")


@dataclass
class Row:
    quantity: str
    target: float
    observed: float
    tolerance: float
    relation: str = "abs"
    keys: dict = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        clash = set(self.keys) & set(FIXED_COLUMNS)
        if clash:
            raise ValueError(f"key columns {sorted(clash)} collide with fixed columns")
        self.target, self.observed, self.tolerance = float(self.target), float(self.observed), float(self.tolerance)
        self.passed = check(self.relation, self.target, self.observed, self.tolerance)

    def as_dict(self) -> dict:
        d = dict(self.keys)
        d.update(quantity=self.quantity, relation=self.relation, target=self.target,
                 observed=self.observed, tolerance=self.tolerance, passed=self.passed)
        return d


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, tuples lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class ExperimentReport:
    config: dict
    rows: list[Row]
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> list[Row]:
        return [r for r in self.rows if not r.passed]

    def columns(self) -> list[str]:
        keys: list[str] = []
        for r in self.rows:
            for k in r.keys:
                if k not in keys:
                    keys.append(k)
        return keys + list(FIXED_COLUMNS)

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = self.columns()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            d = r.as_dict()
            w.writerow([_fmt(d.get(c, "")) for c in cols])
        return buf.getvalue()

    def summary_dict(self) -> dict:
        return {
            "config": self.config,
            "summary": self.summary,
            "n_rows": len(self.rows),
            "n_failed": len(self.failures),
            "failed": [r.quantity + "".join(f"[{k}={_fmt(v)}]" for k, v in r.keys.items()) for r in self.failures],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return dumps(self.summary_dict())

    def write(self, out_dir: str, stem: str) -> tuple[str, str]:
        try:
            os.makedirs(out_dir, exist_ok=True)
            csv_path = os.path.join(out_dir, f"{stem}.csv")
            json_path = os.path.join(out_dir, f"{stem}.json")
            with open(csv_path, "w", encoding="utf-8", newline="") as f:
                f.write(self.to_csv())
            with open(json_path, "w", encoding="utf-8") as f:
                f.write(self.to_json())
        except OSError as e:
            raise ConfigError(f"cannot write results to {out_dir}: {e}") from e
        return csv_path, json_path
