"""Tiny row table with deterministic CSV and JSON output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np


def format_cell(v) -> str:
    """Stable text for a cell: shortest round-trip repr for floats."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, dict):
        return {k: jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v


@dataclass
class Table:
    """Named columns, rows of dicts and free-form metadata."""

    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, **row) -> None:
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.asarray([r[name] for r in self.rows])

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self, path, extra: dict | None = None) -> None:
        """Write the rows; ``extra`` columns (e.g. a config hash) repeat on every row."""
        extra = extra or {}
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(self.columns) + list(extra))
            for r in self.rows:
                w.writerow([format_cell(r.get(c)) for c in self.columns] + [format_cell(v) for v in extra.values()])

    def to_dict(self) -> dict:
        return jsonable({"columns": list(self.columns), "rows": self.rows, "meta": self.meta})

    def to_json(self, path, extra: dict | None = None) -> None:
        doc = self.to_dict()
        doc.update(jsonable(extra or {}))
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
