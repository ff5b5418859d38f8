"""CSV schema validation for the model CLI's export formats."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

SURVIVAL_COLUMNS = ["t", "t_over_tau0", "p_total", "p_bg", "p_poles",
                    "p_interf", "err_est"]
EXPERIMENT_COLUMNS = ["t_ns", "intensity"]


class SchemaError(ValueError):
    """A referenced CSV is missing, malformed, or carries the wrong columns."""


def _read_columns(path: Path, required: list[str]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise SchemaError(f"{path}: file does not exist")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh
                                      if not line.startswith("#")) if r]
    if not rows:
        raise SchemaError(f"{path}: no header row")
    header, data = rows[0], rows[1:]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required columns {missing}")
    if not data:
        raise SchemaError(f"{path}: empty series (header only)")
    try:
        cols = {name: np.array([float(r[i]) for r in data])
                for i, name in enumerate(header)}
    except (ValueError, IndexError) as exc:
        raise SchemaError(f"{path}: non-numeric cell ({exc})") from None
    return cols


def load_survival(path) -> dict[str, np.ndarray]:
    return _read_columns(Path(path), SURVIVAL_COLUMNS)


def load_experiment(path) -> dict[str, np.ndarray]:
    return _read_columns(Path(path), EXPERIMENT_COLUMNS)


def load_sidecar(csv_path) -> dict:
    """Companion ``<stem>.run.json`` with lifetimes/time scales, if present."""
    p = Path(csv_path)
    side = p.with_name(p.name[:-len(p.suffix)] + ".run.json")
    if not side.exists():
        return {}
    return json.loads(side.read_text())
