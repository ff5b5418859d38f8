"""CSV/JSON export with embedded provenance.

Every CSV starts with a single ``#`` comment line carrying the package
version and a hash of the producing configuration; a JSON sidecar
(``<name>.meta.json``) holds the full resolved configuration.  Readers skip
comment lines, so the column schema stays clean.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .model import characteristic_time
from .poles import Pole
from .propagator import SurvivalSeries

__all__ = [
    "config_digest", "write_csv", "read_csv_columns", "write_json",
    "survival_rows", "pole_rows", "write_survival", "write_poles",
    "SURVIVAL_COLUMNS", "POLE_COLUMNS",
]

SURVIVAL_COLUMNS = ["t", "t_over_tau0", "p_total", "p_bg", "p_poles",
                    "p_interf", "err_est"]
POLE_COLUMNS = ["n", "re_k", "im_k", "gamma", "tau_over_tau0", "q_value",
                "residual"]


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def config_digest(config) -> str:
    """Stable short hash of a configuration mapping or dataclass."""
    blob = json.dumps(_plain(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path, columns, rows, config=None):
    """Write rows with a provenance comment line and a JSON sidecar."""
    path = Path(path)
    digest = config_digest(config or {})
    with path.open("w", newline="") as fh:
        fh.write(f"# deltashell {__version__} config={digest}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating))
                        else v for v in row])
    sidecar = {"version": __version__, "config_digest": digest,
               "columns": list(columns), "config": _plain(config or {})}
    path.with_suffix(path.suffix + ".meta.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def read_csv_columns(path, required=None):
    """Read a provenance-tagged CSV into a dict of float arrays."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh
                                      if not line.startswith("#")) if r]
    if not rows:
        raise ValueError(f"{path}: no data")
    header, data = rows[0], rows[1:]
    if required:
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
    cols = {name: np.array([float(r[i]) for r in data])
            for i, name in enumerate(header)}
    return cols


def write_json(path, payload, config=None):
    path = Path(path)
    doc = {"version": __version__,
           "config_digest": config_digest(config or {}),
           **_plain(payload)}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def survival_rows(series: SurvivalSeries):
    tau0 = series.tau0()
    for i, t in enumerate(series.times):
        yield (t, t / tau0, series.p_total[i], series.p_bg[i],
               series.p_poles[i], series.p_interf[i], series.err_est[i])


def pole_rows(poles: list[Pole]):
    for p in poles:
        yield (p.index, p.momentum.real, p.momentum.imag, p.width,
               p.lifetime_over_tau0(), p.q_value, p.residual)


def write_survival(path, series: SurvivalSeries, config=None):
    return write_csv(path, SURVIVAL_COLUMNS, survival_rows(series),
                     config=config or series.meta.get("series_cfg"))


def write_poles(path, poles: list[Pole], config=None):
    return write_csv(path, POLE_COLUMNS, pole_rows(poles), config=config)
