"""Benchmark-table reproduction with pass/fail verdicts.

Reference values and tolerances for the three benchmark tables of the
delta-shell model: pole weights at lam = 8, power-law exponents, and the
Q-value/lifetime quality analysis.  Fit windows for the lifetime table are
pinned here (in units of the fitted lifetime) so the reproduction is
deterministic; fitted values are window-dependent and the defaults below
reproduce the reference analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, InitialState, characteristic_time
from .poles import find_poles, pole_weight
from .propagator import SeriesConfig, survival_series
from .analysis import fit_exponential, fit_powerlaw

__all__ = [
    "WEIGHT_TABLE_REF", "EXPONENT_TABLE_REF", "QUALITY_TABLE_REF",
    "TABLE_RUN_SETTINGS", "TableCell", "weight_table", "exponent_table",
    "quality_table", "render_table",
]

# lam = 8 pole weights c_1..c_5 for initial states n = 1..4; tolerance 1%.
WEIGHT_TABLE_REF = {
    1: (1.012, 0.022, 0.005, 0.002, 0.001),
    2: (0.016, 1.059, 0.060, 0.013, 0.006),
    3: (0.005, 0.036, 1.148, 0.106, 0.023),
    4: (0.003, 0.013, 0.057, 1.270, 0.157),
}

# power-law exponent: central value and 1-sigma fit uncertainty; the
# acceptance band is central +- 3 sigma.
EXPONENT_TABLE_REF = {
    0.3: (3.010, 0.017),
    0.65: (2.996, 0.020),
    1.0: (2.992, 0.012),
    3.6: (3.000, 0.040),
}

# Q, tau_fit/tau0, tau_pole/tau0, lifetime discrepancy in percent (relative
# to the mean of the two lifetimes).
QUALITY_TABLE_REF = {
    0.3: (0.208, 204.0, 119.0, 53.0),
    0.65: (0.454, 47.0, 33.9, 32.0),
    1.0: (0.667, 20.8, 17.6, 17.0),
    3.6: (2.48, 3.55, 3.48, 2.0),
}

def _load_run_settings():
    """Pinned per-lambda table-run settings from the checked-in config file."""
    import yaml
    from importlib import resources
    text = resources.files("deltashell").joinpath("table_runs.yaml").read_text()
    raw = yaml.safe_load(text)
    return {float(lam): {"t_range": tuple(float(x) for x in v["t_range"]),
                         "exp_window": tuple(float(x) for x in v["exp_window"])}
            for lam, v in raw.items()}


TABLE_RUN_SETTINGS = _load_run_settings()

QUALITY_TOL = {0.3: 0.05, 0.65: 0.02, 1.0: 0.02, 3.6: 0.02}
DISCREPANCY_TOL_PP = 5.0


@dataclass(frozen=True)
class TableCell:
    label: str
    value: float
    reference: float
    tolerance: float          # absolute tolerance on value - reference
    passed: bool


def _cell(label, value, reference, tolerance) -> TableCell:
    return TableCell(label, float(value), float(reference), float(tolerance),
                     bool(abs(value - reference) <= tolerance))


def weight_table(lam: float = 8.0, states=(1, 2, 3, 4), n_weights: int = 5,
                 rel_tol: float = 0.01, printed_quantum: float = 1e-3):
    """Pole weights c_n for several initial states.

    Tolerance per cell: ``rel_tol`` of the reference or half the quantization
    step of the printed 3-decimal reference values, whichever is larger (the
    small off-diagonal entries are only published to 0.001).
    """
    params = ModelParams(lam=lam)
    poles = find_poles(params, n_weights)
    cells = []
    for n in states:
        state = InitialState(n)
        ref_row = WEIGHT_TABLE_REF.get(n)
        for j, pole in enumerate(poles):
            w = pole_weight(pole, state, params).weight
            ref = ref_row[j] if ref_row and j < len(ref_row) else np.nan
            tol = max(rel_tol * ref, 0.5 * printed_quantum) \
                if np.isfinite(ref) else np.inf
            cells.append(_cell(f"n={n} c_{j + 1}", w, ref, tol))
    return cells


def _series_for(lam: float, series_cfg: SeriesConfig | None = None):
    settings = TABLE_RUN_SETTINGS.get(lam, {"t_range": (1e-3, 1e3)})
    lo, hi = settings["t_range"]
    base = series_cfg or SeriesConfig()
    scfg = SeriesConfig(t_min_tau0=lo, t_max_tau0=hi, n_times=base.n_times,
                        pole_count=base.pole_count,
                        eval_pole_count=base.eval_pole_count,
                        switch_bound=base.switch_bound, nx_cap=base.nx_cap,
                        error_pass=base.error_pass, quad=base.quad)
    return survival_series(InitialState(1), ModelParams(lam=lam), series_cfg=scfg)


def exponent_table(lams=(0.3, 0.65, 1.0, 3.6), series_map=None,
                   n_sigma: float = 3.0):
    """Fitted late-time exponents against the reference bands."""
    cells = []
    for lam in lams:
        ser = series_map[lam] if series_map else _series_for(lam)
        fit = fit_powerlaw(ser)
        ref, sigma = EXPONENT_TABLE_REF[lam]
        cells.append(_cell(f"lam={lam} n", fit.parameter, ref, n_sigma * sigma))
    return cells


def quality_table(lams=(0.3, 0.65, 1.0, 3.6), series_map=None):
    """Q-values and lifetimes both ways, with the tabulated tolerances."""
    cells = []
    for lam in lams:
        params = ModelParams(lam=lam)
        tau0 = characteristic_time(params)
        pole1 = find_poles(params, 1)[0]
        ser = series_map[lam] if series_map else _series_for(lam)
        window = TABLE_RUN_SETTINGS[lam]["exp_window"]
        fit = fit_exponential(ser, window=window)
        q_ref, tf_ref, tp_ref, disc_ref = QUALITY_TABLE_REF[lam]
        tol = QUALITY_TOL[lam]
        tau_fit = fit.parameter / tau0
        tau_pole = pole1.lifetime / tau0
        disc = abs(tau_fit - tau_pole) / (0.5 * (tau_fit + tau_pole)) * 100.0
        cells.extend([
            _cell(f"lam={lam} Q", pole1.q_value, q_ref, 0.02 * q_ref),
            _cell(f"lam={lam} tau_fit/tau0", tau_fit, tf_ref, tol * tf_ref),
            _cell(f"lam={lam} tau_pole/tau0", tau_pole, tp_ref, tol * tp_ref),
            _cell(f"lam={lam} disc_pct", disc, disc_ref, DISCREPANCY_TOL_PP),
        ])
    return cells


def render_table(cells, title: str) -> str:
    """Aligned plain-text rendering with a PASS/FAIL column."""
    lines = [title, "-" * len(title),
             f"{'quantity':<22}{'value':>14}{'reference':>14}{'tol':>12}  verdict"]
    for c in cells:
        verdict = "PASS" if c.passed else "FAIL"
        lines.append(f"{c.label:<22}{c.value:>14.6g}{c.reference:>14.6g}"
                     f"{c.tolerance:>12.3g}  {verdict}")
    npass = sum(c.passed for c in cells)
    lines.append(f"{npass}/{len(cells)} cells within tolerance")
    return "\n".join(lines)
