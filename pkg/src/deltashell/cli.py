"""Command-line front end.

Subcommands: poles, survival, decompose, tdse-validate, fit, tables, compare,
scale.  A YAML config file supplies defaults; flags override.  Exit codes:
0 success, 2 usage error, 3 numerical non-convergence, 4 data validation
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .model import ModelParams, InitialState, characteristic_time
from .poles import find_poles, PoleError
from .propagator import (QuadratureConfig, SeriesConfig, QuadratureError,
                         survival_series, wavefield)
from .tdse import validate_against_contour
from .analysis import (fit_exponential, fit_powerlaw, measure_breakdown,
                       detect_oscillations, FitError)
from .compare import (ingest_decay_csv, lambda_scan, scale_mapping,
                      DataValidationError)
from . import io as dio
from . import tables as dtables

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_DATA = 0, 2, 3, 4


def _load_config(path):
    if not path:
        return {}
    doc = yaml.safe_load(Path(path).read_text())
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise DataValidationError(f"{path}: config must be a mapping")
    return doc


def _series_config(cfg: dict) -> SeriesConfig:
    quad_over = cfg.get("quadrature", {})
    quad = QuadratureConfig(**quad_over) if quad_over else QuadratureConfig()
    keys = ("t_min_tau0", "t_max_tau0", "n_times", "pole_count",
            "eval_pole_count", "switch_bound", "nx_cap", "error_pass")
    over = {k: cfg[k] for k in keys if k in cfg}
    return SeriesConfig(quad=quad, **over)


def _run_config(args, extra=None):
    cfg = dict(_load_config(getattr(args, "config", None)))
    for key, val in vars(args).items():
        if key in ("func", "config") or val is None:
            continue
        cfg[key] = val
    if extra:
        cfg.update(extra)
    return cfg


def _out_dir(args) -> Path:
    out = Path(getattr(args, "output_dir", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _one_survival(job):
    lam, n, cfg_dict = job
    scfg = _series_config(cfg_dict)
    ser = survival_series(InitialState(n), ModelParams(lam=lam), series_cfg=scfg)
    return lam, ser


def cmd_poles(args):
    cfg = _run_config(args)
    out = _out_dir(args)
    for lam in args.lam:
        params = ModelParams(lam=lam)
        poles = find_poles(params, args.count)
        stem = out / f"poles_lam{lam:g}"
        if args.format in ("csv", "both"):
            dio.write_poles(Path(str(stem) + ".csv"), poles, config=cfg)
        if args.format in ("json", "both"):
            payload = {"lam": lam, "poles": [{
                "n": p.index, "re_k": p.momentum.real, "im_k": p.momentum.imag,
                "gamma": p.width, "tau_over_tau0": p.lifetime_over_tau0(),
                "q_value": p.q_value, "residual": p.residual,
                "poorly_formed": p.poorly_formed} for p in poles]}
            dio.write_json(Path(str(stem) + ".json"), payload, config=cfg)
        flagged = sum(p.poorly_formed for p in poles)
        print(f"lam={lam:g}: {len(poles)} poles -> {stem}.{args.format}"
              + (f" ({flagged} poorly formed, Q < 0.5)" if flagged else ""))
    return EXIT_OK


def cmd_survival(args):
    if not args.lam:
        raise UsageError("at least one --lam value is required")
    cfg = _run_config(args)
    out = _out_dir(args)
    jobs = [(lam, args.state, cfg) for lam in args.lam]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_one_survival, jobs))
    else:
        results = [_one_survival(j) for j in jobs]
    for lam, ser in results:
        stem = out / f"survival_lam{lam:g}"
        sidecar = {"lam": lam, "state": args.state,
                   "tau0": ser.tau0(), "t_switch": ser.meta.get("t_switch")}
        if args.fit:
            try:
                fit = fit_exponential(ser)
                sidecar["tau_fit"] = fit.parameter
                sidecar["tau_fit_over_tau0"] = fit.parameter / ser.tau0()
            except FitError as exc:
                sidecar["tau_fit_error"] = str(exc)
        if args.format in ("csv", "both"):
            dio.write_survival(Path(str(stem) + ".csv"), ser, config=cfg)
        if args.format in ("json", "both"):
            rows = list(dio.survival_rows(ser))
            dio.write_json(Path(str(stem) + ".json"),
                           {**sidecar, "columns": dio.SURVIVAL_COLUMNS,
                            "rows": rows}, config=cfg)
        dio.write_json(out / f"survival_lam{lam:g}.run.json", sidecar, config=cfg)
        print(f"lam={lam:g}: {len(ser.times)} times -> {stem}.csv")
    return EXIT_OK


def cmd_decompose(args):
    cfg = _run_config(args)
    out = _out_dir(args)
    params = ModelParams(lam=args.lam[0])
    state = InitialState(args.state)
    tau0 = characteristic_time(params)
    columns = ["x", "re_total", "im_total", "re_bg", "im_bg", "re_poles", "im_poles"]
    for t_tau0 in args.times:
        t = t_tau0 * tau0
        bg = wavefield(np.linspace(0, params.well_width, 101), t, state, params,
                       "background_only", pole_count=args.count)
        po = wavefield(bg.grid, t, state, params, "poles_only", pole_count=args.count)
        tot = bg.values + po.values
        rows = [(x, tot[i].real, tot[i].imag, bg.values[i].real,
                 bg.values[i].imag, po.values[i].real, po.values[i].imag)
                for i, x in enumerate(bg.grid)]
        path = out / f"field_lam{args.lam[0]:g}_t{t_tau0:g}tau0.csv"
        dio.write_csv(path, columns, rows, config=cfg)
        print(f"t = {t_tau0:g} tau0 -> {path}")
    return EXIT_OK


def cmd_tdse_validate(args):
    cfg = _run_config(args)
    out = _out_dir(args)
    params = ModelParams(lam=args.lam[0])
    report = validate_against_contour(
        params, InitialState(args.state),
        deltas=tuple(args.deltas), domain_length=args.domain_length)
    path = out / f"tdse_validation_lam{args.lam[0]:g}.json"
    dio.write_json(path, report, config=cfg)
    print(f"extrapolated |psi|^2 = {report['extrapolated']:.6f}  "
          f"contour = {report['contour_value']:.6f}  "
          f"rel diff = {report['relative_difference']:.2e} -> {path}")
    return EXIT_OK


def cmd_fit(args):
    cfg = _run_config(args)
    out = _out_dir(args)
    cols = dio.read_csv_columns(args.input, required=dio.SURVIVAL_COLUMNS)
    from .propagator import SurvivalSeries
    params = ModelParams(lam=args.lam[0])
    ser = SurvivalSeries(
        times=cols["t"], p_total=cols["p_total"], p_bg=cols["p_bg"],
        p_poles=cols["p_poles"], p_interf=cols["p_interf"],
        err_est=cols["err_est"], params=params, state=InitialState(args.state))
    tau0 = characteristic_time(params)
    payload = {"lam": args.lam[0], "tau0": tau0}
    exp_fit = fit_exponential(ser, window=tuple(args.exp_window) if args.exp_window else None)
    payload["exponential"] = {
        "tau": exp_fit.parameter, "tau_over_tau0": exp_fit.parameter / tau0,
        "amplitude": exp_fit.amplitude, "uncertainty": exp_fit.uncertainty,
        "window": exp_fit.window, "residual_rms": exp_fit.residual_rms}
    try:
        pow_fit = fit_powerlaw(ser)
        payload["power_law"] = {
            "exponent": pow_fit.parameter, "amplitude": pow_fit.amplitude,
            "uncertainty": pow_fit.uncertainty, "window": pow_fit.window,
            "residual_rms": pow_fit.residual_rms}
        breakdown, deviation = measure_breakdown(ser, exp_fit, pow_fit)
        count, extrema = detect_oscillations(
            ser, window=(exp_fit.window[1], pow_fit.window[0]))
        payload["breakdown_time"] = breakdown
        payload["deviation_time"] = deviation
        payload["oscillations"] = {"count": count, "extrema": list(extrema)}
    except FitError as exc:
        payload["power_law_error"] = str(exc)
    stem = out / (Path(args.input).stem + "_fit")
    dio.write_json(Path(str(stem) + ".json"), payload, config=cfg)
    # residual diagnostics per point
    model = exp_fit.predict(ser.times)
    rows = [(t, p, m, p - m) for t, p, m in zip(ser.times, ser.p_total, model)]
    dio.write_csv(Path(str(stem) + ".csv"), ["t", "p_total", "exp_fit", "residual"],
                  rows, config=cfg)
    print(f"tau_fit = {exp_fit.parameter / tau0:.4g} tau0 -> {stem}.json")
    return EXIT_OK


def cmd_tables(args):
    cfg = _run_config(args)
    out = _out_dir(args)
    scfg = _series_config(cfg)
    series_map = {lam: dtables._series_for(lam, scfg)
                  for lam in (0.3, 0.65, 1.0, 3.6)}
    blocks = [
        ("weights_lam8", dtables.weight_table()),
        ("powerlaw_exponents", dtables.exponent_table(series_map=series_map)),
        ("resonance_quality", dtables.quality_table(series_map=series_map)),
    ]
    all_pass = True
    for name, cells in blocks:
        text = dtables.render_table(cells, name)
        print(text + "\n")
        (out / f"table_{name}.txt").write_text(text + "\n")
        rows = [(c.label, c.value, c.reference, c.tolerance,
                 "PASS" if c.passed else "FAIL") for c in cells]
        dio.write_csv(out / f"table_{name}.csv",
                      ["quantity", "value", "reference", "tolerance", "verdict"],
                      rows, config=cfg)
        all_pass &= all(c.passed for c in cells)
    return EXIT_OK if all_pass else EXIT_NUMERIC


def cmd_compare(args):
    cfg = _run_config(args)
    out = _out_dir(args)
    exp = ingest_decay_csv(args.input, normalization=args.normalization)
    best, entries = lambda_scan(exp, args.grid, InitialState(args.state),
                                tau_exp_ns=args.tau_exp_ns)
    rows = [(e.lam, e.tau_fit, e.time_scale_ns, e.log_residual) for e in entries]
    dio.write_csv(out / "lambda_scan.csv",
                  ["lam", "tau_fit", "ns_per_unit_time", "log_residual"],
                  rows, config=cfg)
    for e in entries:
        if e.lam in args.curves or e.lam == best:
            dio.write_survival(out / f"compare_curve_lam{e.lam:g}.csv", e.series,
                               config=cfg)
            meta = {"lam": e.lam, "tau_fit": e.tau_fit,
                    "ns_per_unit_time": e.time_scale_ns,
                    "normalization": exp.normalization}
            dio.write_json(out / f"compare_curve_lam{e.lam:g}.run.json", meta,
                           config=cfg)
    dio.write_json(out / "lambda_scan.json",
                   {"best_lam": best, "normalization": exp.normalization,
                    "entries": [{"lam": e.lam, "log_residual": e.log_residual,
                                 "tau_fit": e.tau_fit,
                                 "ns_per_unit_time": e.time_scale_ns}
                                for e in entries]}, config=cfg)
    print(f"best lam = {best:g} (normalization: {exp.normalization}) "
          f"-> {out / 'lambda_scan.json'}")
    return EXIT_OK


def cmd_scale(args):
    cfg = _run_config(args)
    value = scale_mapping(args.lam[0], args.tau_th, args.tau_exp_ns * 1e-9)
    az_note = ("for Rhodamine 6G the molecular heuristic A*Z = 479*254 "
               f"= {479 * 254:.3g} lands at the same scale")
    payload = {"lam": args.lam[0], "tau_th_over_tau0": args.tau_th,
               "tau_exp_ns": args.tau_exp_ns,
               "ma2_in_proton_bohr2": value, "note": az_note}
    print(f"m a^2 = {value:.4g} m_p a_0^2   ({az_note})")
    if args.output_dir:
        dio.write_json(_out_dir(args) / "scale_mapping.json", payload, config=cfg)
    return EXIT_OK


class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="deltashell",
        description="Delta-shell decay model: poles, survival curves, "
                    "cross-method validation, and experiment comparison.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, lam_default=None):
        p.add_argument("--config", help="YAML config file (flags override)")
        p.add_argument("--lam", type=float, nargs="+", default=lam_default,
                       help="barrier strength(s)")
        p.add_argument("--state", type=int, default=1,
                       help="initial-state mode index n")
        p.add_argument("--output-dir", dest="output_dir", default=None)
        p.add_argument("--format", choices=("csv", "json", "both"), default="csv")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel workers for sweeps (1 = reference mode)")

    p = sub.add_parser("poles", help="resonance pole table")
    common(p, [3.6])
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_poles)

    p = sub.add_parser("survival", help="survival series P(t) with decomposition")
    common(p, [0.3, 0.65, 1.0, 3.6])
    p.add_argument("--fit", action="store_true",
                   help="also fit the exponential lifetime into the sidecar")
    p.set_defaults(func=cmd_survival)

    p = sub.add_parser("decompose", help="wavefunction decomposition snapshots")
    common(p, [3.6])
    p.add_argument("--times", type=float, nargs="+", default=[0.4],
                   help="snapshot times in units of tau0")
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("tdse-validate",
                       help="grid-evolution cross check with width extrapolation")
    common(p, [8.0])
    p.add_argument("--deltas", type=float, nargs="+",
                   default=[1 / 25, 1 / 50, 1 / 100])
    p.add_argument("--domain-length", type=float, default=14.0)
    p.set_defaults(func=cmd_tdse_validate)

    p = sub.add_parser("fit", help="fit regimes of an exported survival CSV")
    common(p, [3.6])
    p.add_argument("--input", required=True)
    p.add_argument("--exp-window", type=float, nargs=2, default=None,
                   help="pinned exponential window in units of the lifetime")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("tables", help="reproduce the three benchmark tables")
    common(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("compare", help="scan lam against a measured decay CSV")
    common(p, [3.6])
    p.add_argument("--input", required=True, help="two-column t_ns,intensity CSV")
    p.add_argument("--grid", type=float, nargs="+",
                   default=[3.2, 3.4, 3.6, 3.8, 4.0])
    p.add_argument("--curves", type=float, nargs="+", default=[3.2, 3.6, 4.0],
                   help="lam values whose model curves are exported")
    p.add_argument("--normalization", choices=("peak", "first"), default="peak")
    p.add_argument("--tau-exp-ns", dest="tau_exp_ns", type=float, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scale", help="physical mass-size scale from lifetimes")
    common(p, [3.6])
    p.add_argument("--tau-th", dest="tau_th", type=float, default=3.55,
                   help="fitted model lifetime in units of tau0")
    p.add_argument("--tau-exp-ns", dest="tau_exp_ns", type=float, default=3.9)
    p.set_defaults(func=cmd_scale)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, PoleError, FitError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERIC
    except (DataValidationError, FileNotFoundError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
