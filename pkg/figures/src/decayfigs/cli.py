"""decayfigs command line: render figures from exported CSV files.

``decayfigs render --spec spec.json`` drives everything from a spec file;
``decayfigs fig1|fig2a|fig2b|fig3a|fig3b ...`` are direct shortcuts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .figures import PlotSpec, render, FIGURE_KINDS, NORMALIZATIONS
from .schema import SchemaError


def _spec_from_file(path: str) -> list[PlotSpec]:
    doc = json.loads(Path(path).read_text())
    entries = doc if isinstance(doc, list) else [doc]
    specs = []
    for e in entries:
        specs.append(PlotSpec(
            kind=e["kind"], inputs=tuple(e["inputs"]), output=e["output"],
            normalization=e.get("normalization", "t_over_tau_fit"),
            experiment=e.get("experiment"), labels=tuple(e.get("labels", ())),
            tau_fit=tuple(e.get("tau_fit", ())), title=e.get("title", "")))
    return specs


def build_parser():
    ap = argparse.ArgumentParser(prog="decayfigs",
                                 description="Render survival-curve figures "
                                             "from exported CSVs.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render figures from a JSON spec file")
    p.add_argument("--spec", required=True)
    for kind in FIGURE_KINDS:
        p = sub.add_parser(kind, help=f"render a {kind} figure directly")
        p.add_argument("--csv", nargs="+", required=True,
                       help="survival/model-curve CSV file(s)")
        p.add_argument("--out", required=True)
        p.add_argument("--normalization", choices=NORMALIZATIONS,
                       default="t_over_tau_fit" if kind == "fig1" else "raw")
        p.add_argument("--experiment", default=None,
                       help="measured decay CSV (fig3)")
        p.add_argument("--labels", nargs="*", default=[])
        p.add_argument("--tau-fit", nargs="*", type=float, default=[])
        p.add_argument("--title", default="")
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "render":
            specs = _spec_from_file(args.spec)
        else:
            specs = [PlotSpec(kind=args.command, inputs=tuple(args.csv),
                              output=args.out,
                              normalization=args.normalization,
                              experiment=args.experiment,
                              labels=tuple(args.labels),
                              tau_fit=tuple(args.tau_fit), title=args.title)]
        for spec in specs:
            out = render(spec)
            print(f"{spec.kind} -> {out}")
        return 0
    except (SchemaError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
