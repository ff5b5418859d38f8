"""The five figure layouts, rendered deterministically.

fig1   multi-lambda survival, log vertical axis, time in fitted lifetimes
       (every curve starts with slope -1)
fig2a  single-lambda survival, log axis, fitted exponential overlaid,
       small-time inset
fig2b  the same run on log-log axes with the fitted power law overlaid
fig3a  model curves vs measured points, log vertical axis (time in ns)
fig3b  the same comparison on log-log axes

Rendering is pure post-processing of the exported CSVs; the only numbers
computed here are axis transforms and the two straight-line fits drawn in
fig2 (least squares on the already-exported series).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .schema import SchemaError, load_survival, load_experiment, load_sidecar

FIGURE_KINDS = ("fig1", "fig2a", "fig2b", "fig3a", "fig3b")
NORMALIZATIONS = ("raw", "t_over_tau0", "t_over_tau_fit")

_STYLE = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 11,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "lines.linewidth": 1.6,
    "svg.hashsalt": "decayfigs",
}
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    inputs: tuple[str, ...]                 # survival/model-curve CSV paths
    output: str
    normalization: str = "t_over_tau_fit"
    experiment: str | None = None           # fig3 only
    labels: tuple[str, ...] = ()
    tau_fit: tuple[float, ...] = ()          # per-input override (raw units)
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {FIGURE_KINDS}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        if self.kind.startswith("fig3") and not self.experiment:
            raise ValueError("fig3 needs an experiment CSV")


def _tau_fit_for(spec: PlotSpec, i: int, path: str) -> float:
    if i < len(spec.tau_fit):
        return float(spec.tau_fit[i])
    side = load_sidecar(path)
    if "tau_fit" not in side:
        raise SchemaError(
            f"{path}: normalization {spec.normalization!r} needs tau_fit in "
            "the .run.json sidecar (produce the CSV with `survival --fit`) "
            "or an explicit tau_fit entry in the plot spec")
    return float(side["tau_fit"])


def _time_axis(spec: PlotSpec, i: int, path: str, cols) -> tuple[np.ndarray, str]:
    if spec.normalization == "raw":
        return cols["t"], "t"
    if spec.normalization == "t_over_tau0":
        return cols["t_over_tau0"], r"$t/\tau_0$"
    return cols["t"] / _tau_fit_for(spec, i, path), r"$t/\tau$"


def _label_for(spec: PlotSpec, i: int, path: str) -> str:
    if i < len(spec.labels):
        return spec.labels[i]
    side = load_sidecar(path)
    if "lam" in side:
        return f"$\\lambda = {side['lam']:g}$"
    return Path(path).stem


def _save(fig, spec: PlotSpec):
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fmt = out.suffix.lstrip(".").lower() or "png"
    meta = {"Date": None} if fmt == "svg" else {"Software": "decayfigs"}
    fig.savefig(out, format=fmt, metadata=meta)
    plt.close(fig)
    return out


def _fig1(spec: PlotSpec):
    fig, ax = plt.subplots()
    for i, path in enumerate(spec.inputs):
        cols = load_survival(path)
        x, xlabel = _time_axis(spec, i, path, cols)
        ax.semilogy(x, cols["p_total"], color=_COLORS[i % len(_COLORS)],
                    label=_label_for(spec, i, path))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(r"$P(t)$")
    ax.set_ylim(1e-12, 2.0)
    ax.set_xlim(left=0.0)
    ax.legend(frameon=False)
    ax.set_title(spec.title or "Survival probability")
    return fig


def _line_fits(cols):
    """Exponential (early) and power (late) straight lines for the overlays."""
    t, p = cols["t"], cols["p_total"]
    good = p > 0
    t, p = t[good], p[good]
    i_e = int(np.argmin(np.abs(np.log(p) + 1.0)))
    tau = t[i_e]
    m = (t > 0.2 * tau) & (t < 3 * tau)
    sl, ic = np.polyfit(t[m], np.log(p[m]), 1)
    late = t > t[-1] ** 0.8 * t[0] ** 0.2
    sp, ip_ = np.polyfit(np.log(t[late]), np.log(p[late]), 1)
    return (sl, ic), (sp, ip_)


def _fig2(spec: PlotSpec, loglog: bool):
    cols = load_survival(spec.inputs[0])
    (sl, ic), (sp, ip_) = _line_fits(cols)
    t, p = cols["t"], cols["p_total"]
    x, xlabel = _time_axis(spec, 0, spec.inputs[0], cols)
    scale = x[0] / t[0]
    fig, ax = plt.subplots()
    if loglog:
        ax.loglog(x, p, color=_COLORS[0], label="computed")
        tt = np.geomspace(t[0], t[-1], 200)
        ax.plot(tt * scale, np.exp(ip_) * tt**sp, "--", color=_COLORS[1],
                label=f"$t^{{{sp:.2f}}}$")
        ax.plot(tt * scale, np.exp(ic + sl * tt), ":", color=_COLORS[2],
                label="exponential fit")
        ax.set_ylim(max(p[p > 0].min() * 0.3, 1e-14), 3.0)
    else:
        ax.semilogy(x, p, color=_COLORS[0], label="computed")
        tt = np.linspace(t[0], t[-1], 400)
        ax.plot(tt * scale, np.exp(ic + sl * tt), "--", color=_COLORS[1],
                label="exponential fit")
        ax.set_ylim(max(p[p > 0].min() * 0.3, 1e-14), 3.0)
        inset = fig.add_axes((0.22, 0.2, 0.3, 0.26))
        short = slice(0, max(8, len(t) // 12))
        inset.plot(x[short], 1.0 - p[short], color=_COLORS[0])
        inset.set_title(r"$1 - P$, small $t$", fontsize=8)
        inset.tick_params(labelsize=7)
        inset.grid(False)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(r"$P(t)$")
    ax.legend(frameon=False, loc="upper right")
    ax.set_title(spec.title or _label_for(spec, 0, spec.inputs[0]))
    return fig


def _fig3(spec: PlotSpec, loglog: bool):
    exp = load_experiment(spec.experiment)
    fig, ax = plt.subplots()
    plot = ax.loglog if loglog else ax.semilogy
    for i, path in enumerate(spec.inputs):
        cols = load_survival(path)
        side = load_sidecar(path)
        if "ns_per_unit_time" not in side:
            raise SchemaError(
                f"{path}: fig3 needs ns_per_unit_time in the .run.json "
                "sidecar (produce curves with the `compare` command)")
        t_ns = cols["t"] * float(side["ns_per_unit_time"])
        plot(t_ns, cols["p_total"], color=_COLORS[i % len(_COLORS)],
             label=_label_for(spec, i, path))
    pos = exp["intensity"] > 0
    plot(exp["t_ns"][pos], exp["intensity"][pos], "o", ms=3.5,
         color="black", markerfacecolor="none", label="measured")
    ax.set_xlabel("t [ns]")
    ax.set_ylabel("normalized intensity")
    ax.set_ylim(1e-10, 3.0)
    ax.legend(frameon=False)
    ax.set_title(spec.title or "model vs measured decay")
    return fig


def render(spec: PlotSpec) -> Path:
    """Render one figure to spec.output; deterministic for identical inputs."""
    with plt.rc_context(_STYLE):
        if spec.kind == "fig1":
            fig = _fig1(spec)
        elif spec.kind == "fig2a":
            fig = _fig2(spec, loglog=False)
        elif spec.kind == "fig2b":
            fig = _fig2(spec, loglog=True)
        elif spec.kind == "fig3a":
            fig = _fig3(spec, loglog=False)
        else:
            fig = _fig3(spec, loglog=True)
        return _save(fig, spec)
