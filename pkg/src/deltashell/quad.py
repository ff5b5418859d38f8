"""Panelized Gauss-Legendre quadrature with oscillation- and peak-aware panels.

Momentum-axis integrands here oscillate with a cumulative phase
theta(k) = t k^2/2 + rho0 k and, on the real axis, develop Lorentzian peaks of
width |Im k_n| under each resonance.  Panels are sized against both features.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gauss_panels", "phase_edges", "refine_edges_near_peaks", "panel_nodes"]

_LEG_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(nodes: int):
    if nodes not in _LEG_CACHE:
        _LEG_CACHE[nodes] = np.polynomial.legendre.leggauss(nodes)
    return _LEG_CACHE[nodes]


def panel_nodes(edges: np.ndarray, nodes: int):
    """Gauss-Legendre nodes/weights on each panel, flattened."""
    xg, wg = _leggauss(nodes)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    k = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return k, w


def phase_edges(kmax: float, t: float, rho0: float, rad: float, k0: float = 0.0):
    """Edges where theta(k) = t k^2/2 + rho0 k grows by ``rad`` radians."""
    if kmax <= k0:
        return np.array([k0, k0])
    th0 = 0.5 * t * k0 * k0 + rho0 * k0
    th1 = 0.5 * t * kmax * kmax + rho0 * kmax
    npan = max(int(np.ceil((th1 - th0) / rad)), 1)
    theta = th0 + (th1 - th0) * np.arange(npan + 1) / npan
    if t > 0:
        edges = (-rho0 + np.sqrt(rho0 * rho0 + 2.0 * t * theta)) / t
    else:
        edges = theta / rho0
    edges[0], edges[-1] = k0, kmax
    return edges


def refine_edges_near_peaks(edges: np.ndarray, peak_pos: np.ndarray,
                            peak_width: np.ndarray, peak_frac: float = 0.6,
                            peak_span: float = 6.0, wing_span: float = 40.0):
    """Split panels near Lorentzian peaks.

    ``peak_pos``/``peak_width`` are the real parts and |imaginary parts| of
    the resonance momenta.  Panels within ``peak_span`` widths of a peak are
    subdivided to ``peak_frac`` of its width; out to ``wing_span`` widths the
    target grows proportionally to the distance, so the algebraic wings of
    the peak stay resolved without a global density penalty.
    """
    if len(peak_pos) == 0 or len(edges) < 2:
        return edges
    order = np.argsort(peak_pos)
    pos, wid = np.asarray(peak_pos)[order], np.asarray(peak_width)[order]
    sharp = wid < 0.25          # only narrow peaks have wings worth grading
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        i = int(np.searchsorted(pos, mid))
        target = b - a
        for j in range(max(i - 4, 0), min(i + 5, len(pos))):
            dist = max(abs(mid - pos[j]) - 0.5 * (b - a), 0.0)
            if dist <= peak_span * wid[j]:
                target = min(target, peak_frac * wid[j])
            elif sharp[j] and dist < wing_span * wid[j]:
                target = min(target, max(peak_frac * wid[j], 0.45 * dist))
        if target < b - a:
            nsub = int(np.ceil((b - a) / target))
            out.extend(np.linspace(a, b, nsub + 1)[1:])
        else:
            out.append(b)
    return np.array(out)


def gauss_panels(kmax: float, t: float, rho0: float, rad: float, nodes: int,
                 peak_pos=None, peak_width=None, k0: float = 0.0,
                 peak_frac: float = 0.6, peak_span: float = 6.0):
    """Build the full node/weight set for an oscillatory momentum integral."""
    edges = phase_edges(kmax, t, rho0, rad, k0=k0)
    if peak_pos is not None and len(peak_pos):
        edges = refine_edges_near_peaks(edges, peak_pos, peak_width,
                                        peak_frac=peak_frac, peak_span=peak_span)
    return panel_nodes(edges, nodes)
