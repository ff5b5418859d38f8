"""Wavefunction and survival probability by three routes.

Routes:
  * direct   -- quadrature of the real-axis momentum integral
                psi(x,t) = int_0^inf e^{-i hbar k^2 t/2m} phi(k) W(k) sin(kx) dk / 2pi
  * contour  -- the same integral after a 45-degree clockwise rotation:
                a Gaussian-damped ray integral (background) plus the residue
                sum over the resonance poles crossed by the rotation
  * hybrid   -- series construction: direct total at short times (where a
                truncated pole sum has not converged yet), contour beyond

All internal math runs in scaled units (m = hbar = a = 1); public entry
points convert.  In scaled units the quadratic phase is e^{-i al k^2} with
al = t/2.

Short-time conditioning: the integrand's leading large-k tail
c0 sin(k) sin(kx)/k^2 is split off and integrated against (e^{-i al k^2} - 1)
in closed form (complex erfc).  That removes both the catastrophic
cancellation in 1 - P(t) and the far stationary-phase point k ~ x/(2 al),
which plain panels cannot afford to cover at small t.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erfc

from .model import (ModelParams, InitialState, cexpm1, denominator_mirror,
                    initial_overlap, characteristic_time)
from .poles import pole_momenta
from .quad import gauss_panels, phase_edges, refine_edges_near_peaks, panel_nodes

__all__ = [
    "QuadratureConfig", "SeriesConfig", "WaveField", "SurvivalSeries",
    "QuadratureError", "wavefunction_direct", "background_wave", "pole_wave",
    "survival", "survival_series", "survival_decomposition", "wavefield",
    "short_time_deficit", "background_asymptote", "breakdown_estimate",
]

N_GRID = 101          # x-export grid: 101 nodes, spacing a/100
NX_CAP = 6401         # ceiling for the internal fringe-resolving x grid


class QuadratureError(RuntimeError):
    """Requested tolerance could not be met within the node budget."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs for the momentum quadratures (scaled units, a = 1)."""

    abs_tol: float = 1e-9         # target absolute error on psi
    rad_per_panel: float = 2.5    # phase radians per Gauss panel (oracle route)
    panel_nodes: int = 20
    smooth_rad: float = 6.0       # coarser panels for smooth-phase integrands
    smooth_nodes: int = 16
    peak_frac: float = 0.6        # panel width under a resonance peak, in widths
    peak_span: float = 6.0
    ray_width0: float = 0.008     # ray panels: first width, growth factor, cap
    ray_growth: float = 1.15
    ray_width_cap: float = 0.25
    ray_nodes: int = 16
    damp_floor: float = 1e-18     # drop ray nodes with weaker Gaussian damping
    split_alpha: float = 2.5e-4   # below this al = t/2 the split-tail route is used
    tail_cut: float = 2400.0      # split momentum for the smooth-tail machinery
    tail_far: float = 30000.0     # end of the one-time residual-tail integral
    node_budget: int = 4_000_000

    def refined(self, factor: float = 1.6) -> "QuadratureConfig":
        """A strictly finer configuration, for error estimation."""
        return replace(self, rad_per_panel=self.rad_per_panel / factor,
                       ray_width_cap=self.ray_width_cap / factor,
                       ray_width0=self.ray_width0 / factor,
                       panel_nodes=self.panel_nodes + 4,
                       ray_nodes=self.ray_nodes + 4)


@dataclass(frozen=True)
class SeriesConfig:
    """Time grid and truncation controls for survival-series runs."""

    t_min_tau0: float = 1e-3
    t_max_tau0: float = 1e3
    n_times: int = 400
    pole_count: int = 10          # poles retained in exported pole tables
    eval_pole_count: int = 400    # poles used inside wave sums
    switch_bound: float = 5e-8    # missed-pole bound that enables the contour route
    nx_cap: int = NX_CAP
    error_pass: bool = True       # refined ray pass for the err_est column
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)


@dataclass(frozen=True)
class WaveField:
    """Complex wavefunction samples on the interior grid at one time."""

    time: float
    grid: np.ndarray
    values: np.ndarray
    method: str                   # direct | contour | poles_only | background_only

    def __post_init__(self):
        if abs(self.values[0]) > 1e-12:
            raise ValueError("hard wall violated: psi(0) != 0")


@dataclass
class SurvivalSeries:
    times: np.ndarray
    p_total: np.ndarray
    p_bg: np.ndarray
    p_poles: np.ndarray
    p_interf: np.ndarray
    err_est: np.ndarray
    params: ModelParams
    state: InitialState
    meta: dict = field(default_factory=dict)

    def tau0(self) -> float:
        return characteristic_time(self.params)


def _chunks(n, size=512):
    for i in range(0, n, size):
        yield slice(i, min(i + size, n))


def _trap_grid(nx: int):
    x = np.linspace(0.0, 1.0, nx)
    w = np.full(nx, 1.0 / (nx - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return x, w


def _fringe_nx(k_content: float, cap: int = NX_CAP) -> int:
    """Nested grid size giving >= 4 points per fringe at wavenumber k_content."""
    need = int(np.ceil(4.0 * k_content / (2 * np.pi))) + 1
    nx = N_GRID
    while nx < need and nx < cap:
        nx = 2 * (nx - 1) + 1
    return nx


def _fresnel_closed(b, al):
    """int_0^inf (e^{-i al k^2} - 1) cos(bk)/k^2 dk for b >= 0, al > 0."""
    sia = np.sqrt(al) * np.exp(1j * np.pi / 4)
    z = np.asarray(b) / (2 * sia)
    return (np.sqrt(al * np.pi) * np.exp(-3j * np.pi / 4)
            + np.pi * sia * (z * erfc(z) + (1.0 - np.exp(-z * z)) / np.sqrt(np.pi)))


def _fresnel_g(x, al):
    """int_0^inf (e^{-i al k^2} - 1) sin(k) sin(kx)/k^2 dk on 0 <= x <= 1."""
    return 0.5 * (_fresnel_closed(1.0 - np.asarray(x), al)
                  - _fresnel_closed(1.0 + np.asarray(x), al))


class _SmallTBatch:
    """Short-time series engine sharing one momentum grid across times.

    The sine matrix sin(k_j x_i) is time-independent, so each time costs two
    real mat-vecs (real and imaginary parts of the weighted integrand)
    against the precomputed matrix, plus the closed-form Fresnel piece.
    """

    def __init__(self, kernel: "_Kernel", t_max: float, nx: int):
        self.ker = kernel
        self.x, self.wx = _trap_grid(nx)
        self.k, wq = kernel.rest_grid(t_max)
        self.uw = wq * kernel.u_rest(self.k)
        self.uphi = wq * kernel.u(self.k) \
            * np.real(initial_overlap(self.k, kernel.state, kernel.params))
        self.k2 = self.k**2
        self.SX = np.sin(self.k[:, None] * self.x[None, :])
        rest0 = self.uw @ self.SX
        tail = kernel.rest_tail_on(self.x)
        self.recon0 = rest0 + tail + kernel.c0 * np.pi * self.x / 2.0
        self.tail = tail

    def psi_total(self, t: float) -> np.ndarray:
        al = 0.5 * t
        uw = self.uw * cexpm1(-1j * al * self.k2)
        rest = (uw.real @ self.SX) + 1j * (uw.imag @ self.SX)
        dps = self.ker.c0 * _fresnel_g(self.x, al) + rest - self.tail
        return self.recon0 + dps

    def overlap_deficit(self, t: float) -> float:
        """Exact momentum-space -Re<psi0|dpsi>, for the error column."""
        return float(np.sum((1.0 - np.cos(0.5 * t * self.k2)) * self.uphi))


class _RayTable:
    """Precomputed rotated-ray integrand on a fixed x grid, reused across t.

    psi_bg(x, t) = sum_j w_j e^{-kappa_j^2 t/2} F_j(x); only the Gaussian
    damping depends on t, so a time sweep is a sequence of masked mat-vecs.
    """

    def __init__(self, kernel: "_Kernel", t_min: float, x: np.ndarray,
                 cfg: QuadratureConfig):
        kmax = max(np.sqrt(2 * 37.0 / t_min), 50 * np.pi)
        edges = [0.0]
        w = cfg.ray_width0
        while edges[-1] < kmax:
            edges.append(min(edges[-1] + w, kmax))
            w = min(w * cfg.ray_growth, cfg.ray_width_cap)
        kappa, wq = panel_nodes(np.array(edges), cfg.ray_nodes)
        k, base = kernel.ray_integrand_base(kappa)
        exa = np.exp(1j * k[:, None] * (x[None, :] - 1.0))
        mex = -cexpm1(-2j * k[:, None] * x[None, :])
        self.F = (base * wq)[:, None] * (exa * mex)
        self.kappa2 = kappa**2
        self.damp_floor = cfg.damp_floor

    def psi_bg(self, t: float) -> np.ndarray:
        damp = np.exp(-self.kappa2 * t / 2)
        m = damp > self.damp_floor
        return damp[m] @ self.F[m]


FRINGE_AMP = 3e-8     # fringe amplitude below which x-grid aliasing is ignored


class _Kernel:
    """Scaled-unit (m = hbar = a = 1) evaluators for one (lam, n) pair."""

    def __init__(self, lam: float, n: int, cfg: QuadratureConfig,
                 n_poles: int = 400):
        self.lam, self.n, self.cfg = lam, n, cfg
        self.params = ModelParams(lam=lam)
        self.state = InitialState(n)
        self.poles = pole_momenta(self.params, n_poles)
        self.peak_pos = self.poles.real
        self.peak_width = np.abs(self.poles.imag)
        self.c0 = 2.0 * np.sqrt(2.0) * n * (-1) ** n
        ks = np.linspace(40.0, cfg.tail_cut, 8192) + 0.37
        self.c3 = float(np.max(np.abs(self.u_rest(ks) * ks**3)))
        self._tail_cache: dict = {}
        self._res_cache: dict = {}

    def k_significant(self, al: float) -> float:
        """Largest momentum whose short-time fringes rise above FRINGE_AMP.

        The fringe amplitude of the (e^{-i al k^2} - 1) u_rest piece is
        min(al k^2, 2) * c3/k^3; fringes weaker than FRINGE_AMP alias into
        the x-grid trapezoid below the series error budget.
        """
        k_flat = (2.0 * self.c3 / FRINGE_AMP) ** (1.0 / 3.0)
        return min(max(k_flat, 50.0), al * self.c3 / FRINGE_AMP, self.cfg.tail_cut)

    # -- real-axis pieces ----------------------------------------------------

    def u(self, k):
        """phi(k) W(k) / 2pi on the real axis."""
        lam = self.lam
        w = 4 * k**2 / (k**2 + lam * k * np.sin(2 * k) + lam**2 * np.sin(k) ** 2)
        return np.real(initial_overlap(k, self.state, self.params)) * w / (2 * np.pi)

    def u_rest(self, k):
        """u(k) minus its leading c0 sin(k)/k^2 tail (remainder is O(k^-3))."""
        return self.u(k) - self.c0 * np.sin(k) / k**2

    def psi0(self, x):
        return np.sqrt(2.0) * np.sin(self.n * np.pi * np.asarray(x))

    def residues(self, x: np.ndarray, count: int) -> np.ndarray:
        """C(k_n, x) for the first ``count`` poles, cached per x grid."""
        key = (count, hash(x.tobytes()))
        if key not in self._res_cache:
            if len(self._res_cache) > 8:
                self._res_cache.clear()
            kn = self.poles[:count, None]
            num = -1j * initial_overlap(kn, self.state, self.params) \
                * np.sin(kn * x[None, :]) * 4.0 * kn**2
            dd = (1.0 + self.lam * np.exp(2j * kn)) \
                * denominator_mirror(kn, self.params)
            self._res_cache[key] = num / dd
        return self._res_cache[key]

    def pole_phases(self, t: float, count: int) -> np.ndarray:
        return np.exp(-0.5j * self.poles[:count] ** 2 * t)

    def ray_integrand_base(self, kappa):
        """e^{-i pi/4} f(e^{-i pi/4} kappa, x) split as base(kappa) * x-factor.

        Along the ray the growing exponentials are combined analytically: with
        E_a = e^{-2ik}, sin(k) sin(kx)/D =
        -e^{ik(x-1)} (1-E_a)(1-E_x) / (4 (k E_a + lam (1-E_a)/2i)),
        every exponential bounded by 1 for Im k <= 0.
        """
        k = kappa * np.exp(-1j * np.pi / 4)
        one_m_ea = -cexpm1(-2j * k)
        ea = np.exp(-2j * k)
        bfac = k * ea + self.lam * one_m_ea / 2j
        n = self.n
        pref = (1 / (2 * np.pi)) * np.sqrt(2.0) * (-1) ** (n + 1) * n * np.pi * 4 * k**2
        base = pref / (((n * np.pi) ** 2 - k**2) * denominator_mirror(k, self.params)) \
            * (-one_m_ea) / (4 * bfac)
        return k, np.exp(-1j * np.pi / 4) * base

    # -- split-tail short-time machinery ---------------------------------------

    def rest_grid(self, t_at: float):
        """Panel nodes on [0, tail_cut] resolving phases up to time t_at."""
        cfg = self.cfg
        edges = phase_edges(cfg.tail_cut, t_at, 3.0, cfg.smooth_rad)
        edges = refine_edges_near_peaks(edges, self.peak_pos, self.peak_width,
                                        cfg.peak_frac, cfg.peak_span)
        return panel_nodes(edges, cfg.smooth_nodes)

    def rest_tail_on(self, x: np.ndarray) -> np.ndarray:
        """R(x) = int_cut^far u_rest(k) sin(kx) dk, one-time per x grid."""
        key = ("tail", hash(x.tobytes()))
        cfg = self.cfg
        if key not in self._tail_cache:
            edges = phase_edges(cfg.tail_far, 0.0, 3.0, 1.3 * cfg.smooth_rad,
                                k0=cfg.tail_cut)
            k, w = panel_nodes(edges, cfg.smooth_nodes)
            uw = w * self.u_rest(k)
            out = np.empty(len(x))
            for sl in _chunks(len(x)):
                out[sl] = uw @ np.sin(k[:, None] * x[None, sl])
            self._tail_cache[key] = out
        return self._tail_cache[key]

    def delta_psi(self, x: np.ndarray, t: float, grid=None) -> np.ndarray:
        """psi(x,t) - psi(x,0) by the split-tail route."""
        al = 0.5 * t
        k, w = grid if grid is not None else self.rest_grid(t)
        uw = w * cexpm1(-1j * al * k**2) * self.u_rest(k)
        rest = np.empty(len(x), dtype=complex)
        for sl in _chunks(len(x)):
            rest[sl] = uw @ np.sin(k[:, None] * x[None, sl])
        return self.c0 * _fresnel_g(x, al) + rest - self.rest_tail_on(x)

    def recon0(self, x: np.ndarray) -> np.ndarray:
        """t = 0 reconstruction of psi0 purely from the momentum integral."""
        key = ("recon0", hash(x.tobytes()))
        if key not in self._tail_cache:
            k, w = self.rest_grid(0.0)
            uw = w * self.u_rest(k)
            rest = np.empty(len(x))
            for sl in _chunks(len(x)):
                rest[sl] = uw @ np.sin(k[:, None] * x[None, sl])
            self._tail_cache[key] = rest + self.rest_tail_on(x) + self.c0 * np.pi * x / 2.0
        return self._tail_cache[key]

    def overlap_deficit(self, t: float) -> float:
        """int (1 - cos(al k^2)) phi^2 W / 2pi dk = -Re<psi0|dpsi> (exact in k).

        The integrand is non-negative, so the truncation error is bounded by
        the plain tail of phi^2 W, about 1/k_c^3: negligible at the default
        cut.  Momenta beyond max(tail_cut, 1.5/sqrt(al)) contribute only
        through the (1 - cos) average of the far tail.
        """
        al = 0.5 * t
        kc = max(self.cfg.tail_cut, 1.5 / np.sqrt(al))
        key = ("ovl", round(np.log10(t), 4))
        if key not in self._tail_cache:
            if len(self._tail_cache) > 80:
                self._tail_cache = {k: v for k, v in self._tail_cache.items()
                                    if not (isinstance(k, tuple) and k[0] == "ovl")}
            k, w = gauss_panels(kc, t, 3.0, self.cfg.smooth_rad,
                                self.cfg.smooth_nodes, self.peak_pos,
                                self.peak_width)
            uphi = self.u(k) * np.real(initial_overlap(k, self.state, self.params))
            self._tail_cache[key] = float(
                np.sum(w * (1.0 - np.cos(al * k**2)) * uphi))
        return self._tail_cache[key]

    # -- plain direct quadrature -------------------------------------------------

    def direct_plain(self, x: np.ndarray, t: float) -> np.ndarray:
        """Panel quadrature of the real-axis integral with a 2-term IBP tail.

        kmax covers the free-propagation stationary point max(x)/(2 al) when
        it is within reach; beyond kmax the integral is closed with
        integration-by-parts boundary terms against the Gaussian phase.
        """
        cfg = self.cfg
        al = 0.5 * t
        kmax = max((100.0 / (al**3 * cfg.abs_tol)) ** (1.0 / 7.0),
                   np.sqrt(40.0 / al), 70.0)
        kstar = float(np.max(x)) / (2 * al)
        if kstar < 4.0 * kmax:
            kmax = max(kmax, 1.15 * kstar + 5.0 / np.sqrt(al))
        npanels = (al * kmax**2 + 3.0 * kmax) / cfg.rad_per_panel
        if npanels * cfg.panel_nodes > cfg.node_budget:
            raise QuadratureError(
                f"direct quadrature needs ~{int(npanels * cfg.panel_nodes):d} "
                "nodes at this time; use the contour route instead")
        k, w = gauss_panels(kmax, t, 3.0, cfg.rad_per_panel, cfg.panel_nodes,
                            self.peak_pos, self.peak_width,
                            peak_frac=cfg.peak_frac, peak_span=cfg.peak_span)
        uw = w * self.u(k) * np.exp(-1j * al * k**2)
        out = np.empty(len(x), dtype=complex)
        for sl in _chunks(len(x)):
            out[sl] = uw @ np.sin(k[:, None] * x[None, sl])
        h = 1e-3
        g0 = self.u(np.array([kmax]))[0] * np.sin(kmax * x)
        gk = lambda kk: self.u(np.array([kk]))[0] * np.sin(kk * x) / kk
        dgk = (gk(kmax + h) - gk(kmax - h)) / (2 * h)
        out += np.exp(-1j * al * kmax**2) / (2j * al * kmax) * (g0 + dgk / (2j * al))
        return out

    def direct_psi(self, x: np.ndarray, t: float) -> np.ndarray:
        if t <= 0:
            return self.recon0(x).astype(complex)
        if 0.5 * t < self.cfg.split_alpha:
            return self.recon0(x) + self.delta_psi(x, t)
        return self.direct_plain(x, t)


# ---------------------------------------------------------------------------
# public API (physical units)
# ---------------------------------------------------------------------------

_KERNELS: dict[tuple, _Kernel] = {}


def _kernel(state: InitialState, params: ModelParams, cfg: QuadratureConfig,
            n_poles: int = 400) -> _Kernel:
    key = (params.lam, state.mode_index, cfg, n_poles)
    if key not in _KERNELS:
        if len(_KERNELS) > 16:
            _KERNELS.clear()
        _KERNELS[key] = _Kernel(params.lam, state.mode_index, cfg, n_poles)
    return _KERNELS[key]


def _scales(params: ModelParams):
    """(time, length, psi) scale factors between physical and scaled units."""
    t_scale = params.mass * params.well_width**2 / params.hbar
    return t_scale, params.well_width, 1.0 / np.sqrt(params.well_width)


def wavefunction_direct(x, t, state: InitialState, params: ModelParams,
                        cfg: QuadratureConfig | None = None):
    """psi(x, t) from the real-axis momentum integral (contour-free oracle).

    At t = 0 this reconstructs the initial state from the continuum integral
    rather than returning the closed form, so it doubles as a completeness
    check.  Practical for t up to a few lifetimes; raises QuadratureError
    when the oscillation budget is exceeded.
    """
    cfg = cfg or QuadratureConfig()
    t_s, x_s, psi_s = _scales(params)
    xs = np.atleast_1d(np.asarray(x, dtype=float)) / x_s
    if np.any(xs < 0) or np.any(xs > 1):
        raise ValueError("x must lie inside the well [0, a]")
    if t < 0:
        raise ValueError("t must be >= 0")
    ker = _kernel(state, params, cfg)
    out = ker.direct_psi(xs, t / t_s) * psi_s
    return out if np.ndim(x) else complex(out[0])


def background_wave(x, t, state: InitialState, params: ModelParams,
                    cfg: QuadratureConfig | None = None):
    """Rotated-ray background term of the contour representation (t > 0)."""
    if t <= 0:
        raise ValueError("background wave requires t > 0 (use wavefunction_direct)")
    cfg = cfg or QuadratureConfig()
    t_s, x_s, psi_s = _scales(params)
    xs = np.atleast_1d(np.asarray(x, dtype=float)) / x_s
    ker = _kernel(state, params, cfg)
    table = _RayTable(ker, t / t_s, xs, cfg)
    out = table.psi_bg(t / t_s) * psi_s
    return out if np.ndim(x) else complex(out[0])


def pole_wave(x, t, state: InitialState, params: ModelParams,
              pole_count: int = 10, cfg: QuadratureConfig | None = None):
    """Truncated residue sum  sum_n C(k_n, x) e^{-i hbar k_n^2 t / 2m}."""
    cfg = cfg or QuadratureConfig()
    t_s, x_s, psi_s = _scales(params)
    xs = np.atleast_1d(np.asarray(x, dtype=float)) / x_s
    ker = _kernel(state, params, cfg, n_poles=max(400, pole_count))
    out = ker.pole_phases(t / t_s, pole_count) @ ker.residues(xs, pole_count)
    out = out * psi_s
    return out if np.ndim(x) else complex(out[0])


def wavefield(x_grid, t, state: InitialState, params: ModelParams, method: str,
              pole_count: int = 10, cfg: QuadratureConfig | None = None) -> WaveField:
    """Wavefunction snapshot on a grid by the requested route."""
    if method == "direct":
        vals = wavefunction_direct(x_grid, t, state, params, cfg)
    elif method == "background_only":
        vals = background_wave(x_grid, t, state, params, cfg)
    elif method == "poles_only":
        vals = pole_wave(x_grid, t, state, params, pole_count, cfg)
    elif method == "contour":
        vals = background_wave(x_grid, t, state, params, cfg) \
            + pole_wave(x_grid, t, state, params, pole_count, cfg)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WaveField(time=t, grid=np.asarray(x_grid, float),
                     values=np.asarray(vals), method=method)


def short_time_deficit(t, state: InitialState, params: ModelParams,
                       cfg: QuadratureConfig | None = None) -> float:
    """1 - P(t) computed without cancellation (short-time diagnostic).

    Combines the momentum-space overlap deficit (positive-definite integrand,
    exact on [0, a] because psi0 vanishes outside) with the norm of the
    split-tail delta psi on a fringe-resolving x grid:
    1 - P = 2 int (1 - cos(al k^2)) phi^2 W /(2 pi) dk - ||delta psi||^2.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    cfg = cfg or QuadratureConfig()
    t_s = _scales(params)[0]
    ts = t / t_s
    if 0.5 * ts >= cfg.split_alpha:
        raise ValueError("short_time_deficit is for the short-time regime "
                         f"(t/(m a^2/hbar) < {2 * cfg.split_alpha:g})")
    ker = _kernel(state, params, cfg)
    nx = _fringe_nx(ker.k_significant(0.5 * ts))
    x, wx = _trap_grid(nx)
    dps = ker.delta_psi(x, ts)
    return 2.0 * ker.overlap_deficit(ts) - float(wx @ np.abs(dps) ** 2)


def survival(t, state: InitialState, params: ModelParams,
             series_cfg: SeriesConfig | None = None) -> float:
    """P(t) at a single time; t = 0 uses the closed-form initial state."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 1.0
    ser = survival_series(state, params, times=np.array([t]),
                          series_cfg=series_cfg)
    return float(ser.p_total[0])


def survival_decomposition(t, state: InitialState, params: ModelParams,
                           series_cfg: SeriesConfig | None = None):
    """(p_bg, p_poles, p_interf) at one time; sums to P(t) exactly."""
    if t <= 0:
        raise ValueError("decomposition requires t > 0")
    ser = survival_series(state, params, times=np.array([t]),
                          series_cfg=series_cfg)
    return float(ser.p_bg[0]), float(ser.p_poles[0]), float(ser.p_interf[0])


def survival_series(state: InitialState, params: ModelParams,
                    times: np.ndarray | None = None,
                    series_cfg: SeriesConfig | None = None) -> SurvivalSeries:
    """Survival probability and its decomposition over a time grid.

    Below the switch time (where the truncated pole sum has converged to
    ``switch_bound``) the total field comes from the direct route and the
    background is defined as total minus pole sum; above it the background is
    the rotated-ray integral.  All four integrals at a given time share one
    x grid, fine enough for the short-time fringes, so the decomposition
    identity is exact by construction.
    """
    scfg = series_cfg or SeriesConfig()
    cfg = scfg.quad
    t_s, _, _ = _scales(params)
    if times is None:
        tau0 = characteristic_time(params)
        times = np.geomspace(scfg.t_min_tau0 * tau0, scfg.t_max_tau0 * tau0,
                             scfg.n_times)
    else:
        times = np.asarray(times, dtype=float)
    if np.any(times <= 0) or (len(times) > 1 and np.any(np.diff(times) <= 0)):
        raise ValueError("times must be positive and strictly increasing")
    ts = times / t_s

    ker = _kernel(state, params, cfg, n_poles=scfg.eval_pole_count)

    # missed-pole bound -> first time at which the contour route is trusted
    xs_probe = np.linspace(0.0, 1.0, 41)
    cmax = np.max(np.abs(ker.residues(xs_probe, scfg.eval_pole_count)), axis=1)
    g_half = ker.poles.real * np.abs(ker.poles.imag)
    ntail = min(50, scfg.eval_pole_count)

    def missed(t):
        return 3.0 * float(np.sum(cmax[-ntail:] * np.exp(-g_half[-ntail:] * t)))

    t_switch = np.inf
    for t in ts:
        if missed(t) < scfg.switch_bound:
            t_switch = t
            break
    small = ts < t_switch
    if np.any(small) and 0.5 * float(ts[small].max()) > 40 * cfg.split_alpha:
        raise QuadratureError(
            "pole sum not converged below the split-route ceiling; "
            "increase eval_pole_count")

    x101, wx101 = _trap_grid(N_GRID)
    batch = None
    if np.any(small):
        nx = _fringe_nx(ker.k_significant(0.5 * float(ts[small].max())),
                        scfg.nx_cap)
        batch = _SmallTBatch(ker, float(ts[small].max()), nx)
    ray = ray_f = None
    if np.any(~small):
        t_ray_min = float(ts[~small].min())
        ray = _RayTable(ker, t_ray_min, x101, cfg)
        if scfg.error_pass:
            ray_f = _RayTable(ker, t_ray_min, x101, cfg.refined())

    rows = np.empty((len(ts), 5))
    for i, t in enumerate(ts):
        if small[i]:
            x, wx = batch.x, batch.wx
            psi_tot = batch.psi_total(t)
            psi_po = ker.pole_phases(t, scfg.eval_pole_count) \
                @ ker.residues(x, scfg.eval_pole_count)
            psi_bg = psi_tot - psi_po
            # error: trapezoid overlap vs exact momentum-space overlap
            ovl_trap = float(wx @ np.real(ker.psi0(x) * (psi_tot - ker.psi0(x))))
            err = 2.0 * abs(ovl_trap + batch.overlap_deficit(t)) + 2e-9
        else:
            x, wx = x101, wx101
            psi_po = ker.pole_phases(t, scfg.eval_pole_count) \
                @ ker.residues(x, scfg.eval_pole_count)
            psi_bg = (ray_f or ray).psi_bg(t)
            psi_tot = psi_bg + psi_po
            if ray_f is not None:
                p_base = float(wx @ np.abs(ray.psi_bg(t) + psi_po) ** 2)
                err = abs(p_base - float(wx @ np.abs(psi_tot) ** 2)) \
                    + missed(t) + 1e-14
            else:
                err = missed(t) + 1e-12
        p_bg = float(wx @ np.abs(psi_bg) ** 2)
        p_po = float(wx @ np.abs(psi_po) ** 2)
        p_in = float(wx @ (2.0 * np.real(np.conj(psi_bg) * psi_po)))
        p_to = float(wx @ np.abs(psi_tot) ** 2)
        rows[i] = (p_to, p_bg, p_po, p_in, err)

    return SurvivalSeries(
        times=times, p_total=rows[:, 0], p_bg=rows[:, 1], p_poles=rows[:, 2],
        p_interf=rows[:, 3], err_est=rows[:, 4], params=params, state=state,
        meta={
            "pole_count": scfg.pole_count,
            "eval_pole_count": scfg.eval_pole_count,
            "t_switch": float(t_switch * t_s) if np.isfinite(t_switch) else None,
            "series_cfg": scfg,
        })


def background_asymptote(t, state: InitialState, params: ModelParams) -> float:
    """Late-time scaling estimate (m a^2/(hbar t))^3 / lam^4 (order of magnitude)."""
    p = params
    return float((p.mass * p.well_width**2 / (p.hbar * np.asarray(t))) ** 3 / p.lam**4)


def breakdown_estimate(params: ModelParams, pole_1) -> float:
    """10 (hbar/Gamma_1) ln(lam): exponential-to-power-law turnover estimate."""
    if params.lam <= 1:
        raise ValueError(
            "breakdown estimate requires lam > 1 (logarithm must be positive)")
    return 10.0 * (params.hbar / pole_1.width) * np.log(params.lam)
