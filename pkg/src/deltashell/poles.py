"""Resonance poles: location, certification, residues, weights and lifetimes.

The resonances are the zeros of D(k) = ka + lam e^{ika} sin(ka) in the fourth
quadrant of the complex momentum plane.  Each polished root is certified by
the argument principle on an isolating rectangle; the mirror zeros of Dbar in
the upper half plane are never touched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (ModelParams, InitialState, denominator, denominator_deriv,
                    denominator_mirror, initial_overlap, characteristic_time)

__all__ = [
    "Pole", "PoleWeight", "PoleError", "find_poles", "residue_amplitude",
    "pole_weight", "q_value", "lifetime_from_pole", "winding_number",
    "pole_momenta",
]

RESIDUAL_TOL = 1e-12          # |D(k_n)| acceptance threshold, units a = 1
POORLY_FORMED_Q = 0.5         # below this the resonance is flagged as mushy


class PoleError(RuntimeError):
    """Newton divergence or a failed argument-principle certification."""


@dataclass(frozen=True)
class Pole:
    """A certified resonance: momentum k_n with derived energy data."""

    index: int
    momentum: complex
    params: ModelParams
    residual: float
    certified: bool = True

    @property
    def energy(self) -> complex:
        p = self.params
        return p.hbar**2 * self.momentum**2 / (2.0 * p.mass)

    @property
    def width(self) -> float:
        """Gamma_n = -Im(hbar^2 k_n^2 / m) = -2 Im E_n > 0."""
        p = self.params
        return -np.imag(p.hbar**2 * self.momentum**2 / p.mass)

    @property
    def lifetime(self) -> float:
        return self.params.hbar / self.width

    @property
    def q_value(self) -> float:
        e = self.energy
        return -e.real / (2.0 * e.imag)

    @property
    def poorly_formed(self) -> bool:
        return self.q_value < POORLY_FORMED_Q

    def lifetime_over_tau0(self) -> float:
        return self.lifetime / characteristic_time(self.params)


@dataclass(frozen=True)
class PoleWeight:
    index: int
    weight: float


def _newton_polish(k0, params: ModelParams, itmax: int = 100, tol: float = 1e-15):
    """Vectorized Newton iteration on D(k); non-finite steps are frozen."""
    k = np.atleast_1d(np.asarray(k0, dtype=complex)).copy()
    for _ in range(itmax):
        with np.errstate(all="ignore"):
            step = denominator(k, params) / denominator_deriv(k, params)
        step = np.where(np.isfinite(step), step, 0.0)
        k = k - step
        if np.max(np.abs(step) / np.maximum(np.abs(k), 1.0)) < tol:
            break
    return k


def _bracket(n: int, params: ModelParams):
    a = params.well_width
    return (n - 1) * np.pi / a, (n * np.pi + np.pi / 2) / a


def _in_bracket(k: complex, n: int, params: ModelParams) -> bool:
    lo, hi = _bracket(n, params)
    return lo < k.real < hi and k.imag < 0


def _scan_rescue(n: int, params: ModelParams):
    """Grid scan of |D(k)/k| over the bracket (divides out the k = 0 zero)."""
    a = params.well_width
    lo, hi = _bracket(n, params)
    depth = 0.7 * np.log(2 * n * np.pi / params.lam + 2.0) + 3.0
    re = np.linspace(lo + 1e-3 / a, hi, 260)
    im = np.linspace(-depth / a, -1e-4 / a, 260)
    grid = re[None, :] + 1j * im[:, None]
    vals = np.abs(denominator(grid, params) / (grid * a))
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    return grid[i, j]


def _seed(n: np.ndarray, params: ModelParams):
    """Newton seeds: lam/(lam+1) deflation for low n, log-depth string beyond."""
    lam, a = params.lam, params.well_width
    low = (n * np.pi * lam / (lam + 1.0) - 0.5j / (1.0 + lam)) / a
    high = (n * np.pi - 0.5 - 0.5j * np.log(2.0 * n * np.pi / lam + 1.0)) / a
    return np.where(n > 6, high, low)


def winding_number(fn, corners, min_samples: int = 64, max_depth: int = 40) -> int:
    """Winding of fn around a rectangle by adaptive phase tracking.

    ``corners`` is (re_lo, re_hi, im_lo, im_hi).  Edge samples are refined
    until consecutive phase steps stay below pi/2, making the integer count
    exact for isolated zeros off the contour.
    """
    re_lo, re_hi, im_lo, im_hi = corners
    pts = []
    per_edge = max(min_samples // 4, 8)
    for (z0, z1) in (((re_lo, im_lo), (re_hi, im_lo)),
                     ((re_hi, im_lo), (re_hi, im_hi)),
                     ((re_hi, im_hi), (re_lo, im_hi)),
                     ((re_lo, im_hi), (re_lo, im_lo))):
        s = np.linspace(0, 1, per_edge, endpoint=False)
        pts.extend(complex(z0[0] + (z1[0] - z0[0]) * t,
                           z0[1] + (z1[1] - z0[1]) * t) for t in s)
    pts.append(pts[0])
    vals = [fn(z) for z in pts]
    total = 0.0
    for i in range(len(pts) - 1):
        z0, z1, f0, f1 = pts[i], pts[i + 1], vals[i], vals[i + 1]
        stack = [(z0, z1, f0, f1, 0)]
        while stack:
            a, b, fa, fb, depth = stack.pop()
            dphi = np.angle(fb / fa)
            if abs(dphi) < np.pi / 2 or depth >= max_depth:
                if depth >= max_depth:
                    raise PoleError("winding number: phase refinement exhausted "
                                    f"near contour point {a}")
                total += dphi
            else:
                mid = 0.5 * (a + b)
                fm = fn(mid)
                stack.append((mid, b, fm, fb, depth + 1))
                stack.append((a, mid, fa, fm, depth + 1))
    return int(np.rint(total / (2 * np.pi)))


def _certify(k: complex, neighbors: list[complex], n: int, params: ModelParams):
    """Argument-principle count on a rectangle isolating k from its neighbors."""
    a = params.well_width
    lo, hi = _bracket(n, params)
    left = max(lo, max((0.5 * (k.real + kn.real) for kn in neighbors
                        if kn.real < k.real), default=lo))
    right = min(hi, min((0.5 * (k.real + kn.real) for kn in neighbors
                         if kn.real > k.real), default=hi))
    depth = 2.0 * abs(k.imag) + 1.0 / a
    rect = (max(left, 0.05 / a), right, -depth, 0.0)
    count = winding_number(lambda z: denominator(z, params), rect)
    if count != 1:
        raise PoleError(
            f"pole {n}: argument principle counted {count} zeros in the "
            f"isolating rectangle {rect}, expected exactly 1")
    return rect


def _residual_floor(k: complex, params: ModelParams) -> float:
    """Roundoff-limited |D| near a zero: |D'| * |k| * machine epsilon-ish."""
    a = params.well_width
    return 64 * np.finfo(float).eps * max(abs(k) * a, 1.0) \
        * abs(denominator_deriv(k, params)) / a


def pole_momenta(params: ModelParams, n_max: int) -> np.ndarray:
    """Polished (uncertified) fourth-quadrant zeros k_1..k_n_max of D."""
    if params.lam <= 0:
        raise ValueError("pole search requires lam > 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1)
    k = _newton_polish(_seed(n, params), params)
    a = params.well_width

    def ok(ki, nn):
        tol = max(RESIDUAL_TOL, _residual_floor(ki, params))
        return (_in_bracket(ki, nn, params) and abs(ki) * a > 0.2
                and abs(denominator(ki, params)) <= tol)

    for i, nn in enumerate(n):
        if not ok(complex(k[i]), nn):
            ki = complex(_newton_polish(_scan_rescue(nn, params), params)[0])
            if not ok(ki, nn):
                raise PoleError(f"pole {nn}: Newton failed to converge inside "
                                f"the bracket (got {ki})")
            k[i] = ki
    if np.any(np.diff(k.real) <= 0):
        raise PoleError("pole string is not strictly ordered in Re k")
    return k


def find_poles(params: ModelParams, n_max: int, certify: bool = True) -> list[Pole]:
    """First ``n_max`` resonance poles, optionally certified one by one."""
    ks = pole_momenta(params, n_max)
    poles = []
    for i, k in enumerate(ks):
        k = complex(k)
        if certify:
            neighbors = [complex(ks[j]) for j in (i - 1, i + 1) if 0 <= j < len(ks)]
            _certify(k, neighbors, i + 1, params)
        poles.append(Pole(index=i + 1, momentum=k, params=params,
                          residual=float(abs(denominator(k, params))),
                          certified=certify))
    return poles


def residue_amplitude(pole: Pole, x, state: InitialState, params: ModelParams):
    """Pole-term amplitude C(k_n, x) in the wavefunction expansion.

    C(k_n, x) = -i phi(k_n) sin(k_n x) 4 k_n^2 a^2 / (D'(k_n) Dbar(k_n)),
    i.e. -2 pi i times the residue of f(k, x) = phi W sin(kx)/(2 pi) at k_n.
    The sign convention is fixed by requiring pole sum + background to
    reproduce the real-axis integral (tested against a contour oracle).
    """
    kn = pole.momentum
    dbar = denominator_mirror(kn, params)
    if abs(dbar) < 1e-10:
        raise PoleError(f"pole {pole.index}: mirror factor vanished "
                        "(degenerate double pole?)")
    a = params.well_width
    num = -1j * initial_overlap(kn, state, params) * np.sin(kn * np.asarray(x)) \
        * 4.0 * (kn * a) ** 2
    return num / (denominator_deriv(kn, params) * dbar)


def pole_weight(pole: Pole, state: InitialState, params: ModelParams,
                n_grid: int = 101) -> PoleWeight:
    """c_n = int_0^a |C(k_n, x)|^2 dx by the trapezoid rule on the x grid."""
    a = params.well_width
    x = np.linspace(0.0, a, n_grid)
    w = np.full(n_grid, a / (n_grid - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    c = residue_amplitude(pole, x, state, params)
    return PoleWeight(index=pole.index, weight=float(w @ np.abs(c) ** 2))


def q_value(pole: Pole) -> float:
    return pole.q_value


def lifetime_from_pole(pole: Pole, params: ModelParams) -> float:
    return params.hbar / pole.width
