"""Algebraic building blocks of the delta-shell model.

The potential is an infinite wall at x = 0 plus a delta barrier of strength
lam*hbar^2/(2*m*a) at x = a.  Scattering solutions inside the well are
A(k) sin(kx); outside, e^{-ikx} + B(k) e^{ikx}.  Everything here is a pure
function of momentum and the model parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams", "InitialState", "denominator", "denominator_deriv",
    "denominator_mirror", "coefficient_a", "coefficient_b", "spectral_weight",
    "initial_overlap", "characteristic_time", "cexpm1",
]


@dataclass(frozen=True)
class ModelParams:
    """Barrier strength and unit system (defaults: m = a = hbar = 1)."""

    lam: float
    mass: float = 1.0
    well_width: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"barrier strength must be >= 0, got {self.lam}")
        if self.mass <= 0 or self.well_width <= 0 or self.hbar <= 0:
            raise ValueError("mass, well_width and hbar must be positive")

    @property
    def a(self) -> float:
        return self.well_width

    @property
    def delta_strength(self) -> float:
        """Integrated barrier strength lam*hbar^2/(2*m*a)."""
        return self.lam * self.hbar**2 / (2.0 * self.mass * self.well_width)


@dataclass(frozen=True)
class InitialState:
    """n-th eigenstate of the closed well, sqrt(2/a) sin(n pi x / a)."""

    mode_index: int = 1

    def __post_init__(self):
        if self.mode_index < 1:
            raise ValueError(f"mode index must be >= 1, got {self.mode_index}")

    def normalization(self, params: ModelParams) -> float:
        return np.sqrt(2.0 / params.well_width)

    def wavefunction(self, x, params: ModelParams):
        """psi(x, 0); zero outside [0, a]."""
        x = np.asarray(x, dtype=float)
        a = params.well_width
        inside = (x >= 0) & (x <= a)
        return np.where(
            inside,
            self.normalization(params) * np.sin(self.mode_index * np.pi * np.clip(x, 0, a) / a),
            0.0,
        )


def cexpm1(z):
    """exp(z) - 1 for complex z, accurate near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-5
    zs = np.where(small, z, 0.0)
    series = zs * (1.0 + zs / 2.0 * (1.0 + zs / 3.0 * (1.0 + zs / 4.0)))
    with np.errstate(over="ignore"):
        full = np.exp(np.where(small, 0.0, z)) - 1.0
    return np.where(small, series, full)


def denominator(k, params: ModelParams):
    """D(k) = k a + lam e^{i k a} sin(k a); entire, zeros are the resonances."""
    ka = np.asarray(k, dtype=complex) * params.well_width
    return ka + params.lam * np.exp(1j * ka) * np.sin(ka)


def denominator_deriv(k, params: ModelParams):
    """dD/dk = a (1 + lam e^{2 i k a})."""
    ka = np.asarray(k, dtype=complex) * params.well_width
    return params.well_width * (1.0 + params.lam * np.exp(2j * ka))


def denominator_mirror(k, params: ModelParams):
    """Dbar(k) = k a + lam e^{-i k a} sin(k a) = conj(D(conj k)); equals -D(-k)."""
    ka = np.asarray(k, dtype=complex) * params.well_width
    return ka + params.lam * np.exp(-1j * ka) * np.sin(ka)


def coefficient_a(k, params: ModelParams):
    """Interior amplitude A(k) = -2 i k a / D(k) for real momentum k > 0."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("coefficient_a requires real momentum k > 0")
    return -2j * k * params.well_width / denominator(k, params)


def coefficient_b(k, params: ModelParams):
    """Reflection amplitude B(k) = -Dbar(k)/D(k); |B| = 1 on the real axis."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("coefficient_b requires real momentum k > 0")
    return -denominator_mirror(k, params) / denominator(k, params)


def spectral_weight(k, params: ModelParams, pole_eps: float = 1e-13):
    """Analytic continuation of |A(k)|^2.

    W(k) = 4 k^2 a^2 / [(ka)^2 + lam ka sin(2ka) + lam^2 sin^2(ka)], whose
    denominator factorizes as D(k) * Dbar(k).  Real and positive on the real
    axis, where it equals |A(k)|^2.  Raises if k sits within ``pole_eps`` of a
    zero of either factor.
    """
    k = np.asarray(k, dtype=complex)
    a = params.well_width
    d = denominator(k, params)
    dbar = denominator_mirror(k, params)
    denom = d * dbar
    scale = np.maximum(np.abs(k) * a, 1.0)
    if np.any(np.abs(denom) < pole_eps * scale**2):
        raise ZeroDivisionError(
            "spectral weight evaluated within eps of a resonance pole")
    w = 4.0 * (k * a) ** 2 / denom
    # limit 4/(1+lam)^2 at k = 0 (both numerator and denominator are O(k^2))
    tiny = np.abs(k) * a < 1e-12
    if np.any(tiny):
        w = np.where(tiny, 4.0 / (1.0 + params.lam) ** 2, w)
    if np.isrealobj(np.asarray(k)) or np.all(np.abs(np.imag(k)) == 0):
        return np.real(w) if w.ndim else complex(w).real
    return w


def initial_overlap(k, state: InitialState, params: ModelParams):
    """Overlap phi(k) = int_0^a psi(x,0) sin(kx) dx in closed form.

    With d = ka - n pi the closed form is
        sqrt(2/a) * n pi a * [sin(d)/d] / (ka + n pi),
    which is regular at the removable singularity ka = n pi.  sin(d)/d is
    evaluated by series for |d| < 1e-4 to avoid cancellation.  Odd in k, so
    momenta with Re ka < 0 are reflected first.
    """
    k = np.asarray(k, dtype=complex)
    a = params.well_width
    n = state.mode_index
    ka = k * a
    sign = np.where(np.real(ka) < 0, -1.0, 1.0)
    ka = np.where(np.real(ka) < 0, -ka, ka)
    d = ka - n * np.pi
    small = np.abs(d) < 1e-4
    dsafe = np.where(small, 1.0, d)
    d2 = d * d
    sinc = np.where(small, 1.0 - d2 / 6.0 * (1.0 - d2 / 20.0), np.sin(dsafe) / dsafe)
    out = sign * np.sqrt(2.0 / a) * n * np.pi * a * sinc / (ka + n * np.pi)
    return out if out.ndim else complex(out)


def characteristic_time(params: ModelParams) -> float:
    """Natural time unit tau0 = m (lam a)^2 / (2 pi^3 hbar)."""
    if params.lam <= 0:
        raise ValueError("characteristic time is undefined for lam = 0")
    return params.mass * (params.lam * params.well_width) ** 2 / (2.0 * np.pi**3 * params.hbar)
