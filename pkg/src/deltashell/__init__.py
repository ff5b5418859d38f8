"""Numerical laboratory for the one-dimensional delta-shell decay model.

A hard wall at x = 0 plus a Dirac-delta barrier of strength lam*hbar^2/(2*m*a)
at x = a traps a particle whose survival probability exhibits four regimes:
quadratic short-time onset, exponential decay, interference oscillations, and
an asymptotic t^-3 power law.
"""

from .model import ModelParams, InitialState, denominator, denominator_deriv, \
    denominator_mirror, coefficient_a, coefficient_b, spectral_weight, \
    initial_overlap, characteristic_time
from .poles import Pole, PoleWeight, find_poles, residue_amplitude, pole_weight, \
    q_value, lifetime_from_pole, winding_number
from .propagator import QuadratureConfig, SeriesConfig, WaveField, SurvivalSeries, \
    wavefunction_direct, background_wave, pole_wave, survival, survival_series, \
    survival_decomposition, short_time_deficit, background_asymptote, breakdown_estimate
from .tdse import TdseConfig, gaussian_barrier, evolve, extrapolate_delta, \
    cap_reflection, validate_against_contour
from .analysis import FitResult, RegimeReport, fit_exponential, fit_powerlaw, \
    measure_breakdown, detect_oscillations, regime_report
from .compare import ExperimentSeries, ingest_decay_csv, lambda_scan, scale_mapping

__version__ = "0.1.0"
