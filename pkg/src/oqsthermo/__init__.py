"""Open-system thermodynamics of a periodically driven qubit.

Builds the Redfield and the weak-coupling (Davies) generators of a qubit
coupled to two identical Ohmic baths, propagates Bloch vectors in the
rotating frame and evaluates the internal entropy production.
"""
from .params import FrequencyConvention, ModelParams, UnitMode, footnote_params
from .bath import SpectralModel, bath_correlation, half_fourier, spectral_density, transform
from .generators import (
    BlochGenerator,
    GeneratorKind,
    build_redfield,
    build_weak_coupling,
    choi_minimum_eigenvalue,
    kossakowski_spectrum,
    r3_equilibrium,
    secular_average,
    stationary_bloch,
)
from .dynamics import TrajectoryRecord, propagate, purity_monitor, trajectory
from .thermo import (
    Reference,
    ViolationReport,
    entropy_production_bloch,
    entropy_production_trace,
    entropy_rate,
    heat_flux,
    parameter_sweep,
    violation_intervals,
    violation_scan_t0,
)

__all__ = [
    "FrequencyConvention", "ModelParams", "UnitMode", "footnote_params",
    "SpectralModel", "bath_correlation", "half_fourier", "spectral_density", "transform",
    "BlochGenerator", "GeneratorKind", "build_redfield", "build_weak_coupling",
    "choi_minimum_eigenvalue", "kossakowski_spectrum", "r3_equilibrium",
    "secular_average", "stationary_bloch",
    "TrajectoryRecord", "propagate", "purity_monitor", "trajectory",
    "Reference", "ViolationReport", "entropy_production_bloch", "entropy_production_trace",
    "entropy_rate", "heat_flux", "parameter_sweep", "violation_intervals", "violation_scan_t0",
]
