"""Quantum shot noise, photo-assisted noise and squeezing of a driven tunnel junction."""

from .calibrate import (
    CalibrationFit,
    FitConvergenceError,
    IllConditionedFitError,
    NoiseCurve,
    fit_drive_amplitude,
    fit_undriven,
    synthesize_curve,
)
from .noise import (
    DriveParams,
    JunctionParams,
    NoiseResult,
    ParameterError,
    ReducedPoint,
    evaluate,
    noise_dynamics_x,
    noise_temperature,
    phase_averaged_variance,
    photo_assisted_noise,
    quadrature_variances,
    s0,
    s_finite_freq,
    to_reduced,
    vacuum_noise,
)
from .optimize import (
    SqueezeOptimum,
    SweepSpec,
    optimize_bias_at_fixed_drive,
    optimize_squeeze,
    sweep,
)
from .specfun import BesselSeries, ValidatedRangeError, bessel_j, bessel_j_all, x_coth_x

__version__ = "0.1.0"

__all__ = [
    "BesselSeries",
    "CalibrationFit",
    "DriveParams",
    "FitConvergenceError",
    "IllConditionedFitError",
    "JunctionParams",
    "NoiseCurve",
    "NoiseResult",
    "ParameterError",
    "ReducedPoint",
    "SqueezeOptimum",
    "SweepSpec",
    "ValidatedRangeError",
    "bessel_j",
    "bessel_j_all",
    "evaluate",
    "fit_drive_amplitude",
    "fit_undriven",
    "noise_dynamics_x",
    "noise_temperature",
    "optimize_bias_at_fixed_drive",
    "optimize_squeeze",
    "phase_averaged_variance",
    "photo_assisted_noise",
    "quadrature_variances",
    "s0",
    "s_finite_freq",
    "sweep",
    "synthesize_curve",
    "to_reduced",
    "vacuum_noise",
    "x_coth_x",
]
