"""Calibration of the detection chain from noise-vs-bias curves.

Measured power is modeled as ``G * (S_amp + S)``, with ``S`` the junction
noise (undriven, or photo-assisted when the generators are detuned).
Spectral densities here are SI, A^2/Hz; ``G`` converts them to whatever
unit the curve was recorded in.

Fits use a small Levenberg-Marquardt loop on relative residuals, which is
the natural weighting for radiometer-type multiplicative fluctuations.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import E_CHARGE, K_B, photon_energy
from .noise import ParameterError, harmonic_sums, s_finite_freq

__all__ = [
    "NoiseCurve",
    "CalibrationFit",
    "FitError",
    "IllConditionedFitError",
    "FitConvergenceError",
    "LMResult",
    "levenberg_marquardt",
    "forward_model",
    "synthesize_curve",
    "initial_guess",
    "fit_undriven",
    "fit_drive_amplitude",
    "MIN_POINTS",
]

MIN_POINTS = 8
DEFAULT_T_GUESS = 0.05


class FitError(RuntimeError):
    pass


class IllConditionedFitError(FitError):
    """The data cannot constrain all fit parameters."""


class FitConvergenceError(FitError):
    """The fit stopped without converging; ``best`` holds the best iterate."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class NoiseCurve:
    """Measured noise vs dc bias [V], at detection frequency [Hz] and resistance [ohm]."""

    bias: np.ndarray
    measured: np.ndarray
    frequency: float
    resistance: float

    def __post_init__(self):
        bias = np.asarray(self.bias, dtype=float)
        measured = np.asarray(self.measured, dtype=float)
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "measured", measured)
        if bias.ndim != 1 or bias.shape != measured.shape:
            raise ParameterError("points", "bias and measured must be 1-d of equal length")
        if bias.size < MIN_POINTS:
            raise ParameterError("points", f"need at least {MIN_POINTS} points, got {bias.size}")
        if not np.all(np.isfinite(bias)) or np.any(np.diff(bias) <= 0):
            raise ParameterError("bias", "biases must be finite and strictly increasing")
        if not np.all(np.isfinite(measured)) or np.any(measured <= 0):
            raise ParameterError("measured", "values must be finite and positive")
        if not (math.isfinite(self.frequency) and self.frequency > 0):
            raise ParameterError("frequency", f"must be > 0, got {self.frequency!r}")
        if not (math.isfinite(self.resistance) and self.resistance > 0):
            raise ParameterError("resistance", f"must be > 0, got {self.resistance!r}")

    def __len__(self):
        return self.bias.size

    @property
    def reduced_bias(self):
        return E_CHARGE * self.bias / photon_energy(self.frequency)

    @property
    def noise_unit(self):
        """hbar*omega / R in A^2/Hz, the unit of reduced spectral densities."""
        return photon_energy(self.frequency) / self.resistance


@dataclass(frozen=True)
class CalibrationFit:
    """Fitted gain, amplifier noise [A^2/Hz], electron temperature [K], optional V_ac [V].

    ``covariance_diag`` maps parameter names to linearized variances.
    ``objective_history`` lists the cost after every accepted step.
    """

    gain: float
    amp_noise: float
    temperature: float
    rms_residual: float
    covariance_diag: dict = field(default_factory=dict)
    v_ac: float | None = None
    converged: bool = True
    iterations: int = 0
    objective_history: tuple = ()

    def amp_noise_temperature(self, resistance):
        """Amplifier noise as a noise temperature R S_amp / 2 k_B."""
        return resistance * self.amp_noise / (2.0 * K_B)

    def to_dict(self):
        return {
            "gain": self.gain,
            "amp_noise": self.amp_noise,
            "temperature": self.temperature,
            "v_ac": self.v_ac,
            "rms_residual": self.rms_residual,
            "covariance_diag": dict(self.covariance_diag),
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            gain=float(d["gain"]), amp_noise=float(d["amp_noise"]),
            temperature=float(d["temperature"]),
            rms_residual=float(d.get("rms_residual", 0.0)),
            covariance_diag={k: float(v) for k, v in d.get("covariance_diag", {}).items()},
            v_ac=None if d.get("v_ac") is None else float(d["v_ac"]),
            converged=bool(d.get("converged", True)),
            iterations=int(d.get("iterations", 0)),
        )


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    jacobian: np.ndarray
    history: list
    iterations: int
    converged: bool
    message: str


def _fd_jacobian(fun, x, r, typical, rel_step):
    jac = np.empty((r.size, x.size))
    for k in range(x.size):
        h = rel_step * max(abs(x[k]), typical[k])
        xp = x.copy()
        xp[k] += h
        jac[:, k] = (fun(xp) - r) / h
    return jac


def levenberg_marquardt(fun, x0, lower=None, typical=None, rel_step=1e-6,
                        max_iter=500, ftol=1e-10, xtol=1e-12):
    """Minimize ``sum(fun(x)**2)`` by damped Gauss-Newton.

    The Jacobian is a forward finite difference with step ``rel_step``
    relative to ``max(|x|, typical)``. Steps are projected onto
    ``x >= lower`` and only accepted when they lower the cost, so
    ``history`` is strictly decreasing.
    """
    x = np.asarray(x0, dtype=float).copy()
    lower = np.full(x.size, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    typical = np.ones(x.size) if typical is None else np.asarray(typical, dtype=float)
    x = np.maximum(x, lower)
    r = fun(x)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    jac = _fd_jacobian(fun, x, r, typical, rel_step)

    for it in range(1, max_iter + 1):
        if cost == 0.0:
            return LMResult(x, cost, jac, history, it - 1, True, "exact fit")
        a = jac.T @ jac
        g = jac.T @ r
        diag = np.diag(a).copy()
        if not np.any(diag > 0):
            return LMResult(x, cost, jac, history, it - 1, True, "zero gradient")
        diag[diag <= 0] = np.max(diag) * 1e-15
        while True:
            try:
                step = np.linalg.solve(a + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(a + lam * np.diag(diag), -g, rcond=None)[0]
            x_new = np.maximum(x + step, lower)
            r_new = fun(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                break
            lam *= 10.0
            if lam > 1e16:
                return LMResult(x, cost, jac, history, it - 1, True, "no further decrease")
        dx = x_new - x
        rel_drop = (cost - cost_new) / cost
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        lam = max(lam / 10.0, 1e-12)
        jac = _fd_jacobian(fun, x, r, typical, rel_step)
        if rel_drop < ftol or np.all(np.abs(dx) <= xtol * (np.abs(x) + typical)):
            return LMResult(x, cost, jac, history, it, True, "converged")
    return LMResult(x, cost, jac, history, max_iter, False, "iteration limit reached")


def forward_model(bias, frequency, resistance, gain, amp_noise, temperature,
                  v_ac=0.0, harmonic_p=1):
    """Detector reading ``G * (S_amp + S~)`` at each bias [V].

    With ``v_ac = 0`` this is the undriven ``G * (S_amp + S)``.
    """
    e_photon = photon_energy(frequency)
    unit = e_photon / resistance
    u = E_CHARGE * np.asarray(bias, dtype=float) / e_photon
    theta = K_B * temperature / e_photon
    z = E_CHARGE * v_ac / photon_energy(2.0 * frequency / harmonic_p)
    if z == 0:
        s = s_finite_freq(u, theta)
    else:
        s = harmonic_sums(u, z, theta, harmonic_p)[0]
    return gain * (amp_noise + unit * s)


def synthesize_curve(junction, drive, gain, amp_noise, biases, noise_level=0.0, seed=0):
    """Forward-model curve with multiplicative Gaussian noise.

    The junction noise is photo-assisted (phase averaged) when
    ``drive.ac_amplitude > 0`` and undriven otherwise; ``drive.dc_bias`` is
    ignored in favor of ``biases``.
    """
    if noise_level < 0:
        raise ParameterError("noise_level", "must be >= 0")
    model = forward_model(biases, drive.measurement_frequency, junction.resistance, gain,
                          amp_noise, junction.electron_temperature, drive.ac_amplitude,
                          drive.harmonic_p)
    if noise_level > 0:
        rng = np.random.default_rng(seed)
        model = model * (1.0 + noise_level * rng.standard_normal(model.shape))
    return NoiseCurve(np.asarray(biases, dtype=float), model,
                      drive.measurement_frequency, junction.resistance)


def _reduced_params(curve, fit):
    unit = curve.noise_unit
    e_photon = photon_energy(curve.frequency)
    return fit.gain * unit, fit.amp_noise / unit, K_B * fit.temperature / e_photon


def initial_guess(curve):
    """Starting point from the high-bias asymptote: (G, S_amp, T).

    Beyond the plateau the undriven noise approaches ``|u|`` in reduced
    units, so a line through the outer points gives the gain (slope) and
    amplifier noise (intercept).
    """
    u = curve.reduced_bias
    outer = np.abs(u) >= 1.5
    if np.count_nonzero(outer) < 2:
        raise IllConditionedFitError("no points beyond the plateau for an initial guess")
    slope, intercept = np.polyfit(np.abs(u[outer]), curve.measured[outer], 1)
    if slope <= 0:
        raise IllConditionedFitError("non-positive high-bias slope, cannot seed the gain")
    unit = curve.noise_unit
    return slope / unit, intercept / slope * unit, DEFAULT_T_GUESS


def _check_span(curve):
    u = curve.reduced_bias
    if u.min() > -2.0 or u.max() < 2.0 or not np.any(np.abs(u) < 1.0):
        raise IllConditionedFitError(
            "curve must cover the plateau |eV| < hbar*omega and reach twice that bias "
            f"on both sides (reduced span [{u.min():.3g}, {u.max():.3g}])"
        )


def _covariance(lm, n_points):
    dof = max(n_points - lm.x.size, 1)
    a = lm.jacobian.T @ lm.jacobian
    return np.diag(np.linalg.pinv(a)) * lm.cost / dof


def fit_undriven(curve, initial=None, max_iter=500):
    """Fit gain, amplifier noise and electron temperature to an undriven curve.

    Parameters
    ----------
    curve : NoiseCurve
        Must span the plateau and at least twice the threshold bias on each side.
    initial : CalibrationFit or (G, S_amp, T), optional
        Starting point; defaults to :func:`initial_guess`.

    Raises
    ------
    IllConditionedFitError
        The bias span cannot separate the parameters.
    FitConvergenceError
        Iteration limit hit; the exception carries the best iterate.
    """
    _check_span(curve)
    if initial is None:
        initial = initial_guess(curve)
    elif isinstance(initial, CalibrationFit):
        initial = (initial.gain, initial.amp_noise, initial.temperature)
    g0, a0, t0 = initial
    unit = curve.noise_unit
    e_photon = photon_energy(curve.frequency)
    u = curve.reduced_bias
    y = curve.measured
    scale = float(np.median(y))

    def residual(x):
        g, a, theta = x
        return (g * scale * (a + s_finite_freq(u, theta))) / y - 1.0

    x0 = np.array([g0 * unit / scale, a0 / unit, K_B * t0 / e_photon])
    lm = levenberg_marquardt(residual, x0, lower=[0.0, -np.inf, 0.0],
                             typical=[abs(x0[0]), max(abs(x0[1]), 1.0), 1e-2],
                             max_iter=max_iter)
    var = _covariance(lm, y.size)
    g, a, theta = lm.x
    gain_factor = scale / unit
    fit = CalibrationFit(
        gain=float(g * gain_factor),
        amp_noise=float(a * unit),
        temperature=float(theta * e_photon / K_B),
        rms_residual=float(np.sqrt(np.mean((lm.x[0] * scale * (a + s_finite_freq(u, theta)) - y) ** 2))),
        covariance_diag={
            "gain": float(var[0] * gain_factor**2),
            "amp_noise": float(var[1] * unit**2),
            "temperature": float(var[2] * (e_photon / K_B) ** 2),
        },
        converged=lm.converged,
        iterations=lm.iterations,
        objective_history=tuple(lm.history),
    )
    if not lm.converged:
        raise FitConvergenceError(f"undriven fit did not converge: {lm.message}", fit)
    if fit.gain <= 0:
        raise IllConditionedFitError("fitted gain is not positive")
    return fit


def fit_drive_amplitude(curve, fixed, omega0, max_iter=500):
    """Fit the ac amplitude V_ac to a phase-averaged (detuned) curve.

    Gain, amplifier noise and temperature are taken from ``fixed``.
    ``omega0`` is the drive frequency in hertz and must be twice or equal
    to the detection frequency of ``curve``.
    """
    ratio = 2.0 * curve.frequency / omega0
    p = round(ratio)
    if p not in (1, 2) or abs(ratio - p) > 1e-9 * p:
        raise ParameterError("omega0", "drive frequency must be 2x or 1x the detection frequency")
    g, a, theta = _reduced_params(curve, fixed)
    u = curve.reduced_bias
    y = curve.measured
    volts_per_z = photon_energy(omega0) / E_CHARGE

    def model(z):
        if z == 0:
            return g * (a + s_finite_freq(u, theta))
        return g * (a + harmonic_sums(u, z, theta, p)[0])

    def residual(x):
        return model(float(x[0])) / y - 1.0

    # coarse scan seeds the local fit, the cost is not convex in z
    scan = np.linspace(0.0, 10.0, 101)
    costs = [float(np.sum(residual([zc]) ** 2)) for zc in scan]
    z0 = scan[int(np.argmin(costs))]
    lm = levenberg_marquardt(residual, [z0], lower=[0.0], typical=[1.0], max_iter=max_iter)
    var = _covariance(lm, y.size)
    z = float(lm.x[0])
    fit = replace(
        fixed,
        v_ac=z * volts_per_z,
        rms_residual=float(np.sqrt(np.mean((model(z) - y) ** 2))),
        covariance_diag={**fixed.covariance_diag, "v_ac": float(var[0] * volts_per_z**2)},
        converged=lm.converged,
        iterations=lm.iterations,
        objective_history=tuple(lm.history),
    )
    if not lm.converged:
        raise FitConvergenceError(f"drive amplitude fit did not converge: {lm.message}", fit)
    return fit
