r"""Shot noise of a dc+ac biased tunnel junction in reduced units.

Every quantity is evaluated on dimensionless variables

* ``u = e V_dc / (hbar omega)``, dc bias in units of the detection photon energy,
* ``z = e V_ac / (hbar omega_0)``, drive strength, with ``omega_0 = 2 omega / p``,
* ``theta_T = k_B T / (hbar omega)``,

and noise spectral densities come out in units of ``hbar omega / R``, so the
vacuum level is 1 at zero temperature. :func:`to_reduced` and
:func:`noise_temperature` convert from and to SI at the boundary.

The two harmonic sums are

.. math::
    \tilde S = \sum_n J_n(z)^2 \, S(u + 2n/p)

    X = \frac12 \sum_n J_n(z) J_{n+p}(z)
        \left[S_0(u + a_n) + (-1)^p S_0(u - a_n)\right],
        \quad a_n = 1 + 2n/p

and the quadrature variances are ``S~ + X`` and ``S~ - X``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import E_CHARGE, K_B, photon_energy
from .specfun import bessel_j_all, x_coth_x

__all__ = [
    "ParameterError",
    "JunctionParams",
    "DriveParams",
    "ReducedPoint",
    "NoiseResult",
    "s0",
    "s_finite_freq",
    "vacuum_noise",
    "truncation_order",
    "harmonic_sums",
    "photo_assisted_noise",
    "noise_dynamics_x",
    "quadrature_variances",
    "results_from_sums",
    "variance_at_phase",
    "phase_averaged_variance",
    "to_reduced",
    "noise_temperature",
    "evaluate",
]


class ParameterError(ValueError):
    """Invalid physical or reduced parameter. ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _require(cond, field, message):
    if not cond:
        raise ParameterError(field, message)


@dataclass(frozen=True)
class JunctionParams:
    """Tunnel junction: resistance [ohm] and electron temperature [K]."""

    resistance: float
    electron_temperature: float = 0.0

    def __post_init__(self):
        _require(math.isfinite(self.resistance) and self.resistance > 0,
                 "resistance", f"must be > 0, got {self.resistance!r}")
        _require(math.isfinite(self.electron_temperature) and self.electron_temperature >= 0,
                 "electron_temperature", f"must be >= 0, got {self.electron_temperature!r}")


@dataclass(frozen=True)
class DriveParams:
    """Detection and excitation settings, all SI.

    ``measurement_frequency`` is omega/2pi in hertz; the drive runs at
    ``omega_0 = 2 omega / harmonic_p``. ``dc_bias`` and ``ac_amplitude`` are
    in volts, ``quadrature_phase`` in radians.
    """

    measurement_frequency: float
    harmonic_p: int = 1
    dc_bias: float = 0.0
    ac_amplitude: float = 0.0
    quadrature_phase: float = 0.0

    def __post_init__(self):
        _require(math.isfinite(self.measurement_frequency) and self.measurement_frequency > 0,
                 "measurement_frequency", f"must be > 0, got {self.measurement_frequency!r}")
        _require(self.harmonic_p in (1, 2), "harmonic_p",
                 f"must be 1 or 2, got {self.harmonic_p!r}")
        _require(math.isfinite(self.dc_bias), "dc_bias", "must be finite")
        _require(math.isfinite(self.ac_amplitude) and self.ac_amplitude >= 0,
                 "ac_amplitude", f"must be >= 0, got {self.ac_amplitude!r}")
        _require(math.isfinite(self.quadrature_phase), "quadrature_phase", "must be finite")

    @property
    def drive_frequency(self):
        """omega_0 / 2pi in hertz."""
        return 2.0 * self.measurement_frequency / self.harmonic_p


@dataclass(frozen=True)
class ReducedPoint:
    """Dimensionless operating point (u, z, theta_T, p)."""

    u: float
    z: float
    theta_T: float
    p: int = 1

    def __post_init__(self):
        _require(math.isfinite(self.u), "u", "must be finite")
        _require(math.isfinite(self.z) and self.z >= 0, "z", f"must be >= 0, got {self.z!r}")
        _require(math.isfinite(self.theta_T) and self.theta_T >= 0, "theta_T",
                 f"must be >= 0, got {self.theta_T!r}")
        _require(self.p in (1, 2), "p", f"must be 1 or 2, got {self.p!r}")


@dataclass(frozen=True)
class NoiseResult:
    """Noise quantities at one operating point, in units of hbar*omega/R.

    ``var_a`` and ``var_b`` are the extremal quadratures ``S~ + X`` and
    ``S~ - X``; ``min_quadrature`` is the smaller of the two whatever the
    sign of X.
    """

    s_tilde: float
    x_corr: float
    var_a: float
    var_b: float
    min_quadrature: float
    squeeze_ratio: float
    squeeze_db: float

    @property
    def squeezed(self):
        return self.squeeze_ratio < 1.0


def s0(v, theta_T):
    """Zero-frequency shot noise v*coth(v / 2 theta_T), reduced units.

    Exactly ``|v|`` at ``theta_T == 0``. Accepts arrays for ``v``.
    """
    v = np.asarray(v, dtype=float)
    if theta_T < 0:
        raise ParameterError("theta_T", f"must be >= 0, got {theta_T!r}")
    if theta_T == 0:
        out = np.abs(v)
    else:
        two_t = 2.0 * theta_T
        # coth(x) == 1 in double precision past |x| ~ 19
        cold = np.abs(v) > 40.0 * two_t
        with np.errstate(over="ignore"):
            x = np.where(cold, 0.0, v / two_t)
        out = np.where(cold, np.abs(v), two_t * x_coth_x(x))
    return float(out) if np.ndim(out) == 0 else out


def s_finite_freq(u, theta_T):
    """Equilibrium noise at the detection frequency, [S0(u+1) + S0(u-1)] / 2."""
    u = np.asarray(u, dtype=float)
    out = 0.5 * (s0(u + 1.0, theta_T) + s0(u - 1.0, theta_T))
    return float(out) if np.ndim(out) == 0 else out


def vacuum_noise(theta_T):
    """Noise on the zero-bias plateau, the reference for squeezing."""
    return s_finite_freq(0.0, theta_T)


def truncation_order(z, p):
    """Default cutoff N of the harmonic sums, n = -N..N."""
    return math.ceil(z) + abs(p) + 40


def harmonic_sums(u, z, theta_T, p, order=None):
    """Vectorized (S~, X) for an array of biases at fixed (z, theta_T, p).

    Parameters
    ----------
    u : float or array
        Reduced dc bias.
    z, theta_T : float
        Reduced drive strength and temperature.
    p : int
        Harmonic index, 1 or 2.
    order : int, optional
        Sum over n = -order..order. Defaults to :func:`truncation_order`.

    Returns
    -------
    s_tilde, x_corr : float or ndarray
        Same shape as ``u``.
    """
    u = np.asarray(u, dtype=float)
    if order is None:
        order = truncation_order(z, p)
    n = np.arange(-order, order + 1)
    jn = bessel_j_all(z, order + p)
    j_n = jn.orders(-order, order)
    j_np = jn.orders(-order + p, order + p)

    shift = 2.0 / p
    weights_s = j_n * j_n
    weights_x = j_n * j_np
    # drop identically-zero terms, z = 0 keeps only n = 0
    keep_s = weights_s != 0.0
    keep_x = weights_x != 0.0

    uu = u[..., None]
    s_terms = s_finite_freq(uu + shift * n[keep_s], theta_T)
    s_tilde = np.sum(weights_s[keep_s] * s_terms, axis=-1)

    a_n = 1.0 + shift * n[keep_x]
    sign = 1.0 if p % 2 == 0 else -1.0
    x_terms = s0(uu + a_n, theta_T) + sign * s0(uu - a_n, theta_T)
    x_corr = 0.5 * np.sum(weights_x[keep_x] * x_terms, axis=-1)

    if s_tilde.ndim == 0:
        return float(s_tilde), float(x_corr)
    return s_tilde, x_corr


def photo_assisted_noise(point, order=None):
    """S~, the Bessel-weighted sum of photon-shifted noise curves."""
    return harmonic_sums(point.u, point.z, point.theta_T, point.p, order)[0]


def noise_dynamics_x(point, order=None):
    """X, the phase-sensitive correlator that modulates the noise."""
    return harmonic_sums(point.u, point.z, point.theta_T, point.p, order)[1]


def results_from_sums(s_tilde, x_corr, vacuum):
    """Build a :class:`NoiseResult` from precomputed S~, X and vacuum level."""
    s_tilde = float(s_tilde)
    x_corr = float(x_corr)
    # larger quadrature rounded once; the smaller is 2*S~ minus it, which is
    # exact (Sterbenz) whenever |X| <= S~, so var_a + var_b == 2*S~ bitwise
    big = s_tilde + abs(x_corr)
    small = 2.0 * s_tilde - big
    if x_corr >= 0:
        var_a, var_b = big, small
    else:
        var_a, var_b = small, big
    ratio = small / vacuum
    with np.errstate(divide="ignore", invalid="ignore"):
        db = float(10.0 * np.log10(ratio))
    return NoiseResult(s_tilde, x_corr, var_a, var_b, small, ratio, db)


def quadrature_variances(point, order=None):
    """Quadrature variances and squeezing figures at ``point``."""
    s_tilde, x_corr = harmonic_sums(point.u, point.z, point.theta_T, point.p, order)
    return results_from_sums(s_tilde, x_corr, vacuum_noise(point.theta_T))


def variance_at_phase(point, theta):
    """Variance of the quadrature at angle ``theta``: S~ + X cos(2 theta).

    ``theta = 0`` is the A quadrature, ``theta = pi/2`` the B quadrature.
    """
    s_tilde, x_corr = harmonic_sums(point.u, point.z, point.theta_T, point.p)
    return s_tilde + x_corr * np.cos(2.0 * np.asarray(theta))


def phase_averaged_variance(point, check=False, n_phases=64, atol=1e-12):
    """Variance seen with detuned generators, i.e. averaged over phase.

    The average of cos(2 theta) vanishes so this is just S~. With
    ``check=True`` the average is also taken numerically on ``n_phases``
    equispaced angles and a ``RuntimeError`` is raised on disagreement.
    """
    s_tilde, x_corr = harmonic_sums(point.u, point.z, point.theta_T, point.p)
    if check:
        theta = 2.0 * np.pi * np.arange(n_phases) / n_phases
        numeric = float(np.mean(s_tilde + x_corr * np.cos(2.0 * theta)))
        if abs(numeric - s_tilde) > atol:
            raise RuntimeError(
                f"phase average {numeric!r} disagrees with S~ {s_tilde!r}"
            )
    return s_tilde


def to_reduced(junction, drive):
    """Map SI junction/drive parameters onto a :class:`ReducedPoint`."""
    e_photon = photon_energy(drive.measurement_frequency)
    e_drive = photon_energy(drive.drive_frequency)
    return ReducedPoint(
        u=E_CHARGE * drive.dc_bias / e_photon,
        z=E_CHARGE * drive.ac_amplitude / e_drive,
        theta_T=K_B * junction.electron_temperature / e_photon,
        p=drive.harmonic_p,
    )


def noise_temperature(sd, junction, drive):
    """Convert a reduced spectral density to a noise temperature in kelvin.

    T_N = R * S / (2 k_B) with S = sd * hbar*omega / R, so the resistance
    drops out.
    """
    sd_arr = np.asarray(sd, dtype=float)
    if np.any(sd_arr < 0) or not np.all(np.isfinite(sd_arr)):
        raise ParameterError("sd", "noise spectral density must be finite and >= 0")
    out = photon_energy(drive.measurement_frequency) / (2.0 * K_B) * sd_arr
    return float(out) if out.ndim == 0 else out


def evaluate(junction, drive):
    """SI convenience wrapper: :func:`quadrature_variances` at (junction, drive)."""
    return quadrature_variances(to_reduced(junction, drive))
