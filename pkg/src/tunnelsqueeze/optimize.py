"""Search for optimal squeezing and sweep noise curves.

The squeeze ratio is piecewise smooth at zero temperature, with kinks at the
photon-assisted thresholds, so the search is derivative free: a coarse grid
followed by Nelder-Mead refinement from the best grid point.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .constants import E_CHARGE, photon_energy
from .noise import (
    DriveParams,
    JunctionParams,
    ParameterError,
    harmonic_sums,
    results_from_sums,
    s_finite_freq,
    to_reduced,
    vacuum_noise,
)

__all__ = [
    "SqueezeOptimum",
    "SweepSpec",
    "DEFAULT_BOUNDS_U",
    "DEFAULT_BOUNDS_Z",
    "EVALUATION_BUDGET",
    "squeeze_ratio_curve",
    "optimize_squeeze",
    "optimize_bias_at_fixed_drive",
    "sweep",
    "sweep_workers",
]

DEFAULT_BOUNDS_U = (-4.0, 4.0)
DEFAULT_BOUNDS_Z = (0.0, 4.0)
EVALUATION_BUDGET = 1_000_000
RATIO_TOL = 1e-6
# grid points this close to the minimum count as ties
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class SqueezeOptimum:
    u_star: float
    z_star: float
    ratio: float
    db: float
    converged: bool
    evaluations: int


def _check_interval(bounds, name):
    lo, hi = (float(b) for b in bounds)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise ParameterError(name, f"empty or invalid interval {bounds!r}")
    return lo, hi


def squeeze_ratio_curve(u, z, theta_T, p):
    """min(S~ - |X|) / S_vac for an array of biases at fixed drive."""
    s_tilde, x_corr = harmonic_sums(u, z, theta_T, p)
    return (s_tilde - np.abs(x_corr)) / vacuum_noise(theta_T)


def _ratio_at(u, z, theta_T, p):
    return float(squeeze_ratio_curve(u, z, theta_T, p))


def _pick(u, z, ratio):
    """Index of the minimum with ties broken by |u|, then u >= 0, then z."""
    best = np.min(ratio)
    idx = np.flatnonzero(ratio <= best + _TIE_TOL)
    key = sorted(idx, key=lambda i: (abs(u[i]), u[i] < 0, z[i]))
    return key[0]


def _canonical_sign(u_star, z_star, ratio, theta_T, p):
    # the ratio is even in u, prefer the non-negative representative
    if u_star < 0 and _ratio_at(-u_star, z_star, theta_T, p) <= ratio + _TIE_TOL:
        return -u_star
    return u_star


def _optimum(u, z, ratio, converged, evaluations):
    return SqueezeOptimum(
        u_star=float(u), z_star=float(z), ratio=float(ratio),
        db=float(10.0 * np.log10(ratio)), converged=bool(converged),
        evaluations=int(evaluations),
    )


def optimize_squeeze(theta_T, p, bounds_u=DEFAULT_BOUNDS_U, bounds_z=DEFAULT_BOUNDS_Z,
                     grid=201, budget=EVALUATION_BUDGET):
    """Minimize the squeeze ratio over bias u and drive z.

    Parameters
    ----------
    theta_T : float
        Reduced temperature k_B T / (hbar omega).
    p : int
        1 for a drive at twice the detection frequency, 2 for equal frequencies.
    bounds_u, bounds_z : (float, float)
        Search intervals; a degenerate interval pins that coordinate.
    grid : int
        Points per axis of the coarse grid.
    budget : int
        Maximum number of kernel evaluations.

    Returns
    -------
    SqueezeOptimum
        ``converged`` is False when the refinement did not meet its
        tolerance within the remaining budget.
    """
    if p not in (1, 2):
        raise ParameterError("p", f"must be 1 or 2, got {p!r}")
    if theta_T < 0:
        raise ParameterError("theta_T", f"must be >= 0, got {theta_T!r}")
    u_lo, u_hi = _check_interval(bounds_u, "bounds_u")
    z_lo, z_hi = _check_interval(bounds_z, "bounds_z")
    if z_lo < 0:
        raise ParameterError("bounds_z", "drive strength must be >= 0")

    us = np.linspace(u_lo, u_hi, grid) if u_hi > u_lo else np.array([u_lo])
    zs = np.linspace(z_lo, z_hi, grid) if z_hi > z_lo else np.array([z_lo])
    evaluations = us.size * zs.size
    if evaluations > budget:
        raise ParameterError("grid", f"{evaluations} grid points exceed budget {budget}")

    table = np.array([squeeze_ratio_curve(us, z, theta_T, p) for z in zs])
    uu, zz = np.meshgrid(us, zs)
    i = _pick(uu.ravel(), zz.ravel(), table.ravel())
    u0, z0, r0 = uu.ravel()[i], zz.ravel()[i], table.ravel()[i]

    free = [u_hi > u_lo, z_hi > z_lo]
    if not any(free):
        return _optimum(u0, z0, r0, True, evaluations)

    start = np.array([u0, z0])[free]
    box = [b for b, f in zip([(u_lo, u_hi), (z_lo, z_hi)], free) if f]

    def full(x):
        q = np.array([u0, z0])
        q[free] = x
        return q

    def objective(x):
        q = full(x)
        return _ratio_at(q[0], q[1], theta_T, p)

    # initial simplex spans one grid cell per free axis
    step = np.array([(hi - lo) / (grid - 1) for lo, hi in box])
    simplex = np.vstack([start] + [start + np.eye(len(start))[k] * step[k]
                                   for k in range(len(start))])
    simplex = np.clip(simplex, [b[0] for b in box], [b[1] for b in box])
    for k in range(1, len(simplex)):
        if np.allclose(simplex[k], start):
            simplex[k] = start - np.eye(len(start))[k - 1] * step[k - 1]

    res = minimize(
        objective, start, method="Nelder-Mead", bounds=box,
        options={"initial_simplex": simplex, "xatol": 1e-7, "fatol": RATIO_TOL * 1e-3,
                 "maxfev": budget - evaluations},
    )
    evaluations += res.nfev

    if res.fun <= r0:
        q = full(res.x)
        u_star, z_star, ratio = q[0], q[1], float(res.fun)
    else:
        u_star, z_star, ratio = u0, z0, r0
    u_star = _canonical_sign(u_star, z_star, ratio, theta_T, p)
    return _optimum(u_star, z_star, ratio, res.success, evaluations)


def optimize_bias_at_fixed_drive(z, theta_T, p, bounds_u=DEFAULT_BOUNDS_U, grid=2001,
                                 budget=EVALUATION_BUDGET):
    """One-dimensional search over bias at fixed drive strength ``z``."""
    if z < 0:
        raise ParameterError("z", f"must be >= 0, got {z!r}")
    return optimize_squeeze(theta_T, p, bounds_u=bounds_u, bounds_z=(z, z),
                            grid=grid, budget=budget)


@dataclass(frozen=True)
class SweepSpec:
    """A one-axis sweep around a fixed junction/drive configuration.

    ``axis`` is ``"dc_bias"`` or ``"ac_amplitude"``. ``lo`` and ``hi`` are
    volts, or reduced u / z when ``reduced`` is true. The swept field of
    ``drive`` is ignored.
    """

    axis: str
    lo: float
    hi: float
    points: int
    junction: JunctionParams
    drive: DriveParams
    reduced: bool = False

    def __post_init__(self):
        if self.axis not in ("dc_bias", "ac_amplitude"):
            raise ParameterError("axis", f"must be dc_bias or ac_amplitude, got {self.axis!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ParameterError("range", f"need lo < hi, got [{self.lo!r}, {self.hi!r}]")
        if not 2 <= int(self.points) <= 1_000_000:
            raise ParameterError("points", f"must be in [2, 1e6], got {self.points!r}")
        if self.axis == "ac_amplitude" and self.lo < 0:
            raise ParameterError("range", "ac amplitude must be >= 0")

    def abscissa(self):
        return np.linspace(self.lo, self.hi, int(self.points))

    def volts_per_unit(self):
        """Conversion from the reduced swept variable to volts."""
        if self.axis == "dc_bias":
            return photon_energy(self.drive.measurement_frequency) / E_CHARGE
        return photon_energy(self.drive.drive_frequency) / E_CHARGE


def sweep_workers():
    """Worker count from ``SQUEEZE_THREADS`` (unset or 0 means automatic)."""
    raw = os.environ.get("SQUEEZE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError("SQUEEZE_THREADS", f"not an integer: {raw!r}") from None
    if n < 0:
        raise ParameterError("SQUEEZE_THREADS", "must be >= 0")
    return n or (os.cpu_count() or 1)


def sweep(spec, workers=1):
    """Evaluate quadrature variances along the sweep axis.

    Returns a list of ``(abscissa, NoiseResult)`` in increasing abscissa,
    where the abscissa is in the units of ``spec.lo``/``spec.hi``.
    """
    base = to_reduced(spec.junction, spec.drive)
    x = spec.abscissa()
    scale = 1.0 if spec.reduced else 1.0 / spec.volts_per_unit()
    reduced = x * scale
    vac = vacuum_noise(base.theta_T)

    if spec.axis == "dc_bias":
        chunks = np.array_split(np.arange(x.size), max(1, min(workers, x.size)))

        def run(idx):
            return harmonic_sums(reduced[idx], base.z, base.theta_T, base.p)
    else:
        chunks = [np.array([i]) for i in range(x.size)]

        def run(idx):
            s, xc = harmonic_sums(base.u, float(reduced[idx[0]]), base.theta_T, base.p)
            return np.array([s]), np.array([xc])

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]

    s_tilde = np.concatenate([np.atleast_1d(pt[0]) for pt in parts])
    x_corr = np.concatenate([np.atleast_1d(pt[1]) for pt in parts])
    return [(float(a), results_from_sums(s, xc, vac))
            for a, s, xc in zip(x, s_tilde, x_corr)]


def undriven_curve(spec):
    """S at each abscissa of ``spec`` (zero drive), for plotting alongside a sweep."""
    base = to_reduced(spec.junction, spec.drive)
    if spec.axis == "dc_bias":
        scale = 1.0 if spec.reduced else 1.0 / spec.volts_per_unit()
        return s_finite_freq(spec.abscissa() * scale, base.theta_T)
    return np.full(int(spec.points), s_finite_freq(base.u, base.theta_T))
