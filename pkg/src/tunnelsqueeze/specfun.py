r"""Special functions for the photo-assisted noise sums.

Integer-order Bessel functions of the first kind are computed with Miller's
downward recurrence, normalized by the identity

.. math::
    J_0(z) + 2 \sum_{k \geq 1} J_{2k}(z) = 1 .

No external special-function library is involved, so the values can be
checked against scipy independently.
"""

import math
from dataclasses import dataclass

import numpy as np

#: largest |z| accepted by the Bessel routines
MAX_ARGUMENT = 1e4
#: below this |x| the series form of x*coth(x) is used
COTH_SERIES_CUTOFF = 1e-2


class ValidatedRangeError(ValueError):
    """Argument lies outside the range the routines were validated for."""


def miller_start_order(z):
    """Starting order of the downward recurrence for argument ``z``."""
    a = abs(z)
    start = math.ceil(a) + 40
    if a > 50:
        # the transition region n ~ z widens like z**(1/3)
        start += math.ceil(12 * a ** (1 / 3))
    return start


@dataclass(frozen=True)
class BesselSeries:
    """J_0(z) ... J_max_order(z) for a single argument.

    Indexing with a negative order applies J_{-n} = (-1)^n J_n.
    """

    argument: float
    max_order: int
    values: np.ndarray

    def __getitem__(self, n):
        n = int(n)
        if abs(n) > self.max_order:
            raise IndexError(f"order {n} outside 0..{self.max_order}")
        v = self.values[abs(n)]
        if n < 0 and n % 2:
            return -v
        return v

    def __len__(self):
        return self.max_order + 1

    def orders(self, lo, hi):
        """Array of J_n for n = lo..hi inclusive (negative orders allowed)."""
        n = np.arange(lo, hi + 1)
        if np.any(np.abs(n) > self.max_order):
            raise IndexError(f"orders {lo}..{hi} exceed max_order {self.max_order}")
        vals = self.values[np.abs(n)]
        sign = np.where((n < 0) & (n % 2 == 1), -1.0, 1.0)
        return sign * vals


def _check_argument(z):
    z = float(z)
    if not math.isfinite(z) or abs(z) > MAX_ARGUMENT:
        raise ValidatedRangeError(
            f"Bessel argument {z!r} outside validated range |z| <= {MAX_ARGUMENT:g}"
        )
    return z


def bessel_j_all(z, max_order):
    """Return J_n(z) for n = 0..max_order as a :class:`BesselSeries`.

    Parameters
    ----------
    z : float
        Real argument, ``|z| <= 1e4``.
    max_order : int
        Highest order wanted (>= 0).
    """
    z = _check_argument(z)
    max_order = int(max_order)
    if max_order < 0:
        raise ValueError(f"max_order must be >= 0, got {max_order}")

    values = np.zeros(max_order + 1)
    if z == 0.0:
        values[0] = 1.0
        return BesselSeries(z, max_order, values)

    a = abs(z)
    start = max(miller_start_order(a), max_order + 20)
    # downward recurrence carried as ratios r_k = J_k / J_{k-1}, which
    # cannot overflow; the tail guess r_{start+1} = 0
    ratios = [0.0] * (start + 2)
    r = 0.0
    for k in range(start, 0, -1):
        r = a / (2.0 * k - a * r)
        ratios[k] = r
    # unnormalized J_k / J_0 builds upward and may underflow harmlessly
    prod = [1.0] * (start + 1)
    for k in range(1, start + 1):
        prod[k] = prod[k - 1] * ratios[k]
    norm = 1.0 + 2.0 * math.fsum(prod[2::2])
    values[:] = np.asarray(prod[: max_order + 1]) / norm
    if z < 0:
        values[1::2] *= -1.0
    return BesselSeries(z, max_order, values)


def bessel_j(n, z):
    """J_n(z) for integer order ``n`` (any sign) and real ``z``."""
    n = int(n)
    return float(bessel_j_all(z, abs(n))[n])


def x_coth_x(x):
    """x * coth(x), finite at x = 0 (where it equals 1). Accepts arrays."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    small = ax < COTH_SERIES_CUTOFF
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        x2 = x * x
        series = 1.0 + x2 * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0)))
        direct = ax / np.tanh(ax)
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out
