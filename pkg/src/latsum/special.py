"""Jacobi theta series and the upper incomplete gamma function.

These are the scalar building blocks of every lattice sum in this package.
All theta functions are evaluated at the nome q = exp(-pi*t) with t > 0 and
are written so that the series actually summed always has a nome q <= e^-pi:
for t < 1 the value is obtained from the modular (Poisson) transform

    theta3(e^{-pi t}) = t^{-1/2} theta3(e^{-pi/t})
    theta2(e^{-pi t}) = t^{-1/2} theta4(e^{-pi/t})
    theta4(e^{-pi t}) = t^{-1/2} theta2(e^{-pi/t})

so a handful of terms suffice at every t.  Series are truncated adaptively:
summation stops once the next term falls below ``1e-17`` times the running
sum, which certifies the tail through the geometric-ratio majorant
(successive term ratios of a theta series are themselves < q^2 < 1).

The shift generalisation sum_j exp(-pi t (j+phi)^2) and its Poisson dual
sum_j cos(2 pi j phi) exp(-pi t j^2) are provided for sums over shifted
one-dimensional sublattices; phi = 0 and phi = 1/2 recover theta3/theta2
and theta3/theta4 respectively.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

# Relative truncation threshold for all theta series.
_TRUNC = 1e-17

# Below this argument the cosine-theta series is abandoned for its Poisson
# transform; the direct series still converges there but needlessly slowly.
_COS_SERIES_MIN = 0.25


def _check_t(t: float) -> float:
    t = float(t)
    if not t > 0.0 or math.isinf(t):
        raise ValueError(f"theta argument t must be a positive real, got {t}")
    return t


def reduce_shift(phi: float) -> float:
    """Reduce a shift to the interval [0, 1).

    The shifted theta sum runs over all integers, so its value is invariant
    under phi -> phi + 1 and under phi -> -phi; the canonical representative
    keeps comparisons and caching well defined.
    """
    phi = float(phi) % 1.0
    if phi >= 1.0:  # guards the phi = -1e-17 rounding case
        phi -= 1.0
    return phi


def _theta3_series(t: float) -> float:
    # sum_j exp(-pi t j^2), intended for t >= ~0.25
    total = 1.0
    j = 1
    while True:
        term = 2.0 * math.exp(-math.pi * t * j * j)
        total += term
        if term <= _TRUNC * total:
            return total
        j += 1


def _theta4_series(t: float) -> float:
    total = 1.0
    j = 1
    sign = -1.0
    while True:
        term = 2.0 * math.exp(-math.pi * t * j * j)
        total += sign * term
        if term <= _TRUNC * abs(total):
            return total
        j += 1
        sign = -sign


def _theta2_series(t: float) -> float:
    # 2 sum_{j>=0} exp(-pi t (j+1/2)^2), intended for t >= ~0.25
    total = 0.0
    j = 0
    while True:
        half = j + 0.5
        term = 2.0 * math.exp(-math.pi * t * half * half)
        total += term
        if term <= _TRUNC * total and j >= 1:
            return total
        j += 1


def theta3(t: float) -> float:
    """theta3(e^{-pi t}) = sum_j exp(-pi t j^2)."""
    t = _check_t(t)
    if t >= 1.0:
        return _theta3_series(t)
    return _theta3_series(1.0 / t) / math.sqrt(t)


def theta2(t: float) -> float:
    """theta2(e^{-pi t}) = sum_j exp(-pi t (j-1/2)^2)."""
    t = _check_t(t)
    if t >= 1.0:
        return _theta2_series(t)
    return _theta4_series(1.0 / t) / math.sqrt(t)


def theta4(t: float) -> float:
    """theta4(e^{-pi t}) = sum_j (-1)^j exp(-pi t j^2)."""
    t = _check_t(t)
    if t >= 1.0:
        return _theta4_series(t)
    return _theta2_series(1.0 / t) / math.sqrt(t)


def _shifted_series(phi: float, t: float) -> float:
    # sum_j exp(-pi t (j+phi)^2) with phi in [0,1), for t >= ~0.25.
    # Walk outwards from the two integers bracketing -phi; each direction is
    # eventually geometric with ratio < exp(-2 pi t), so the running-sum
    # truncation rule certifies the tail.
    total = 0.0
    j = 0
    while True:  # j + phi = phi, 1+phi, 2+phi, ...
        x = j + phi
        term = math.exp(-math.pi * t * x * x)
        total += term
        if j >= 1 and term <= _TRUNC * total:
            break
        j += 1
    j = -1
    while True:  # |j + phi| = 1-phi, 2-phi, ...
        x = j + phi
        term = math.exp(-math.pi * t * x * x)
        total += term
        if j <= -2 and term <= _TRUNC * total:
            break
        j -= 1
    return total


def shifted_theta(phi: float, t: float) -> float:
    """sum_j exp(-pi t (j+phi)^2) for real shift phi and t > 0.

    For t >= 1 the defining series is summed directly; for t < 1 the Poisson
    form t^{-1/2} sum_j cos(2 pi j phi) exp(-pi j^2 / t) is used instead.
    """
    t = _check_t(t)
    phi = reduce_shift(phi)
    if t >= 1.0:
        return _shifted_series(phi, t)
    return cosine_theta(phi, 1.0 / t) / math.sqrt(t)


def _cosine_series_tail(phi: float, t: float) -> float:
    # sum over j >= 1 of 2 cos(2 pi j phi) exp(-pi t j^2)
    total = 0.0
    scale = 2.0 * math.exp(-math.pi * t)  # magnitude of the j=1 envelope
    j = 1
    while True:
        mag = 2.0 * math.exp(-math.pi * t * j * j)
        total += mag * math.cos(2.0 * math.pi * j * phi)
        if j >= 3 and mag <= _TRUNC * max(abs(total), scale):
            return total
        j += 1


def cosine_theta(phi: float, t: float) -> float:
    """sum_j cos(2 pi j phi) exp(-pi t j^2), the Poisson dual of shifted_theta.

    phi = 0 gives theta3, phi = 1/2 gives theta4.
    """
    t = _check_t(t)
    phi = reduce_shift(phi)
    if t >= _COS_SERIES_MIN:
        return 1.0 + _cosine_series_tail(phi, t)
    return _shifted_series(phi, 1.0 / t) / math.sqrt(t)


def cosine_theta_minus_one(phi: float, t: float) -> float:
    """cosine_theta(phi, t) - 1 without cancellation for large t.

    Used by the analytically continued lattice sums, where products of
    factors (1 + eps) must be expanded around the zero mode.
    """
    t = _check_t(t)
    phi = reduce_shift(phi)
    if t >= _COS_SERIES_MIN:
        return _cosine_series_tail(phi, t)
    return _shifted_series(phi, 1.0 / t) / math.sqrt(t) - 1.0


def prod3_minus_one(e1: float, e2: float, e3: float) -> float:
    """(1+e1)(1+e2)(1+e3) - 1 expanded, exact for any magnitudes."""
    return (
        e1 + e2 + e3
        + e1 * e2 + e1 * e3 + e2 * e3
        + e1 * e2 * e3
    )


# ---------------------------------------------------------------------------
# upper incomplete gamma
# ---------------------------------------------------------------------------

def _upper_gamma_cf(a: float, x: np.ndarray, max_iter: int = 2000) -> np.ndarray:
    # Legendre continued fraction, modified Lentz iteration.  Converges for
    # every x > 0; used here for a <= 0 where library routines stop.
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / np.where(b != 0.0, b, tiny)
    h = d.copy()
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = 1.0 / np.where(d != 0.0, d, tiny)
        c = b + an / c
        c = np.where(c != 0.0, c, tiny)
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < 1e-15):
            break
    else:
        raise RuntimeError(
            f"incomplete gamma continued fraction stalled at a={a}"
        )
    return np.exp(-x + a * np.log(x)) * h


def _log_gamma1p(a: float) -> float:
    # log Gamma(1+a) for |a| <= 1/2 with full relative accuracy, from
    # log Gamma(1+a) = -euler_gamma*a + sum_{k>=2} (-1)^k zeta(k) a^k / k.
    # Library lgamma is only absolutely accurate near its zero at a = 0.
    total = -np.euler_gamma * a
    ak = a
    sign = 1.0
    for k in range(2, 80):
        ak *= a
        term = sign * _ZETA_K[k] * ak / k
        total += term
        if abs(term) <= 1e-18 * max(abs(total), 1e-30):
            break
        sign = -sign
    return total


_ZETA_K = [0.0, 0.0] + [float(sc.zeta(k)) for k in range(2, 80)]


def _upper_gamma_series_near_zero(a: float, x: np.ndarray) -> np.ndarray:
    # Gamma(a, x) = Gamma(a) - x^a sum_n (-x)^n / (n! (a+n)) rearranged so the
    # 1/a pole cancels analytically; stable for |a| < 1/2 and x < 1 where the
    # downward recurrence would divide a cancellation by a.
    lx = np.log(x)
    # Gamma(a) - 1/a  and  (1 - x^a)/a, both finite as a -> 0
    gma = np.expm1(_log_gamma1p(a)) / a if a != 0.0 else -np.euler_gamma
    pole_pair = gma - np.expm1(a * lx) / a if a != 0.0 else gma - lx
    xa = np.exp(a * lx)
    tail = np.zeros_like(x)
    term = np.ones_like(x)
    n = 0
    while True:
        n += 1
        term = term * (-x) / n
        contrib = term / (a + n)
        tail += contrib
        if np.all(np.abs(contrib) <= 1e-18 * (np.abs(tail) + 1e-30)):
            break
    return pole_pair - xa * tail


def _upper_gamma_ladder(a: float, x: np.ndarray) -> np.ndarray:
    # Gamma(a, x) for a <= 0 and small x via the downward recurrence
    #   Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a
    # seeded at Gamma(0, x) = E1(x) for integer a, otherwise at the offset
    # a0 = a + round(-a) in [-1/2, 1/2] where the rearranged series is
    # stable.  Every divisor along the ladder then has |aa| >= 1/2.
    if a == math.floor(a):
        base = 0.0
        val = sc.exp1(x)
    else:
        k = int(round(-a))
        base = a + k
        val = _upper_gamma_series_near_zero(base, x)
    aa = base
    emx = np.exp(-x)
    while aa > a + 1e-12:
        aa -= 1.0
        val = (val - x ** aa * emx) / aa
    return val


def upper_incomplete_gamma(a: float, x):
    """Upper incomplete gamma Gamma(a, x) for real a and x > 0.

    Accepts a scalar or array x (a stays scalar; lattice sums evaluate many
    x at one order).  For a > 0 the library regularized routine is used; for
    a <= 0 a continued fraction covers x >= 1 and the downward recurrence
    from a positive base order covers 0 < x < 1.
    """
    a = float(a)
    arr = np.asarray(x, dtype=float)
    if arr.size and not np.all(arr > 0.0):
        raise ValueError("upper_incomplete_gamma requires x > 0")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if a > 0.0:
        out = sc.gammaincc(a, arr) * sc.gamma(a)
    else:
        out = np.empty_like(arr)
        hi = arr >= 1.0
        if np.any(hi):
            out[hi] = _upper_gamma_cf(a, arr[hi])
        if np.any(~hi):
            out[~hi] = _upper_gamma_ladder(a, arr[~hi])
    return float(out[0]) if scalar else out
