"""
Special-function kernel: error function family, Gaussian CDF/SF and quantiles.

erf and erfc use the piecewise rational approximations of the FreeBSD libm
(lib/msun/src/s_erf.c, Copyright (C) 1993 by Sun Microsystems, Inc.; "Permission
to use, copy, modify, and distribute this software is freely granted, provided
that this notice is preserved."). The inverses start from Acklam's rational
normal-quantile approximation (relative error 1.15e-9) and are polished with two
Newton steps.

Every kernel accepts a float or a numpy array; floats in, float out.
"""
from __future__ import annotations

import math
from typing import Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from app.errors import DomainError

ArrayOrFloat = Union[float, np.ndarray]

SQRT2 = math.sqrt(2.0)
TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

erx = 8.45062911510467529297e-01
# erf(x) = x + efx * x for |x| < 2**-28
efx = 1.28379167095512586316e-01

# erf on [0, 0.84375]
pp = Polynomial([
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
])
qq = Polynomial([
    1.0,
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
])

# erf on [0.84375, 1.25]
pa = Polynomial([
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
])
qa = Polynomial([
    1.0,
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
])

# erfc on [1.25, 1/0.35]
ra = Polynomial([
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e01,
    -6.23753324503260060396e01,
    -1.62396669462573470355e02,
    -1.84605092906711035994e02,
    -8.12874355063065934246e01,
    -9.81432934416914548592e00,
])
sa = Polynomial([
    1.0,
    1.96512716674392571292e01,
    1.37657754143519042600e02,
    4.34565877475229228821e02,
    6.45387271733267880336e02,
    4.29008140027567833386e02,
    1.08635005541779435134e02,
    6.57024977031928170135e00,
    -6.04244152148580987438e-02,
])

# erfc on [1/0.35, 28]
rb = Polynomial([
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e01,
    -1.60636384855821916062e02,
    -6.37566443368389627722e02,
    -1.02509513161107724954e03,
    -4.83519191608651397019e02,
])
sb = Polynomial([
    1.0,
    3.03380607434824582924e01,
    3.25792512996573918826e02,
    1.53672958608443695994e03,
    3.19985821950859553908e03,
    2.55305040643316442583e03,
    4.74528541206955367215e02,
    -2.24409524465858183362e01,
])

# Acklam's normal quantile, central and tail rational pieces (ascending powers)
_q_central_num = Polynomial([
    2.506628277459239,
    -3.066479806614716e1,
    1.383577518672690e2,
    -2.759285104469687e2,
    2.209460984245205e2,
    -3.969683028665376e1,
])
_q_central_den = Polynomial([
    1.0,
    -1.328068155288572e1,
    6.680131188771972e1,
    -1.556989798598866e2,
    1.615858368580409e2,
    -5.447609879822406e1,
])
_q_tail_num = Polynomial([
    2.938163982698783,
    4.374664141464968,
    -2.549732539343734,
    -2.400758277161838,
    -3.223964580411365e-1,
    -7.784894002430293e-3,
])
_q_tail_den = Polynomial([
    1.0,
    3.754408661907416,
    2.445134137142996,
    3.224671290700398e-1,
    7.784695709041462e-3,
])
_Q_LOW = 0.02425

NEWTON_STEPS = 2


def _as_array(x: ArrayOrFloat, name: str) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite", {name: "non-finite value"})
    return arr, arr.ndim == 0


def _finish(out: np.ndarray, scalar: bool) -> ArrayOrFloat:
    return float(out) if scalar else out


def _clear_low_word(a: np.ndarray) -> np.ndarray:
    # SET_LOW_WORD(z, 0): keep the high 32 bits so z*z is exact
    bits = np.ascontiguousarray(a, dtype=np.float64).view(np.uint64)
    return (bits & np.uint64(0xFFFFFFFF00000000)).view(np.float64)


def _erf_small(a: np.ndarray) -> np.ndarray:
    """erf on 0 <= a < 0.84375"""
    z = a * a
    return np.where(a < 2.0**-28, a + efx * a, a + a * (pp(z) / qq(z)))


def _erfc_tail(a: np.ndarray) -> np.ndarray:
    """erfc on 1.25 <= a < 28"""
    s = 1.0 / (a * a)
    r = np.where(a < 1.0 / 0.35, ra(s) / sa(s), rb(s) / sb(s))
    z = _clear_low_word(a)
    return np.exp(-z * z - 0.5625) * np.exp((z - a) * (z + a) + r) / a


def _erf_abs(a: np.ndarray) -> np.ndarray:
    out = np.ones_like(a)
    small = a < 0.84375
    out[small] = _erf_small(a[small])
    mid = (a >= 0.84375) & (a < 1.25)
    s = a[mid] - 1.0
    out[mid] = erx + pa(s) / qa(s)
    tail = (a >= 1.25) & (a < 6.0)
    out[tail] = 1.0 - _erfc_tail(a[tail])
    return out


def _erfc_abs(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    small = a < 0.84375
    out[small] = 1.0 - _erf_small(a[small])
    mid = (a >= 0.84375) & (a < 1.25)
    s = a[mid] - 1.0
    out[mid] = 1.0 - erx - pa(s) / qa(s)
    tail = (a >= 1.25) & (a < 28.0)
    out[tail] = _erfc_tail(a[tail])
    return out


def erf(x: ArrayOrFloat) -> ArrayOrFloat:
    """Error function, absolute error below 1e-14 on the whole real line."""
    arr, scalar = _as_array(x, "x")
    flat = arr.ravel()
    out = np.copysign(_erf_abs(np.abs(flat)), flat)
    return _finish(out.reshape(arr.shape), scalar)


def erfc(x: ArrayOrFloat) -> ArrayOrFloat:
    """Complementary error function, relative accuracy kept in the upper tail."""
    arr, scalar = _as_array(x, "x")
    flat = arr.ravel()
    pos = _erfc_abs(np.abs(flat))
    out = np.where(flat < 0.0, 2.0 - pos, pos)
    return _finish(out.reshape(arr.shape), scalar)


def _quantile_guess(p: np.ndarray) -> np.ndarray:
    """Acklam's rational approximation of the normal quantile for p in (0, 0.5]."""
    out = np.empty_like(p)
    tail = p < _Q_LOW
    t = np.sqrt(-2.0 * np.log(p[tail]))
    out[tail] = _q_tail_num(t) / _q_tail_den(t)
    q = p[~tail] - 0.5
    r = q * q
    out[~tail] = q * _q_central_num(r) / _q_central_den(r)
    return out


def _erfc_inv_upper(w: np.ndarray) -> np.ndarray:
    """erfc^-1 for w in (0, 1], result >= 0"""
    x = -_quantile_guess(0.5 * w) / SQRT2
    for _ in range(NEWTON_STEPS):
        x = x + (_erfc_abs(x) - w) / (TWO_OVER_SQRT_PI * np.exp(-x * x))
    return np.maximum(x, 0.0)


def erf_inv(y: ArrayOrFloat) -> ArrayOrFloat:
    """Inverse error function on (-1, 1)."""
    arr, scalar = _as_array(y, "y")
    if np.any(np.abs(arr) >= 1.0):
        raise DomainError("erf_inv requires -1 < y < 1", {"y": "outside (-1, 1)"})
    flat = arr.ravel()
    a = np.abs(flat)
    x = -_quantile_guess(0.5 * (1.0 - a)) / SQRT2
    for _ in range(NEWTON_STEPS):
        x = x - (_erf_abs(x) - a) / (TWO_OVER_SQRT_PI * np.exp(-x * x))
    out = np.copysign(np.maximum(x, 0.0), flat)
    return _finish(out.reshape(arr.shape), scalar)


def erfc_inv(y: ArrayOrFloat) -> ArrayOrFloat:
    """Inverse complementary error function on (0, 2)."""
    arr, scalar = _as_array(y, "y")
    if np.any((arr <= 0.0) | (arr >= 2.0)):
        raise DomainError("erfc_inv requires 0 < y < 2", {"y": "outside (0, 2)"})
    flat = arr.ravel()
    upper = flat > 1.0
    w = np.where(upper, 2.0 - flat, flat)
    x = _erfc_inv_upper(w)
    out = np.where(upper, -x, x)
    return _finish(out.reshape(arr.shape), scalar)


def _check_sd(sd: float) -> None:
    if not sd > 0.0 or not math.isfinite(sd):
        raise DomainError("Standard deviation must be positive", {"sd": f"got {sd}"})


def gaussian_cdf(x: ArrayOrFloat, mean: float = 0.0, sd: float = 1.0) -> ArrayOrFloat:
    """P(X <= x) for X ~ N(mean, sd^2)"""
    _check_sd(sd)
    arr, scalar = _as_array(x, "x")
    z = (arr - mean) / (sd * SQRT2)
    return _finish(0.5 * np.asarray(erfc(-z)), scalar)


def gaussian_sf(x: ArrayOrFloat, mean: float = 0.0, sd: float = 1.0) -> ArrayOrFloat:
    """P(X > x) for X ~ N(mean, sd^2), computed without 1 - cdf cancellation"""
    _check_sd(sd)
    arr, scalar = _as_array(x, "x")
    z = (arr - mean) / (sd * SQRT2)
    return _finish(0.5 * np.asarray(erfc(z)), scalar)


def normal_quantile(p: ArrayOrFloat) -> ArrayOrFloat:
    """Standard normal quantile for p in (0, 1)."""
    arr, scalar = _as_array(p, "p")
    if np.any((arr <= 0.0) | (arr >= 1.0)):
        raise DomainError("normal_quantile requires 0 < p < 1", {"p": "outside (0, 1)"})
    out = -SQRT2 * np.asarray(erfc_inv(2.0 * arr))
    return _finish(out, scalar)


def z_two_sided(epsilon: float) -> float:
    """
    Two-sided normal quantile Z with 1 - erf(Z / sqrt(2)) = epsilon.

    Equal to sqrt(2) * erf_inv(1 - epsilon); evaluated through erfc_inv so that
    epsilon down to 1e-300 keeps full precision.
    """
    if not (0.0 < epsilon <= 1.0):
        raise DomainError(
            "Confidence epsilon must be in (0, 1]",
            {"epsilon": f"got {epsilon}"},
        )
    if epsilon == 1.0:
        return 0.0
    return SQRT2 * float(erfc_inv(epsilon))
