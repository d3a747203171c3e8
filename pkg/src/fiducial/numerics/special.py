"""Special functions: normal, gamma and von Mises.

The public functions accept scalars or numpy arrays and return a float or an
array of the broadcast shape. Scalar kernels are compiled with numba because
the fiducial solvers call the gamma quantile millions of times.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..errors import DomainError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_EPS = 2.220446049250313e-16
_TINY = 1e-300


def _is_scalar(*args):
    return all(np.ndim(a) == 0 for a in args)


def _broadcast(*args):
    arrays = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in args))
    shape = arrays[0].shape
    return shape, [np.ascontiguousarray(a).ravel() for a in arrays]


def _finish(values, shape, scalar):
    if scalar:
        return float(values[0])
    return values.reshape(shape)


# --- normal -----------------------------------------------------------------


@njit(cache=True, error_model="numpy")
def _norm_cdf(z):
    return 0.5 * math.erfc(-z / 1.4142135623730951)


@njit(cache=True, error_model="numpy")
def _norm_cdf_array(z):
    out = np.empty_like(z)
    for i in range(z.size):
        out[i] = _norm_cdf(z[i])
    return out


def std_normal_pdf(z):
    scalar = _is_scalar(z)
    z = np.asarray(z, dtype=float)
    value = np.exp(-0.5 * z * z - _LOG_SQRT_2PI)
    return float(value) if scalar else value


def std_normal_cdf(z):
    """Standard normal CDF through ``erfc``; saturates to 0/1 in the tails."""
    scalar = _is_scalar(z)
    shape, (z,) = _broadcast(z)
    return _finish(_norm_cdf_array(z), shape, scalar)


# Acklam's rational approximation (relative error 1.15e-9) plus one Halley step
_A = np.array([-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
               1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00])
_B = np.array([-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
               6.680131188771972e01, -1.328068155288572e01])
_C = np.array([-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
               -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00])
_D = np.array([7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
               3.754408661907416e00])


@njit(cache=True, error_model="numpy")
def _norm_ppf(p):
    A, B, C, D = _A, _B, _C, _D
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / \
            ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    elif p > 1.0 - 0.02425:
        q = math.sqrt(-2.0 * math.log1p(-p))
        x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / \
            ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q / \
            (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    # refine against the smaller tail probability
    if p > 0.5:
        e = -(0.5 * math.erfc(x / 1.4142135623730951) - (1.0 - p))
    else:
        e = 0.5 * math.erfc(-x / 1.4142135623730951) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@njit(cache=True, error_model="numpy")
def _norm_ppf_array(p):
    out = np.empty_like(p)
    for i in range(p.size):
        out[i] = _norm_ppf(p[i])
    return out


def std_normal_ppf(p):
    """Inverse of :func:`std_normal_cdf` on the open unit interval."""
    scalar = _is_scalar(p)
    shape, (p,) = _broadcast(p)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("normal quantile requires 0 < p < 1")
    return _finish(_norm_ppf_array(p), shape, scalar)


# --- gamma ------------------------------------------------------------------


@njit(cache=True, error_model="numpy")
def _series_sum(a, x):
    """sum_k x^k / (a (a+1) ... (a+k)); converges for all x, fast for x < a+1."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(1000000):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS * 0.5:
            break
    return total


@njit(cache=True, error_model="numpy")
def _contfrac(a, x):
    """Lentz evaluation of the continued fraction for Q(a, x) / prefactor."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = b if abs(b) > _TINY else _TINY
    d = 1.0 / d
    h = d
    for i in range(1, 100000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            break
    return h


# Above this shape the series and continued fraction need O(sqrt(a)) terms;
# the density is integrated over a window around x instead.
LARGE_SHAPE = 200.0
_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@njit(cache=True, error_model="numpy")
def _log1pmx(r):
    """log(1 + r) - r without cancellation for small r."""
    if abs(r) > 0.25:
        return math.log1p(r) - r
    total = 0.0
    power = -r
    for k in range(2, 200):
        power *= -r
        term = power / k
        total -= term
        if abs(term) <= abs(total) * _EPS * 0.25:
            break
    return total


@njit(cache=True, error_model="numpy")
def _log_norm_large(a1):
    # -log(Gamma(a1 + 1)) + a1 log(a1) - a1 by the Stirling series
    inv = 1.0 / a1
    inv2 = inv * inv
    stirling = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
    return -0.5 * math.log(2.0 * math.pi * a1) - stirling


@njit(cache=True, error_model="numpy")
def _gamma_log_pq_large(a, x):
    """(log P, log Q) for large ``a`` by Gauss-Legendre over the tail beyond ``x``.

    The density is ``exp(a1 log1pmx((t - a1) / a1)) / sqrt(2 pi a1) / exp(s(a1))``
    with ``a1 = a - 1`` and ``s`` the Stirling correction, so nothing of size
    ``a`` cancels. The window is cut where the log density has fallen by 40.
    """
    a1 = a - 1.0
    root = math.sqrt(a1)
    inv = 1.0 / a1
    log_norm = _log_norm_large(a1)
    slope = abs(x - a1) * inv
    upper = x > a1
    if upper:
        width = max(a1 + 11.5 * root - x, 6.0 * root)
    else:
        width = max(x - (a1 - 7.5 * root), 5.0 * root)
    if slope > 0.0:
        width = min(width, 40.0 / slope)
    if not upper:
        width = min(width, x)
    total = 0.0
    for j in range(_GL_X.size):
        t = x + width * _GL_X[j] if upper else x - width * _GL_X[j]
        total += _GL_W[j] * math.exp(a1 * _log1pmx((t - a1) * inv))
    log_tail = math.log(total * width) + log_norm if total > 0.0 else -math.inf
    tail = math.exp(log_tail)
    rest = math.log1p(-tail) if tail < 1.0 else -math.inf
    if upper:
        return rest, log_tail
    return log_tail, rest


@njit(cache=True, error_model="numpy")
def _log_prefactor(a, y, x):
    # log(x^a e^-x / Gamma(a)) with x = exp(y)
    if a > LARGE_SHAPE:
        a1 = a - 1.0
        return y + a1 * _log1pmx((x - a1) / a1) + _log_norm_large(a1)
    return a * y - x - math.lgamma(a)


@njit(cache=True, error_model="numpy")
def _gamma_log_pq(a, y):
    """(log P, log Q, log prefactor) at x = exp(y); fine when x underflows."""
    x = math.exp(y)
    lpre = _log_prefactor(a, y, x)
    if a > LARGE_SHAPE:
        lp, lq = _gamma_log_pq_large(a, x)
        return lp, lq, lpre
    if x < a + 1.0:
        lp = lpre + math.log(_series_sum(a, x))
        p = math.exp(lp)
        lq = math.log1p(-p) if p < 1.0 else -math.inf
    else:
        h = _contfrac(a, x)
        lq = lpre + math.log(h)
        lp = math.log1p(-math.exp(lq))
    return lp, lq, lpre


@njit(cache=True, error_model="numpy")
def _gamma_p(a, x):
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if a > LARGE_SHAPE:
        return math.exp(_gamma_log_pq_large(a, x)[0])
    lpre = _log_prefactor(a, math.log(x), x)
    if x < a + 1.0:
        return math.exp(lpre) * _series_sum(a, x)
    return 1.0 - math.exp(lpre) * _contfrac(a, x)


@njit(cache=True, error_model="numpy")
def _gamma_q(a, x):
    if x <= 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if a > LARGE_SHAPE:
        return math.exp(_gamma_log_pq_large(a, x)[1])
    lpre = _log_prefactor(a, math.log(x), x)
    if x < a + 1.0:
        return 1.0 - math.exp(lpre) * _series_sum(a, x)
    return math.exp(lpre) * _contfrac(a, x)


@njit(cache=True, error_model="numpy")
def _gamma_pq_array(a, x, lower):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = _gamma_p(a[i], x[i]) if lower else _gamma_q(a[i], x[i])
    return out


@njit(cache=True, error_model="numpy")
def _gamma_p_by(a, x, method):
    # method 0: series only, 1: continued fraction only
    out = np.empty_like(x)
    for i in range(x.size):
        if x[i] <= 0.0:
            out[i] = 0.0
            continue
        lpre = _log_prefactor(a[i], math.log(x[i]), x[i])
        if method == 0:
            out[i] = math.exp(lpre) * _series_sum(a[i], x[i])
        else:
            out[i] = 1.0 - math.exp(lpre) * _contfrac(a[i], x[i])
    return out


@njit(cache=True, error_model="numpy")
def gamma_log_quantile(p, a, tol):
    """log of the gamma(a) quantile at p; Newton on log P (or log Q) in log x."""
    upper = p > 0.5
    log_target = math.log1p(-p) if upper else math.log(p)

    if a > 1.0:
        tail = min(p, 1.0 - p)
        t = math.sqrt(-2.0 * math.log(tail))
        z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        if upper:
            z = -z
        base = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * math.sqrt(a))
        y = math.log(a) + 3.0 * math.log(max(base, 1e-3))
    else:
        t = 1.0 - a * (0.253 + a * 0.12)
        if p < t:
            y = (math.log(p) - math.log(t)) / a
        else:
            y = math.log(1.0 - math.log1p(-(p - t) / (1.0 - t)))

    lo = -math.inf
    hi = math.inf
    for _ in range(300):
        lp, lq, lpre = _gamma_log_pq(a, y)
        if upper:
            err = log_target - lq
            slope = math.exp(lpre - lq)
        else:
            err = lp - log_target
            slope = math.exp(lpre - lp)
        if err == 0.0:
            return y
        if err > 0.0:
            hi = min(hi, y)
        else:
            lo = max(lo, y)
        y_new = y - err / slope
        # a step below one ulp lands on the bracket end; accept it before the guard
        if math.isfinite(y_new) and abs(y_new - y) <= tol:
            return y_new
        if not (math.isfinite(y_new) and lo < y_new < hi):
            w = max(1.0, abs(y))
            if math.isinf(hi):
                y_new = y + w
            elif math.isinf(lo):
                y_new = y - w
            else:
                y_new = 0.5 * (lo + hi)
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        y = y_new
    return y


@njit(cache=True, error_model="numpy")
def _gamma_log_inv_array(p, a, tol):
    out = np.empty_like(p)
    for i in range(p.size):
        out[i] = gamma_log_quantile(p[i], a[i], tol)
    return out


def _check_gamma_args(x, shape):
    if np.any(~(np.asarray(shape) > 0)):
        raise DomainError("gamma shape must be positive")
    if np.any(~(np.asarray(x) >= 0)):
        raise DomainError("gamma argument must be nonnegative")


def gamma_cdf(x, shape):
    """Regularized lower incomplete gamma ``P(shape, x)`` (unit scale).

    Power series for ``x < shape + 1``, continued fraction otherwise.
    """
    _check_gamma_args(x, shape)
    scalar = _is_scalar(x, shape)
    out_shape, (x, a) = _broadcast(x, shape)
    return _finish(_gamma_pq_array(a, x, True), out_shape, scalar)


def gamma_sf(x, shape):
    """Regularized upper incomplete gamma ``Q(shape, x)``."""
    _check_gamma_args(x, shape)
    scalar = _is_scalar(x, shape)
    out_shape, (x, a) = _broadcast(x, shape)
    return _finish(_gamma_pq_array(a, x, False), out_shape, scalar)


def gamma_cdf_series(x, shape):
    """``P(shape, x)`` from the power series alone (cross-check route)."""
    _check_gamma_args(x, shape)
    scalar = _is_scalar(x, shape)
    out_shape, (x, a) = _broadcast(x, shape)
    return _finish(_gamma_p_by(a, x, 0), out_shape, scalar)


def gamma_cdf_contfrac(x, shape):
    """``P(shape, x)`` from the continued fraction alone (cross-check route)."""
    _check_gamma_args(x, shape)
    scalar = _is_scalar(x, shape)
    out_shape, (x, a) = _broadcast(x, shape)
    return _finish(_gamma_p_by(a, x, 1), out_shape, scalar)


def gamma_pdf(x, shape):
    _check_gamma_args(x, shape)
    scalar = _is_scalar(x, shape)
    out_shape, (x, a) = _broadcast(x, shape)
    lg = np.array([math.lgamma(v) for v in a])
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.exp((a - 1) * np.log(x) - x - lg)
    value = np.where(x > 0, value, np.where(a < 1, np.inf, np.where(a == 1, 1.0, 0.0)))
    return _finish(value, out_shape, scalar)


def gamma_log_inv_cdf(u, shape, tol=1e-14):
    """Natural log of the unit-scale gamma quantile.

    Newton iteration on ``log P(shape, exp(y)) = log u`` (``log Q`` in the
    upper half), safeguarded by a shrinking bracket. Solving for ``y = log x``
    keeps quantiles of tiny probabilities at small shapes representable; as
    plain ``x`` they underflow. ``tol`` is absolute in ``y``, i.e. relative in
    ``x``.
    """
    scalar = _is_scalar(u, shape)
    out_shape, (p, a) = _broadcast(u, shape)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("gamma quantile requires 0 < u < 1")
    if np.any(~(a > 0)):
        raise DomainError("gamma shape must be positive")
    return _finish(_gamma_log_inv_array(p, a, tol), out_shape, scalar)


def gamma_inv_cdf(u, shape, tol=1e-14):
    """Quantile of the unit-scale gamma distribution (relative tolerance ``tol``)."""
    y = gamma_log_inv_cdf(u, shape, tol=tol)
    return float(np.exp(y)) if np.ndim(y) == 0 else np.exp(y)


# --- von Mises --------------------------------------------------------------


def bessel_i0e(x):
    """Exponentially scaled modified Bessel function ``exp(-|x|) I0(x)``.

    Power series below 15, Hankel asymptotic expansion above.
    """
    scalar = _is_scalar(x)
    out_shape, (x,) = _broadcast(x)
    x = np.abs(x)
    out = np.empty_like(x)
    small = x < 15.0
    if small.any():
        xs = x[small]
        q = 0.25 * xs * xs
        term = np.ones_like(xs)
        total = np.ones_like(xs)
        for k in range(1, 200):
            term = term * q / (k * k)
            total = total + term
            if np.all(term < total * _EPS * 0.25):
                break
        out[small] = total * np.exp(-xs)
    if (~small).any():
        xl = x[~small]
        term = np.ones_like(xl)
        total = np.ones_like(xl)
        for k in range(1, 30):
            term = term * (2 * k - 1) ** 2 / (k * 8.0 * xl)
            total = total + term
        out[~small] = total / np.sqrt(2 * np.pi * xl)
    return _finish(out, out_shape, scalar)


def von_mises_density(angle, mean_dir, kappa):
    """Density of the von Mises law on the circle (angles in radians)."""
    if np.any(np.asarray(kappa) < 0):
        raise DomainError("kappa must be nonnegative")
    scalar = _is_scalar(angle, mean_dir, kappa)
    angle = np.asarray(angle, float)
    kappa_arr = np.asarray(kappa, float)
    value = np.exp(kappa_arr * (np.cos(angle - mean_dir) - 1.0)) / (2 * np.pi * bessel_i0e(kappa_arr))
    return float(value) if scalar else value
