"""Bracketed root finding for monotone functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import DomainError, NoConvergence, NoSignChange

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got ({self.lo}, {self.hi})")


def solve_monotone(f, bracket, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Root of ``f`` inside ``bracket``.

    Brent's method: bisection with inverse quadratic / secant acceleration.
    The returned root is within ``tol`` of the true root whenever ``f`` is
    continuous and changes sign exactly once inside the bracket.

    Parameters
    ----------
    f : callable
        Scalar function; only its sign change matters.
    bracket : Bracket or tuple
        ``(lo, hi)`` with ``f(lo)`` and ``f(hi)`` of opposite sign.
    tol : float
        Absolute tolerance on the root location.

    Raises
    ------
    NoSignChange
        If ``f`` has the same sign at both ends.
    NoConvergence
        After ``max_iter`` iterations; ``best`` holds the last iterate.
    """
    if not isinstance(bracket, Bracket):
        bracket = Bracket(*bracket)
    a, b = float(bracket.lo), float(bracket.hi)
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"f({a})={fa} and f({b})={fb} have the same sign")

    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if np.sign(fb) == np.sign(fc):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2 * np.finfo(float).eps * abs(b) + 0.5 * tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2 * xm * s
                q = 1 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2 * xm * q * (q - r) - (b - a) * (r - 1))
                q = (q - 1) * (r - 1) * (s - 1)
            if p > 0:
                q = -q
            p = abs(p)
            if 2 * p < min(3 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b += d if abs(d) > tol1 else np.copysign(tol1, xm)
        fb = f(b)
    raise NoConvergence(f"no convergence after {max_iter} iterations", best=b)


# Reverse-communication Brent: the caller owns the function evaluations, so
# compiled solvers can drive it without passing a jitted function around
# (which would defeat numba's on-disk cache).
# state = [a, b, c, fa, fb, fc, d, e]; b is the current best iterate.


@njit(cache=True, error_model="numpy")
def brent_start(a, fa, b, fb):
    """Initial Brent state for a bracket ``[a, b]`` with ``fa * fb < 0``."""
    return np.array([a, b, a, fa, fb, fa, b - a, b - a])


@njit(cache=True, error_model="numpy")
def brent_step(state, tol):
    """Advance one Brent iteration.

    Returns ``(x, done)``. When ``done`` is false the caller must evaluate
    ``f(x)``, store it in ``state[4]`` and call again; when true ``x`` is the
    root to within ``tol``.
    """
    a, b, c, fa, fb, fc, d, e = state
    if (fb > 0.0) == (fc > 0.0):
        c, fc = a, fa
        d = e = b - a
    if abs(fc) < abs(fb):
        a, b, c = b, c, b
        fa, fb, fc = fb, fc, fb
    tol1 = 2.0 * 2.220446049250313e-16 * abs(b) + 0.5 * tol
    xm = 0.5 * (c - b)
    if abs(xm) <= tol1 or fb == 0.0:
        state[:] = (a, b, c, fa, fb, fc, d, e)
        return b, True
    if abs(e) >= tol1 and abs(fa) > abs(fb):
        s = fb / fa
        if a == c:
            p = 2.0 * xm * s
            q = 1.0 - s
        else:
            q = fa / fc
            r = fb / fc
            p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
            q = (q - 1.0) * (r - 1.0) * (s - 1.0)
        if p > 0.0:
            q = -q
        p = abs(p)
        if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
            e = d
            d = p / q
        else:
            d = xm
            e = d
    else:
        d = xm
        e = d
    a, fa = b, fb
    if abs(d) > tol1:
        b += d
    else:
        b += tol1 if xm > 0 else -tol1
    state[:] = (a, b, c, fa, fb, fc, d, e)
    return b, False


@njit(error_model="numpy")
def brent_kernel(f, args, a, b, tol, max_iter):
    """Compiled twin of :func:`solve_monotone` driving :func:`brent_step`.

    ``f(x, args)`` must itself be an ``njit`` function. Returns
    ``(root, status)`` with status 0 on success, 1 for no sign change and 2
    for exhausted iterations (root is then the last iterate).
    """
    fa = f(a, args)
    fb = f(b, args)
    if fa == 0.0:
        return a, 0
    if fb == 0.0:
        return b, 0
    if (fa > 0.0) == (fb > 0.0):
        return math.nan, 1
    state = brent_start(a, fa, b, fb)
    for _ in range(max_iter):
        x, done = brent_step(state, tol)
        if done:
            return x, 0
        state[4] = f(x, args)
    return state[1], 2
