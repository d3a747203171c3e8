"""Adaptive Simpson quadrature, with variable changes for infinite ranges."""

from __future__ import annotations

import math

from ..errors import NoConvergence

_MAX_DEPTH = 60


def _transform(f, lo, hi):
    """Map an (semi-)infinite range onto a finite one.

    ``[a, inf)``  uses ``x = a + t / (1 - t)`` on ``[0, 1)``;
    ``(-inf, b]`` uses ``x = b - t / (1 - t)``;
    ``(-inf, inf)`` uses ``x = t / (1 - t**2)`` on ``(-1, 1)``.
    Rational maps are used because they also tame integrands with only
    exponential decay.
    """
    lo_inf, hi_inf = math.isinf(lo), math.isinf(hi)
    if not lo_inf and not hi_inf:
        return f, lo, hi
    if lo_inf and hi_inf:
        def g(t):
            if abs(t) >= 1:
                return 0.0
            s = 1 - t * t
            return f(t / s) * (1 + t * t) / (s * s)
        return g, -1.0, 1.0
    if hi_inf:
        def g(t):
            if t >= 1:
                return 0.0
            s = 1 - t
            return f(lo + t / s) / (s * s)
        return g, 0.0, 1.0

    def g(t):
        if t >= 1:
            return 0.0
        s = 1 - t
        return f(hi - t / s) / (s * s)
    return g, 0.0, 1.0


def quadrature(f, lo, hi, tol=1e-10, min_depth=4, abs_tol=0.0):
    """Integral of ``f`` over ``[lo, hi]``.

    ``tol`` is a relative tolerance on the estimate (absolute when the
    integral is near zero); ``abs_tol`` sets a floor on the absolute error
    target. ``min_depth`` forces a minimum number of
    subdivisions so that narrow peaks are not skipped by the first coarse
    Simpson estimate.
    """
    if lo == hi:
        return 0.0
    if lo > hi:
        return -quadrature(f, hi, lo, tol, min_depth, abs_tol)
    g, a, b = _transform(f, float(lo), float(hi))

    def val(t):
        y = g(t)
        return y if math.isfinite(y) else 0.0

    fa, fm, fb = val(a), val(0.5 * (a + b)), val(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    # coarse pass fixes the scale for the relative tolerance
    scale_pts = [val(a + (b - a) * k / 64) for k in range(65)]
    scale = (b - a) * sum(abs(y) for y in scale_pts) / 65
    target = max(tol * scale, abs_tol, 1e-300)
    # per-interval targets stop halving here, so integrand noise (finite
    # differences, say) cannot force subdivision down to the depth limit
    floor = target * 2.0**-20

    failures = []

    def rec(a, b, fa, fm, fb, whole, eps, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = val(lm), val(rm)
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        delta = left + right - whole
        if depth >= min_depth and abs(delta) <= 15 * eps:
            return left + right + delta / 15
        if depth >= _MAX_DEPTH:
            failures.append((a, b))
            return left + right + delta / 15
        half = max(0.5 * eps, floor)
        return (rec(a, m, fa, flm, fm, left, half, depth + 1)
                + rec(m, b, fm, frm, fb, right, half, depth + 1))

    result = rec(a, b, fa, fm, fb, whole, target, 0)
    if failures:
        raise NoConvergence(f"quadrature did not converge on {len(failures)} subintervals", best=result)
    return result


def integrate_peaked(f, center, width, lo=-math.inf, hi=math.inf, tol=1e-10, tail_tol=1e-10):
    """Integral of a nonnegative unimodal-ish ``f`` over ``[lo, hi]``.

    Integrates outward from ``center`` in chunks of doubling width until a new
    chunk adds less than ``tail_tol`` of the running total, then stops. Keeps
    narrow peaks visible regardless of the overall range.

    Raises
    ------
    NoConvergence
        If an infinite end is reached without the chunks becoming negligible.
    """
    center = min(max(center, lo), hi)
    total = 0.0
    for direction in (1, -1):
        edge = hi if direction == 1 else lo
        start, w = center, width
        while start != edge:
            end = start + direction * w
            end = min(end, hi) if direction == 1 else max(end, lo)
            a, b = (start, end) if direction == 1 else (end, start)
            chunk = quadrature(f, a, b, tol, abs_tol=tol * abs(total))
            total += chunk
            if abs(chunk) <= tail_tol * abs(total) and total != 0:
                break
            start, w = end, 2 * w
            if w > 1e300:
                raise NoConvergence("tail mass does not vanish; integral may diverge", best=total)
    return total
