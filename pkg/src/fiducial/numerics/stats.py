"""Empirical distribution utilities."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, EmptySample


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov--Smirnov statistic.

    The supremum of ``|F_a - F_b|`` is attained at sample points, so both
    empirical CDFs are evaluated on the pooled sample. Inputs need not be
    sorted; they are sorted internally.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySample("ks_distance needs two nonempty samples")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_distance_to_cdf(sample, cdf) -> float:
    """One-sample KS statistic against a vectorised CDF."""
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    if x.size == 0:
        raise EmptySample("empty sample")
    F = np.asarray(cdf(x), dtype=float)
    n = x.size
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def ks_critical_value(level: float, m: int, n: int | None = None) -> float:
    """Asymptotic KS critical value ``c(level) * sqrt((m + n) / (m n))``.

    With ``n`` omitted the two samples are taken to be of equal size ``m``.
    """
    n = m if n is None else n
    c = math.sqrt(-0.5 * math.log(level / 2))
    return c * math.sqrt((m + n) / (m * n))


def dkw_bound(n: int, level: float = 0.01) -> float:
    """Dvoretzky--Kiefer--Wolfowitz band half-width for ``n`` draws."""
    return math.sqrt(math.log(2 / level) / (2 * n))


def percentile(draws, p):
    """Order-statistic percentile with linear interpolation (type 7).

    ``p`` may be a scalar or an array of probabilities in (0, 1).
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size == 0:
        raise EmptySample("percentile of an empty sample")
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0) & (p_arr < 1))):
        raise DomainError("percentile level must lie in (0, 1)")
    x = np.sort(x)
    h = (x.size - 1) * p_arr
    i = np.floor(h).astype(int)
    j = np.minimum(i + 1, x.size - 1)
    value = x[i] + (h - i) * (x[j] - x[i])
    return float(value) if np.ndim(p) == 0 else value


def empirical_cdf(draws, t):
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    return np.searchsorted(x, np.asarray(t, dtype=float), side="right") / x.size
