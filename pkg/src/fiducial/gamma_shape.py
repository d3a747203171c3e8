"""Fiducial inference for the gamma shape parameter through the Bartlett statistic.

Data ``y_i = beta * F^-1(u_i | alpha)`` with uniform ``u_i``. The ratio of
geometric to arithmetic mean, ``w``, does not involve ``beta`` and is strictly
increasing in ``alpha`` for every fixed ``u``, so each uniform vector gives
exactly one fiducial draw ``alpha`` with ``w(u, alpha) = w_obs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import Direction, FiducialModel, FiducialSample, Interval, MonteCarloLaw
from .errors import BracketFailure, DomainError, NoConvergence
from .numerics import RandomSource, brent_start, brent_step, gamma_log_inv_cdf, solve_monotone
from .numerics.special import gamma_log_quantile

QUANTILE_TOL = 1e-12
SOLVE_TOL = 1e-12  # absolute, on log(alpha)
MAX_DOUBLINGS = 200
W_DECIMALS = 13
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class GammaShapeModel:
    n: int
    beta: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"gamma shape model needs n >= 2, got {self.n}")
        if not self.beta > 0:
            raise DomainError("scale beta must be positive")

    def sample_y(self, alpha: float, rng: RandomSource, m: int = 1) -> np.ndarray:
        """``(m, n)`` gamma samples generated through the fiducial equation."""
        u = rng.uniform((m, self.n))
        return self.beta * np.exp(gamma_log_inv_cdf(u, alpha, tol=QUANTILE_TOL))

    def fiducial_model(self) -> FiducialModel:
        n = self.n
        return FiducialModel(
            model_id=f"gamma-shape(n={n})",
            law=MonteCarloLaw(f"uniform^{n}", lambda rng, m: rng.uniform((m, n))),
            forward=lambda u, alpha: bartlett_map_rows(u, alpha),
            solve=lambda u, w: solve_alpha_rows(u, w),
            direction=Direction.INCREASING,
            parameter_space=Interval(0.0, math.inf),
        )


def bartlett_statistic(y) -> float:
    """Geometric mean over arithmetic mean, computed from logs."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise DomainError("Bartlett statistic needs at least two observations")
    if np.any(~(y > 0)):
        raise DomainError("Bartlett statistic needs positive observations")
    logs = np.log(y)
    top = logs.max()
    log_am = top + math.log(np.mean(np.exp(logs - top)))
    return math.exp(min(0.0, logs.mean() - log_am))


@njit(cache=True, error_model="numpy")
def _log_w(u, alpha, tol):
    n = u.size
    logs = np.empty(n)
    top = -np.inf
    for i in range(n):
        logs[i] = gamma_log_quantile(u[i], alpha, tol)
        top = max(top, logs[i])
    s = 0.0
    for i in range(n):
        s += math.exp(logs[i] - top)
    return logs.mean() - (top + math.log(s / n))


@njit(cache=True, error_model="numpy")
def _residual(t, args):
    # args = (log w_obs, u_1, ..., u_n); root in t = log(alpha)
    return _log_w(args[1:], math.exp(t), 1e-12) - args[0]


@njit(cache=True, error_model="numpy")
def _solve_one(u, log_w_obs, tol, max_doublings):
    """Returns (log alpha, status): 0 ok, 1 bracket failure, 2 no convergence."""
    args = np.empty(u.size + 1)
    args[0] = log_w_obs
    args[1:] = u
    f0 = _residual(0.0, args)
    if f0 == 0.0:
        return 0.0, 0
    # double alpha (step log 2 in t) away from 1 until the residual changes sign
    step = _LOG2 if f0 < 0.0 else -_LOG2
    t0, f_prev = 0.0, f0
    for _ in range(max_doublings):
        t1 = t0 + step
        f1 = _residual(t1, args)
        if (f1 >= 0.0) != (f_prev >= 0.0) or f1 == 0.0:
            break
        t0, f_prev = t1, f1
    else:
        return math.nan, 1
    state = brent_start(t0, f_prev, t1, f1)
    for _ in range(200):
        t, done = brent_step(state, tol)
        if done:
            return t, 0
        state[4] = _residual(t, args)
    return state[1], 2


@njit(cache=True, error_model="numpy")
def _solve_rows(u, log_w_obs, tol, max_doublings):
    m = u.shape[0]
    out = np.empty(m)
    status = np.zeros(m, dtype=np.int64)
    for j in range(m):
        t, s = _solve_one(u[j], log_w_obs, tol, max_doublings)
        out[j] = math.exp(t)
        status[j] = s
    return out, status


@njit(cache=True, error_model="numpy")
def _map_rows(u, alpha, tol):
    m = u.shape[0]
    out = np.empty(m)
    for j in range(m):
        out[j] = math.exp(_log_w(u[j], alpha, tol))
    return out


def _check_u(u):
    u = np.ascontiguousarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("uniforms must lie in (0, 1)")
    return u


def bartlett_map(u, alpha: float) -> float:
    """Bartlett statistic of the gamma quantiles ``F^-1(u_i | alpha)``.

    Strictly increasing in ``alpha``, tending to 0 as ``alpha -> 0`` and to 1
    as ``alpha -> infinity``.
    """
    u = _check_u(u)
    if u.ndim != 1 or u.size < 2:
        raise DomainError("need at least two uniforms")
    if np.all(u == u[0]):
        raise DomainError("uniforms are all equal; the Bartlett statistic is identically 1")
    if not alpha > 0:
        raise DomainError("shape must be positive")
    return math.exp(min(0.0, _log_w(u, float(alpha), QUANTILE_TOL)))


def bartlett_map_rows(u, alpha: float) -> np.ndarray:
    u = _check_u(u)
    return np.minimum(_map_rows(np.atleast_2d(u), float(alpha), QUANTILE_TOL), 1.0)


def _check_w(w_obs):
    if not 0 < w_obs < 1:
        raise DomainError(f"Bartlett statistic must lie in (0, 1), got {w_obs}")


def solve_alpha(u, w_obs: float, tol: float = SOLVE_TOL) -> float:
    """Shape ``alpha`` with ``bartlett_map(u, alpha) = w_obs``.

    The bracket grows geometrically from ``alpha = 1`` (halving the lower or
    doubling the upper end) until it straddles ``w_obs``; Brent's method then
    finishes on ``log(alpha)``.
    """
    _check_w(w_obs)
    u = _check_u(u)
    log_w = math.log(w_obs)

    def f(t):
        return _log_w(u, math.exp(t), QUANTILE_TOL) - log_w

    lo = hi = 0.0
    f0 = f(0.0)
    if f0 == 0:
        return 1.0
    for _ in range(MAX_DOUBLINGS):
        if f0 < 0:
            lo, hi = hi, hi + _LOG2
            if f(hi) >= 0:
                break
        else:
            lo, hi = lo - _LOG2, lo
            if f(lo) <= 0:
                break
    else:
        raise BracketFailure(f"no bracket for w={w_obs} within 2^{MAX_DOUBLINGS}")
    return math.exp(solve_monotone(f, (lo, hi), tol=tol))


def solve_alpha_rows(u, w_obs: float, tol: float = SOLVE_TOL) -> np.ndarray:
    """:func:`solve_alpha` for every row of ``u`` (compiled loop)."""
    _check_w(w_obs)
    u = _check_u(np.atleast_2d(u))
    alpha, status = _solve_rows(u, math.log(w_obs), tol, MAX_DOUBLINGS)
    if np.any(status == 1):
        raise BracketFailure(f"no bracket for w={w_obs} within 2^{MAX_DOUBLINGS}")
    if np.any(status == 2):
        raise NoConvergence("shape solve did not converge", best=alpha)
    return alpha


def fiducial_alpha(y, rng: RandomSource, m: int) -> FiducialSample:
    """Fiducial draws of the gamma shape from data ``y``.

    The data enter only through the Bartlett statistic, so the draws are
    invariant to rescaling ``y``. ``w`` is rounded to 13 decimals first so
    that this holds bit for bit despite last-digit noise from the rescaling.
    """
    y = np.asarray(y, dtype=float)
    w_obs = round(bartlett_statistic(y), W_DECIMALS)
    if w_obs >= 1:
        raise DomainError("data are all equal; no fiducial for the shape")
    u = rng.uniform((m, y.size))
    return FiducialSample(draws=solve_alpha_rows(u, w_obs), model_id=f"gamma-shape(n={y.size})",
                          observation=w_obs, seed=rng.seed, stream=rng.stream)
