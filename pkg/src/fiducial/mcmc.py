"""Random-walk Metropolis for one-dimensional fiducial densities."""

from __future__ import annotations

import math

import numpy as np

from .errors import AllRejected, DomainError, NonFiniteNormalization
from .numerics import RandomSource

MIN_ACCEPTANCE = 0.001


def pilot_proposal_sd(logdensity, lo: float, hi: float, points: int = 2001) -> float:
    """``2.4`` times the standard deviation of the density tabulated on a grid over ``[lo, hi]``."""
    grid = np.linspace(lo, hi, points)
    logs = np.array([logdensity(t) for t in grid], dtype=float)
    logs = np.where(np.isfinite(logs), logs, -np.inf)
    w = np.exp(logs - np.max(logs))
    w /= w.sum()
    mean = float(np.sum(w * grid))
    return 2.4 * math.sqrt(float(np.sum(w * (grid - mean) ** 2)))


def mcmc_sample(logdensity, init: float, steps: int, rng: RandomSource, burn_in: int = 10_000,
                proposal_sd: float | None = None, thin: int = 1, pilot_range=None,
                return_acceptance: bool = False):
    """Random-walk Metropolis chain with normal proposals.

    Parameters
    ----------
    logdensity : callable
        Log of the target up to a constant; ``-inf`` outside the support.
    init : float
        Starting state; the log density must be finite there.
    steps : int
        Post-burn-in iterations. ``steps // thin`` states are returned.
    proposal_sd : float, optional
        Defaults to :func:`pilot_proposal_sd` over ``pilot_range``.

    Raises
    ------
    AllRejected
        If fewer than 0.1% of proposals are accepted.
    """
    if proposal_sd is None:
        if pilot_range is None:
            raise DomainError("give proposal_sd or a pilot_range to estimate it")
        proposal_sd = pilot_proposal_sd(logdensity, *pilot_range)
    if not proposal_sd > 0:
        raise DomainError("proposal_sd must be positive")
    if steps < 1 or burn_in < 0 or thin < 1:
        raise DomainError("need steps >= 1, burn_in >= 0, thin >= 1")
    state = float(init)
    current = logdensity(state)
    if not math.isfinite(current):
        raise DomainError("log density is not finite at the initial state")
    total = burn_in + steps
    moves = proposal_sd * rng.normal(total)
    log_u = np.log(rng.uniform(total))
    out = np.empty(steps // thin)
    accepted = 0
    k = 0
    for i in range(total):
        proposal = state + moves[i]
        candidate = logdensity(proposal)
        # symmetric proposal: only the density ratio enters
        if log_u[i] < candidate - current:
            state, current = proposal, candidate
            accepted += 1
        j = i - burn_in
        if j >= 0 and (j + 1) % thin == 0 and k < out.size:
            out[k] = state
            k += 1
    rate = accepted / total
    if rate < MIN_ACCEPTANCE:
        raise AllRejected(f"acceptance rate {rate:.2g} is below {MIN_ACCEPTANCE}")
    return (out, rate) if return_acceptance else out


def grid_sample(pdf, lo: float, hi: float, rng: RandomSource, m: int, points: int = 20001) -> np.ndarray:
    """Inverse-CDF draws from a density tabulated on ``[lo, hi]`` (trapezoid CDF, linear inverse)."""
    grid = np.linspace(lo, hi, points)
    dens = np.asarray([pdf(t) for t in grid], dtype=float)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    if not (math.isfinite(cdf[-1]) and cdf[-1] > 0):
        raise NonFiniteNormalization(f"tabulated mass on [{lo}, {hi}] is {cdf[-1]}")
    cdf /= cdf[-1]
    return np.interp(rng.uniform(m), cdf, grid)
