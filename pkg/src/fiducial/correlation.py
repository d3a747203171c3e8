"""Fiducial inference for the correlation coefficient of a bivariate normal.

The structural model works on the transformed scale ``x = r / sqrt(1 - r^2)``
with parameter ``theta = rho / sqrt(1 - rho^2)``::

    x = (theta * u1 + u3) / u2,   theta = (x * u2 - u3) / u1

where ``u1 = sqrt(chi2_{n-1})``, ``u2 = sqrt(chi2_{n-2})``, ``u3 ~ N(0, 1)``
are independent. Taking square roots of the chi-square variables is what
makes ``r`` distributed exactly like a Pearson correlation of ``n`` pairs
(Bartlett decomposition of the 2x2 Wishart matrix).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Direction, FiducialModel, FiducialSample, Interval, MonteCarloLaw
from .errors import DomainError
from .numerics import RandomSource, percentile, sample_chi2, solve_monotone


@dataclass(frozen=True)
class CorrelationModel:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise DomainError(f"correlation model needs sample size n >= 3, got {self.n}")

    def draw_u(self, rng: RandomSource, m: int) -> np.ndarray:
        """``(m, 3)`` array of ``(u1, u2, u3)``."""
        u1 = np.sqrt(sample_chi2(self.n - 1, rng, m))
        u2 = np.sqrt(sample_chi2(self.n - 2, rng, m))
        u3 = rng.normal(m)
        return np.column_stack([u1, u2, u3])

    def fiducial_model(self) -> FiducialModel:
        return FiducialModel(
            model_id=f"correlation(n={self.n})",
            law=MonteCarloLaw(f"corr-u(n={self.n})", self.draw_u),
            forward=lambda u, theta: forward_corr(u[..., 0], u[..., 1], u[..., 2], theta),
            solve=lambda u, x: solve_theta_corr(u[..., 0], u[..., 1], u[..., 2], x),
            direction=Direction.INCREASING,
        )


def forward_corr(u1, u2, u3, theta):
    return (theta * np.asarray(u1) + u3) / u2


def solve_theta_corr(u1, u2, u3, x):
    """Solve ``x = (theta u1 + u3) / u2`` for ``theta``."""
    u1 = np.asarray(u1, dtype=float)
    if np.any(u1 <= 0) or np.any(np.asarray(u2) <= 0):
        raise DomainError("u1 and u2 must be positive")
    value = (x * np.asarray(u2) - u3) / u1
    return float(value) if np.ndim(value) == 0 else value


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def r_to_x(r):
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= 1):
        raise DomainError("correlation must satisfy |r| < 1")
    return _scalar_or_array(r / np.sqrt(1 - r * r))


def x_to_r(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(x / np.sqrt(1 + x * x))


theta_to_rho = x_to_r
rho_to_theta = r_to_x


def fiducial_rho(r_obs: float, n: int, rng: RandomSource, m: int) -> FiducialSample:
    """``m`` independent fiducial draws of ``rho`` given observed correlation ``r_obs``."""
    model = CorrelationModel(n)
    u = model.draw_u(rng, m)
    theta = solve_theta_corr(u[:, 0], u[:, 1], u[:, 2], r_to_x(r_obs))
    return FiducialSample(draws=np.asarray(theta_to_rho(theta)), model_id=f"correlation(n={n})",
                          observation=r_obs, seed=rng.seed, stream=rng.stream)


# --- direct simulation of the empirical correlation --------------------------


def _centered_moments(rng: RandomSource, n: int, m: int):
    """Centered cross-products of ``m`` samples of ``n`` independent normal pairs."""
    z1 = rng.normal((m, n))
    z2 = rng.normal((m, n))
    z1 -= z1.mean(axis=1, keepdims=True)
    z2 -= z2.mean(axis=1, keepdims=True)
    return (z1 * z1).sum(axis=1), (z2 * z2).sum(axis=1), (z1 * z2).sum(axis=1)


def _pearson_from_moments(s11, s22, s12, rho):
    # second coordinate is rho z1 + sqrt(1 - rho^2) z2 (Cholesky transform)
    c = np.sqrt(1 - rho * rho)
    cov = rho * s11 + c * s12
    var2 = rho * rho * s11 + 2 * rho * c * s12 + c * c * s22
    return np.clip(cov / np.sqrt(s11 * var2), -1.0, 1.0)


def sample_empirical_corr(rho: float, n: int, rng: RandomSource, m: int) -> np.ndarray:
    """Pearson correlations of ``m`` simulated samples of ``n`` bivariate normal pairs."""
    if not abs(rho) < 1:
        raise DomainError("rho must satisfy |rho| < 1")
    CorrelationModel(n)
    s11, s22, s12 = _centered_moments(rng, n, m)
    return _pearson_from_moments(s11, s22, s12, rho)


class SimulatedCorrelationCdf:
    """Monte Carlo estimate of ``F(r | rho)`` for the empirical correlation.

    Common random numbers are used across ``rho`` (the same standard normal
    pairs are pushed through the Cholesky transform for every ``rho``), so the
    estimate is monotone in ``rho`` and can be inverted with a bracketing
    solver.
    """

    def __init__(self, n: int, rng: RandomSource, m: int = 400_000):
        CorrelationModel(n)
        self.n = n
        self.m = m
        self._moments = _centered_moments(rng, n, m)

    def __call__(self, r: float, rho: float) -> float:
        rs = _pearson_from_moments(*self._moments, rho)
        return float(np.count_nonzero(rs <= r)) / self.m

    def inversion_percentile(self, r_obs: float, level: float, tol: float = 1e-10) -> float:
        """``rho`` solving ``1 - level = F(r_obs | rho)``: the ``level`` fiducial percentile."""
        target = 1.0 - level
        lim = 1 - 1e-12
        return solve_monotone(lambda rho: self(r_obs, rho) - target, (-lim, lim), tol=tol)


def cdf_inversion_percentiles(r_obs, n, levels, rng: RandomSource, m: int = 400_000) -> np.ndarray:
    """Fiducial percentiles of ``rho`` from the CDF-inversion construction."""
    cdf = SimulatedCorrelationCdf(n, rng, m)
    return np.array([cdf.inversion_percentile(r_obs, p) for p in np.atleast_1d(levels)])


def structural_percentiles(r_obs, n, levels, rng: RandomSource, m: int = 100_000) -> np.ndarray:
    return np.atleast_1d(percentile(fiducial_rho(r_obs, n, rng, m).draws, np.atleast_1d(levels)))
