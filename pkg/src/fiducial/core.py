"""Fiducial models ``x = forward(u, theta)`` and the fiducial distributions they induce.

A model couples a Monte Carlo law for ``u`` with a data-generating map and
its inverse in the parameter. Simulating data and sampling the fiducial are
then the same computation run in opposite directions::

    >>> from fiducial.numerics import RandomSource
    >>> model = location_normal_model()
    >>> x = sample_data(model, 0.0, RandomSource(1), 1)[0]
    >>> fid = sample_fiducial(model, x, RandomSource(2), 1000)
    >>> fid.draw_count
    1000
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, EmptySample, NotSimple
from .numerics import RandomSource, percentile, std_normal_cdf, std_normal_ppf


class Direction(enum.Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    NON_MONOTONE = "non-monotone"


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lo, hi)``; infinite ends allowed."""

    lo: float = -math.inf
    hi: float = math.inf

    def contains(self, value) -> np.ndarray:
        value = np.asarray(value, dtype=float)
        return (value > self.lo) & (value < self.hi)


@dataclass(frozen=True)
class MonteCarloLaw:
    """A named sampler for the auxiliary variable ``u``.

    ``draw(rng, m)`` returns an array whose leading axis has length ``m``;
    any trailing axes hold the components of one ``u``.
    """

    name: str
    draw: Callable[[RandomSource, int], np.ndarray]

    def sample(self, rng: RandomSource, m: int) -> np.ndarray:
        return self.draw(rng, m)


@dataclass(frozen=True)
class FiducialModel:
    """Fiducial equation ``x = forward(u, theta)`` with solver ``theta = solve(u, x)``.

    Both callables are vectorised over the leading axis of ``u``. ``solve``
    returns NaN where the equation has no solution.
    """

    model_id: str
    law: MonteCarloLaw
    forward: Callable
    solve: Callable
    direction: Direction = Direction.INCREASING
    parameter_space: Interval = field(default_factory=Interval)
    simple: bool = True


@dataclass
class FiducialSample:
    draws: np.ndarray
    model_id: str
    observation: object
    seed: int
    stream: int = 0

    @property
    def draw_count(self) -> int:
        return int(self.draws.size)

    def percentile(self, p):
        return fiducial_percentile(self, p)


@dataclass(frozen=True)
class SamplingCdf:
    """Sampling CDF ``F(x | theta)`` together with its left limit ``F(x- | theta)``.

    For continuous laws the left limit is the CDF itself; use
    :meth:`continuous`.
    """

    evaluate: Callable
    left_limit: Callable

    @classmethod
    def continuous(cls, cdf: Callable) -> "SamplingCdf":
        return cls(evaluate=cdf, left_limit=cdf)


def _check_count(m):
    if int(m) != m or m < 1:
        raise DomainError(f"draw count must be a positive integer, got {m}")
    return int(m)


def sample_data(model: FiducialModel, theta, rng: RandomSource, m: int) -> np.ndarray:
    """``m`` independent observations ``forward(u_j, theta)``."""
    m = _check_count(m)
    if not np.all(model.parameter_space.contains(theta)):
        raise DomainError(f"theta={theta} outside the parameter space of {model.model_id}")
    u = model.law.sample(rng, m)
    return np.asarray(model.forward(u, theta))


def sample_fiducial(model: FiducialModel, x, rng: RandomSource, m: int) -> FiducialSample:
    """``m`` fiducial draws ``solve(u_j, x)`` for an observed ``x``.

    Raises :class:`NotSimple` if the equation fails to have a solution for
    any draw; conditional handling belongs to
    :class:`fiducial.conditional.ConditionalFiducialModel`.
    """
    m = _check_count(m)
    u = model.law.sample(rng, m)
    draws = np.asarray(model.solve(u, x), dtype=float)
    if np.any(np.isnan(draws)):
        raise NotSimple(f"{model.model_id}: fiducial equation has no solution for some u")
    return FiducialSample(draws=draws, model_id=model.model_id, observation=x,
                          seed=rng.seed, stream=rng.stream)


def fiducial_cdf_monotone(scdf: SamplingCdf, x, theta, direction: Direction):
    """Fiducial CDF ``C(theta | x)`` of a strictly monotone simple model.

    Increasing models give ``1 - F(x- | theta)``; decreasing models give
    ``F(x | theta)``.
    """
    if direction is Direction.INCREASING:
        return 1.0 - np.asarray(scdf.left_limit(x, theta), dtype=float)
    if direction is Direction.DECREASING:
        return np.asarray(scdf.evaluate(x, theta), dtype=float)
    raise DomainError("the closed-form fiducial CDF requires a strictly monotone model")


def fiducial_percentile(sample, p):
    """Percentile of fiducial draws, linear interpolation between order statistics."""
    draws = sample.draws if isinstance(sample, FiducialSample) else sample
    if np.size(draws) == 0:
        raise EmptySample("no fiducial draws")
    return percentile(draws, p)


def fisher_density_check(scdf: SamplingCdf, x, theta, h=1e-4):
    """Central difference ``-(F(x|theta+h) - F(x|theta-h)) / 2h``.

    For continuous increasing models this is the fiducial density.
    """
    if not h > 0:
        raise DomainError("step h must be positive")
    theta = np.asarray(theta, dtype=float)
    up = np.asarray(scdf.evaluate(x, theta + h), dtype=float)
    down = np.asarray(scdf.evaluate(x, theta - h), dtype=float)
    return -(up - down) / (2 * h)


# --- built-in location models ----------------------------------------------

_NORMAL_LAW = MonteCarloLaw("std-normal", lambda rng, m: rng.normal(m))
_UNIFORM_LAW = MonteCarloLaw("uniform", lambda rng, m: rng.uniform(m))


def location_normal_model() -> FiducialModel:
    """``x = theta + u`` with standard normal ``u``."""
    return FiducialModel(
        model_id="location-normal",
        law=_NORMAL_LAW,
        forward=lambda u, theta: u + theta,
        solve=lambda u, x: x - u,
    )


def location_cdf_inversion_model() -> FiducialModel:
    """Same sampling law as :func:`location_normal_model`, written as ``x = theta + Phi^-1(u)``."""
    return FiducialModel(
        model_id="location-normal-inversion",
        law=_UNIFORM_LAW,
        forward=lambda u, theta: theta + std_normal_ppf(u),
        solve=lambda u, x: x - std_normal_ppf(u),
    )


def location_normal_cdf() -> SamplingCdf:
    return SamplingCdf.continuous(lambda x, theta: std_normal_cdf(np.asarray(x) - np.asarray(theta)))
