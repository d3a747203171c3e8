"""Coverage and equivalence experiments.

A coverage experiment repeats: simulate data at a true ``theta0``, draw the
fiducial, and check whether ``theta0`` lies below the fiducial
``(1 - alpha)`` percentile. For an exact confidence distribution the
frequency is ``1 - alpha``.

Replication ``i`` (counted from 1) uses the stream ``base XOR i`` of the
experiment's :class:`RandomSource`, so results do not depend on how
replications are spread over worker threads. ``FID_THREADS`` sets the worker
count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import FiducialModel, sample_data, sample_fiducial
from .discrete import TruncatedMeanModel, truncated_B_upper_limit
from .errors import DomainError
from .numerics import RandomSource, ks_critical_value, ks_distance, percentile

MIN_REPS = 100


@dataclass
class CoverageReport:
    model_id: str
    theta0: float
    levels: np.ndarray
    coverages: np.ndarray
    reps: int
    draws_per_rep: int
    seed: int
    elapsed_ms: float | None = None

    def binomial_sd(self) -> np.ndarray:
        """Standard error of each coverage under exactness."""
        return np.sqrt(self.levels * (1 - self.levels) / self.reps)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model_id,
            "seed": self.seed,
            "levels": [float(a) for a in self.levels],
            "coverages": [float(c) for c in self.coverages],
            "reps": self.reps,
            "draws_per_rep": self.draws_per_rep,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass
class EquivalenceResult:
    distance: float
    threshold: float
    m: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.distance < self.threshold


def worker_count() -> int:
    raw = os.environ.get("FID_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"FID_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise DomainError("FID_THREADS must be at least 1")
    return n


def _check_levels(levels):
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    if levels.size == 0 or np.any(~((levels > 0) & (levels < 1))):
        raise DomainError("levels must lie in (0, 1)")
    return levels


def _check_reps(reps):
    if int(reps) != reps or reps < MIN_REPS:
        raise DomainError(f"need at least {MIN_REPS} replications, got {reps}")
    return int(reps)


def _run_replications(one, reps: int, workers: int | None):
    workers = worker_count() if workers is None else workers
    indices = range(1, reps + 1)
    if workers == 1:
        return [one(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, indices))


def coverage_experiment(model: FiducialModel, theta0: float, levels, reps: int, draws_per_rep: int,
                        rng: RandomSource, workers: int | None = None) -> CoverageReport:
    """Empirical coverage of the upper fiducial limits ``theta_{1-alpha}(x)``.

    Parameters
    ----------
    levels : array of float
        The ``alpha`` values; coverage of level ``alpha`` should be ``1 - alpha``.
    """
    levels = _check_levels(levels)
    reps = _check_reps(reps)
    if int(draws_per_rep) != draws_per_rep or draws_per_rep < 1:
        raise DomainError("draws_per_rep must be a positive integer")
    if not model.simple:
        raise DomainError("coverage experiments need a simple model")

    def one(i):
        r = rng.derive(i)
        x = sample_data(model, theta0, r, 1)[0]
        draws = sample_fiducial(model, x, r, draws_per_rep).draws
        return theta0 <= np.atleast_1d(percentile(draws, 1 - levels))

    hits = np.array(_run_replications(one, reps, workers))
    return CoverageReport(model_id=model.model_id, theta0=float(theta0), levels=levels,
                          coverages=hits.mean(axis=0), reps=reps, draws_per_rep=int(draws_per_rep),
                          seed=rng.seed)


def truncated_b_coverage(model: TruncatedMeanModel, mu0: float, levels, reps: int,
                         rng: RandomSource, workers: int | None = None) -> CoverageReport:
    """Coverage of the candidate-B upper limits ``min(theta_{1-alpha}(xbar), mu_max)``.

    The limits are exact percentiles, so ``draws_per_rep`` is reported as 0.
    """
    levels = _check_levels(levels)
    reps = _check_reps(reps)
    if not mu0 < model.mu_max:
        raise DomainError("true mean must lie below mu_max")

    def one(i):
        xbar = float(model.sample_xbar(mu0, rng.derive(i), 1)[0])
        return np.array([mu0 <= truncated_B_upper_limit(model, xbar, 1 - a) for a in levels])

    hits = np.array(_run_replications(one, reps, workers))
    return CoverageReport(model_id=f"truncated-B(sigma={model.sigma:g},n={model.n},mu_max={model.mu_max:g})",
                          theta0=float(mu0), levels=levels, coverages=hits.mean(axis=0), reps=reps,
                          draws_per_rep=0, seed=rng.seed)


def ks_threshold(m: int, level: float = 0.01) -> float:
    """Two-sample KS critical value for equal sizes ``m``: ``c(level) sqrt(2 / m)``."""
    return ks_critical_value(level, m, m)


def equivalence_experiment(model_a: FiducialModel, model_b: FiducialModel, x, m: int,
                           rng: RandomSource, rng_b: RandomSource | None = None,
                           level: float = 0.01) -> EquivalenceResult:
    """KS distance between fiducial samples of two models at the same observation.

    Model A uses ``rng``; model B uses ``rng_b``, by default the independent
    stream ``rng.derive(1)``. Passing equal sources for equal models gives
    distance 0.
    """
    if rng_b is None:
        rng_b = rng.derive(1)
    a = sample_fiducial(model_a, x, rng, m).draws
    b = sample_fiducial(model_b, x, rng_b, m).draws
    return EquivalenceResult(distance=ks_distance(a, b), threshold=ks_threshold(m, level), m=m,
                             details={"models": [model_a.model_id, model_b.model_id]})


def coverage_tolerance(report: CoverageReport, sigmas: float = 3.0) -> np.ndarray:
    return sigmas * report.binomial_sd()


def within_tolerance(report: CoverageReport, tol) -> bool:
    return bool(np.all(np.abs(report.coverages - (1 - report.levels)) <= tol))


def nominal(levels) -> np.ndarray:
    return 1 - _check_levels(levels)
