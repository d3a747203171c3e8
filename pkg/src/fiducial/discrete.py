"""Fiducials for restricted data: digitized observations and a truncated mean.

Digitized location data ``x = theta + u`` with ``u`` on the lattice ``k * d``
have atoms and no density, but the fiducial CDF ``1 - F(x- | theta)`` is still
exact. The pmf is held as exact rationals so the step function is evaluated
without floating ties.

For a normal mean restricted to ``mu < mu_max`` two candidate fiducials are
provided: (A) reject draws that violate the restriction, and (B) keep the
unrestricted density below ``mu_max`` and put the missing mass on the
boundary point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import (
    Direction,
    FiducialModel,
    FiducialSample,
    Interval,
    MonteCarloLaw,
    SamplingCdf,
)
from .errors import DomainError, RejectionStall
from .numerics import RandomSource, quadrature, solve_monotone, std_normal_cdf, std_normal_pdf, std_normal_ppf

PMF_TOL = 1e-12
STALL_ACCEPTANCE = 1e-6


def _exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(float(value))


# --- digitized location -------------------------------------------------------


@dataclass(frozen=True)
class DigitizedLaw:
    """Lattice law ``P(U = k d) = pmf[k]``.

    Probabilities given as floats are converted to the nearest fraction with
    denominator at most 10^12, so ``0.3`` is stored as ``3/10``.
    """

    d: float
    pmf: dict

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("resolution d must be positive")
        if not self.pmf:
            raise DomainError("pmf must have nonempty support")
        exact = {}
        for k, p in sorted(self.pmf.items()):
            if int(k) != k:
                raise DomainError(f"support index {k} is not an integer")
            q = p if isinstance(p, Fraction) else Fraction(p).limit_denominator(10**12)
            if q < 0:
                raise DomainError(f"negative probability at k={k}")
            exact[int(k)] = q
        if abs(float(sum(exact.values())) - 1) > PMF_TOL:
            raise DomainError("pmf does not sum to 1")
        object.__setattr__(self, "pmf", exact)

    @property
    def support(self) -> list:
        return sorted(self.pmf)

    def points(self) -> np.ndarray:
        return np.array([k * self.d for k in self.support], dtype=float)

    def probs(self) -> np.ndarray:
        return np.array([float(self.pmf[k]) for k in self.support])

    def mean(self) -> Fraction:
        return _exact(self.d) * sum(k * p for k, p in self.pmf.items())

    def sample(self, rng: RandomSource, m: int) -> np.ndarray:
        return rng.choice(self.points(), self.probs(), m)


def _pmf_sum(law: DigitizedLaw, keep) -> Fraction:
    # ascending support order keeps the sum reproducible
    d = _exact(law.d)
    return sum((law.pmf[k] for k in law.support if keep(k * d)), Fraction(0))


def digitized_sampling_cdf(law: DigitizedLaw) -> SamplingCdf:
    """``F(x | theta) = P(theta + U <= x)`` and its left limit, by exact pmf summation."""

    def evaluate(x, theta):
        t = _exact(x) - _exact(theta)
        return float(_pmf_sum(law, lambda u: u <= t))

    def left_limit(x, theta):
        t = _exact(x) - _exact(theta)
        return float(_pmf_sum(law, lambda u: u < t))

    return SamplingCdf(evaluate=evaluate, left_limit=left_limit)


def digitized_model(law: DigitizedLaw) -> FiducialModel:
    return FiducialModel(
        model_id=f"digitized(d={law.d})",
        law=MonteCarloLaw("lattice", law.sample),
        forward=lambda u, theta: u + theta,
        solve=lambda u, x: x - u,
        direction=Direction.INCREASING,
    )


def digitized_fiducial_cdf(law: DigitizedLaw, x, theta, exact: bool = False):
    """``C(theta | x) = 1 - F(x- | theta) = P(U >= x - theta)``.

    A right-continuous step function of ``theta`` jumping at ``x - k d``.
    With ``exact=True`` the value is returned as a :class:`Fraction`.
    """
    t = _exact(x) - _exact(theta)
    value = _pmf_sum(law, lambda u: u >= t)
    return value if exact else float(value)


def digitized_fiducial_cdf_enumerated(law: DigitizedLaw, x, theta, exact: bool = False):
    """Same CDF from the fiducial draws ``x - u``: ``P(x - U <= theta)``."""
    x, theta = _exact(x), _exact(theta)
    value = _pmf_sum(law, lambda u: x - u <= theta)
    return value if exact else float(value)


def digitized_fiducial_mean(law: DigitizedLaw, x) -> float:
    """``x - E[U]``, exact up to the final rounding."""
    return float(_exact(x) - law.mean())


def digitized_fiducial_mode(law: DigitizedLaw, x) -> float:
    """``x - d * argmax pmf``; ties go to the smallest lattice index."""
    best = max(law.support, key=lambda k: (law.pmf[k], -k))
    return float(_exact(x) - best * _exact(law.d))


def third_central_moments(law: DigitizedLaw, x=0.0) -> tuple:
    """Third central moments of ``U`` and of the fiducial ``x - U``."""
    d = _exact(law.d)
    mu = law.mean()
    m3 = sum(p * (k * d - mu) ** 3 for k, p in law.pmf.items())
    xf = _exact(x)
    fid_mean = xf - mu
    m3_fid = sum(p * (xf - k * d - fid_mean) ** 3 for k, p in law.pmf.items())
    return float(m3), float(m3_fid)


# --- truncated normal mean ----------------------------------------------------


@dataclass(frozen=True)
class TruncatedMeanModel:
    """``xbar = mu + sigma * ubar`` with ``ubar ~ N(0, 1/n)`` and ``mu < mu_max``."""

    sigma: float
    n: int
    mu_max: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if not math.isfinite(self.mu_max):
            raise DomainError("mu_max must be finite")

    @property
    def se(self) -> float:
        return self.sigma / math.sqrt(self.n)

    def sample_xbar(self, mu: float, rng: RandomSource, m: int) -> np.ndarray:
        if not mu < self.mu_max:
            raise DomainError("mu must be below mu_max")
        return mu + self.se * rng.normal(m)

    def unrestricted_model(self) -> FiducialModel:
        """The same equation with the restriction dropped (mu on the whole line)."""
        se = self.se
        return FiducialModel(
            model_id=f"normal-mean(se={se:g})",
            law=MonteCarloLaw("std-normal", lambda rng, m: rng.normal(m)),
            forward=lambda u, mu: mu + se * u,
            solve=lambda u, xbar: xbar - se * u,
        )

    def restricted_model(self) -> FiducialModel:
        """Restricted model; ``solve`` is NaN where the solution violates ``mu < mu_max``."""
        se, top = self.se, self.mu_max

        def solve(u, xbar):
            mu = xbar - se * np.asarray(u)
            return np.where(mu < top, mu, np.nan)

        return FiducialModel(
            model_id=f"truncated-mean(se={se:g},mu_max={top:g})",
            law=MonteCarloLaw("std-normal", lambda rng, m: rng.normal(m)),
            forward=lambda u, mu: mu + se * u,
            solve=solve,
            parameter_space=Interval(-math.inf, top),
            simple=False,
        )


def truncated_acceptance(model: TruncatedMeanModel, xbar: float) -> float:
    """Probability that ``xbar - se * z`` falls below ``mu_max``."""
    return float(std_normal_cdf((model.mu_max - xbar) / model.se))


def truncated_pointmass(model: TruncatedMeanModel, xbar: float) -> float:
    """Mass at ``mu_max`` in candidate B: ``Phi(sqrt(n) (xbar - mu_max) / sigma)``."""
    return float(std_normal_cdf((xbar - model.mu_max) / model.se))


TAIL_SWITCH = 30.0


def normal_tail_sample(a: float, rng: RandomSource, m: int) -> np.ndarray:
    """Exact draws of ``Z | Z >= a`` for ``a > 0`` by exponential-proposal rejection.

    The proposal is ``a + Exp(lam)`` with ``lam = (a + sqrt(a^2 + 4)) / 2``;
    acceptance is at least 0.76 and tends to 1 as ``a`` grows.
    """
    if not a > 0:
        raise DomainError("tail bound must be positive")
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    out = np.empty(m)
    have = 0
    while have < m:
        size = max(int(1.3 * (m - have)), 64)
        x = a - np.log(rng.uniform(size)) / lam
        ok = x[rng.uniform(size) <= np.exp(-0.5 * (x - lam) ** 2)]
        take = min(ok.size, m - have)
        out[have:have + take] = ok[:take]
        have += take
    return out


def truncated_fiducial_inverse_cdf(model: TruncatedMeanModel, xbar: float, rng: RandomSource,
                                   m: int) -> FiducialSample:
    """Candidate A by inverse-CDF sampling of the truncated normal.

    Works for any ``xbar``, including far above ``mu_max`` where rejection
    stalls. Uses the upper tail when that is the better-conditioned side.
    More than ``TAIL_SWITCH`` standard errors above the bound the normal CDF
    underflows, and :func:`normal_tail_sample` is used instead.
    """
    se, top = model.se, model.mu_max
    b = (top - xbar) / se
    if b < -TAIL_SWITCH:
        z = -normal_tail_sample(-b, rng, m)
    elif b < 0:
        z = std_normal_ppf(rng.uniform(m) * std_normal_cdf(b))
    else:
        # P(Z > b) is tiny here; invert on the upper side to keep precision
        tail = std_normal_cdf(-b)
        z = -std_normal_ppf(tail + (1 - tail) * (1 - rng.uniform(m)))
    mu = np.minimum(xbar + se * np.asarray(z), np.nextafter(top, -math.inf))
    return FiducialSample(draws=mu, model_id="truncated-A", observation=xbar,
                          seed=rng.seed, stream=rng.stream)


def truncated_fiducial_A(model: TruncatedMeanModel, xbar: float, rng: RandomSource, m: int,
                         fallback: bool = False) -> FiducialSample:
    """Candidate A: fiducial draws ``xbar - se z`` kept only when below ``mu_max``.

    The result is ``N(xbar, se^2)`` truncated to ``(-inf, mu_max)``. Raises
    :class:`RejectionStall` when the acceptance probability is below 1e-6,
    unless ``fallback`` is set, in which case inverse-CDF sampling is used.
    """
    if int(m) != m or m < 1:
        raise DomainError("draw count must be a positive integer")
    accept = truncated_acceptance(model, xbar)
    if accept < STALL_ACCEPTANCE:
        if fallback:
            return truncated_fiducial_inverse_cdf(model, xbar, rng, m)
        raise RejectionStall(f"acceptance probability {accept:.3g} is below {STALL_ACCEPTANCE:g}")
    kept = []
    have = 0
    while have < m:
        batch = int(min(1.2 * (m - have) / accept + 64, 10_000_000))
        mu = xbar - model.se * rng.normal(batch)
        mu = mu[mu < model.mu_max]
        kept.append(mu)
        have += mu.size
    draws = np.concatenate(kept)[:m]
    return FiducialSample(draws=draws, model_id="truncated-A", observation=xbar,
                          seed=rng.seed, stream=rng.stream)


@dataclass(frozen=True)
class MixedDistribution:
    """Density part on ``(lo, hi)`` plus point masses.

    ``density_cdf``, when supplied, gives ``int_lo^t density`` in closed form;
    otherwise it is computed by quadrature.
    """

    density: Callable[[float], float]
    point_masses: Sequence = field(default_factory=tuple)
    lo: float = -math.inf
    hi: float = math.inf
    density_cdf: Callable[[float], float] | None = None

    def __post_init__(self):
        if any(w < 0 for _, w in self.point_masses):
            raise DomainError("point masses must be nonnegative")

    def pdf(self, t: float) -> float:
        # closed at the ends so quadrature sees no jump at a boundary
        return self.density(t) if self.lo <= t <= self.hi else 0.0

    def continuous_mass(self, t: float = math.inf) -> float:
        upper = min(t, self.hi)
        if upper <= self.lo:
            return 0.0
        if self.density_cdf is not None:
            return float(self.density_cdf(upper))
        return quadrature(self.density, self.lo, upper, tol=1e-12)

    def total_mass(self) -> float:
        """Quadrature of the density plus the point masses."""
        return quadrature(self.density, self.lo, self.hi, tol=1e-12) + sum(w for _, w in self.point_masses)

    def cdf(self, t: float) -> float:
        return self.continuous_mass(t) + sum(w for loc, w in self.point_masses if loc <= t)

    def ppf(self, p: float) -> float:
        """Smallest ``t`` with ``cdf(t) >= p``."""
        if not 0 < p < 1:
            raise DomainError("p must lie in (0, 1)")
        cuts = sorted(self.point_masses)
        for loc, w in cuts:
            before = self.cdf(np.nextafter(loc, -math.inf))
            if before < p <= before + w:
                return float(loc)
        lo = self.lo if math.isfinite(self.lo) else -1.0
        hi = self.hi if math.isfinite(self.hi) else 1.0
        while math.isinf(self.lo) and self.cdf(lo) > p:
            lo = 2 * lo - 1
        while math.isinf(self.hi) and self.cdf(hi) < p:
            hi = 2 * hi + 1
        return solve_monotone(lambda t: self.cdf(t) - p, (lo, hi), tol=1e-12)


def tv_distance(a: MixedDistribution, b: MixedDistribution) -> float:
    """Total variation distance: half the L1 distance of densities plus atom differences."""
    cuts = sorted({a.lo, a.hi, b.lo, b.hi})
    cont = sum(quadrature(lambda t: abs(a.pdf(t) - b.pdf(t)), lo, hi, tol=1e-10)
               for lo, hi in zip(cuts[:-1], cuts[1:]))
    atoms = {}
    for loc, w in a.point_masses:
        atoms[loc] = atoms.get(loc, 0.0) + w
    for loc, w in b.point_masses:
        atoms[loc] = atoms.get(loc, 0.0) - w
    return 0.5 * (cont + sum(abs(v) for v in atoms.values()))


def _normal_density(xbar, se):
    return lambda t: float(std_normal_pdf((t - xbar) / se)) / se


def truncated_fiducial_A_law(model: TruncatedMeanModel, xbar: float) -> MixedDistribution:
    """Candidate A as a distribution: the normalized truncated normal density."""
    se, top = model.se, model.mu_max
    z = truncated_acceptance(model, xbar)
    if z == 0:
        raise RejectionStall("truncation region has zero probability in double precision")
    phi = _normal_density(xbar, se)
    return MixedDistribution(
        density=lambda t: phi(t) / z,
        hi=top,
        density_cdf=lambda t: float(std_normal_cdf((t - xbar) / se)) / z,
    )


def truncated_fiducial_B(model: TruncatedMeanModel, xbar: float) -> MixedDistribution:
    """Candidate B: ``N(xbar, se^2)`` density below ``mu_max`` (not renormalized)
    plus an atom of mass :func:`truncated_pointmass` at ``mu_max``."""
    se, top = model.se, model.mu_max
    return MixedDistribution(
        density=_normal_density(xbar, se),
        point_masses=((top, truncated_pointmass(model, xbar)),),
        hi=top,
        density_cdf=lambda t: float(std_normal_cdf((t - xbar) / se)),
    )


def truncated_B_upper_limit(model: TruncatedMeanModel, xbar: float, level: float) -> float:
    """``level`` percentile of candidate B: ``min(xbar + se Phi^-1(level), mu_max)``."""
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    return min(xbar + model.se * float(std_normal_ppf(level)), model.mu_max)
