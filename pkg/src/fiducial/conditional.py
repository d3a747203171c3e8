"""Conditional fiducial models: a fiducial model together with a condition ``C(theta) = c``.

Positive-probability conditions are handled by plain rejection. For
zero-probability conditions the answer depends on which statistic defines
the event (conditioning ``theta1 - theta2 = 0`` and ``theta1 / theta2 = 1``
pick the same line but give different laws), so the closed forms here state
their conditioning coordinate, and :func:`band_rejection` gives an
epsilon-band Monte Carlo approximation for any chosen coordinate.

Also here: the repeated-sampling densities built from a family ``F(x|alpha)``
(:func:`gt_density`, :func:`hannig_density`) and Gaussian conditioning on a
linear subspace.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import FiducialModel, FiducialSample
from .errors import (
    DomainError,
    NoConvergence,
    NonFiniteNormalization,
    NonOrthonormalBasis,
    RejectionStall,
    ZeroDensity,
)
from .families import Family, get_family, scan_grid
from .mcmc import grid_sample
from .numerics import RandomSource, integrate_peaked, quadrature, std_normal_pdf, von_mises_density


class ConditionKind(enum.Enum):
    DIFFERENCE = "difference"
    RATIO = "ratio"
    PROJECTION = "projection"
    POSITIVE_PROBABILITY_SET = "positive-probability-set"


def _kind(kind) -> ConditionKind:
    if isinstance(kind, ConditionKind):
        return kind
    try:
        return ConditionKind(str(kind).lower())
    except ValueError:
        raise DomainError(f"unknown condition kind {kind!r}") from None


# --- densities from a sampling family ---------------------------------------


class FiducialDensity:
    """A normalized density on the parameter range of a family.

    ``log_kernel(alpha)`` is the log of the unnormalized density. The mode is
    located on a coarse grid and the normalizing constant is found by
    integrating outward from it until the tail mass drops below 1e-12.
    """

    def __init__(self, family: Family, x, log_kernel: Callable[[float], float]):
        self.family = family
        self.x = np.asarray(x, dtype=float)
        self._log_kernel = log_kernel
        grid = scan_grid(family, self.x)
        logs = np.array([self._safe_log(a) for a in grid])
        if not np.any(np.isfinite(logs)):
            raise NonFiniteNormalization("density vanishes on the whole scan grid")
        i = int(np.nanargmax(np.where(np.isfinite(logs), logs, -np.inf)))
        self.mode_guess = float(grid[i])
        self.shift = float(logs[i])
        near = grid[max(i - 1, 0):i + 2]
        width = 4 * float(np.max(np.diff(near))) if near.size > 1 else 1.0
        try:
            norm = integrate_peaked(self._scaled, self.mode_guess, width, family.lo, family.hi,
                                    tol=1e-12, tail_tol=1e-12)
        except NoConvergence as exc:
            raise NonFiniteNormalization(f"normalization did not converge: {exc}") from exc
        if not (math.isfinite(norm) and norm > 0):
            raise NonFiniteNormalization(f"normalization constant is {norm}")
        self.norm = norm
        self.log_norm = math.log(norm) + self.shift

    def _safe_log(self, alpha: float) -> float:
        if not self.family.contains(alpha):
            return -math.inf
        value = self._log_kernel(float(alpha))
        return value if not math.isnan(value) else -math.inf

    def _scaled(self, alpha: float) -> float:
        return math.exp(self._safe_log(alpha) - self.shift)

    def logpdf(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        out = np.array([self._safe_log(a) for a in alpha.ravel()]).reshape(alpha.shape) - self.log_norm
        return float(out) if out.ndim == 0 else out

    def __call__(self, alpha):
        return np.exp(self.logpdf(alpha))

    pdf = __call__


def _log_abs_derivs(family: Family, x, alpha) -> np.ndarray:
    d = np.array([abs(family.dalpha(xi, alpha)) for xi in x])
    with np.errstate(divide="ignore"):
        return np.log(d)


def _check_data(x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size < 1:
        raise DomainError("data must be a nonempty vector")
    return x


def gt_law(x, family, kind="ratio") -> FiducialDensity:
    """Repeated-sampling fiducial ``K |alpha|^(n-1) prod |dF(x_i|alpha)/dalpha|``.

    The factor ``|alpha|^(n-1)`` is the Jacobian of conditioning on the
    ratios ``alpha_i / alpha_1 = 1``; conditioning on the differences
    ``alpha_i - alpha_1 = 0`` drops it.
    """
    x = _check_data(x)
    family = get_family(family)
    kind = _kind(kind)
    if kind not in (ConditionKind.RATIO, ConditionKind.DIFFERENCE):
        raise DomainError("gt density needs condition kind 'ratio' or 'difference'")
    jac = x.size - 1 if kind is ConditionKind.RATIO else 0

    def log_kernel(alpha):
        s = float(np.sum(_log_abs_derivs(family, x, alpha)))
        if jac:
            s += jac * math.log(abs(alpha)) if alpha != 0 else -math.inf
        return s

    return FiducialDensity(family, x, log_kernel)


def gt_density(alpha, x, family, kind="ratio"):
    """Normalized density of :func:`gt_law` evaluated at ``alpha``."""
    return gt_law(x, family, kind)(alpha)


def _log_densities(family: Family, x, alpha) -> np.ndarray:
    f = np.array([family.density(xi, alpha) for xi in x])
    with np.errstate(divide="ignore"):
        return np.log(f)


def _logsumexp(v: np.ndarray) -> float:
    top = float(np.max(v))
    if not math.isfinite(top):
        return top
    return top + math.log(float(np.sum(np.exp(v - top))))


def hannig_law(x, family) -> FiducialDensity:
    """``K sum_i |dF(x_i|alpha)/dalpha| prod_{j != i} f(x_j|alpha)``, evaluated in logs."""
    x = _check_data(x)
    family = get_family(family)

    def log_kernel(alpha):
        ld = _log_abs_derivs(family, x, alpha)
        lf = _log_densities(family, x, alpha)
        if np.any(np.isneginf(lf)):
            # a zero density kills every term except possibly the one that skips it
            zero = np.isneginf(lf)
            if zero.sum() > 1:
                return -math.inf
            i = int(np.argmax(zero))
            return float(ld[i] + np.sum(lf[~zero]))
        return _logsumexp(ld - lf) + float(np.sum(lf))

    return FiducialDensity(family, x, log_kernel)


def hannig_density(alpha, x, family):
    return hannig_law(x, family)(alpha)


def hannig_prior(alpha, x, family):
    """Data-dependent prior ``sum_i |dF(x_i|alpha)/dalpha| / f(x_i|alpha)``.

    ``hannig_density`` is proportional to this prior times the likelihood.
    """
    x = _check_data(x)
    family = get_family(family)

    def one(a):
        f = np.array([family.density(xi, a) for xi in x])
        if np.any(f <= 0):
            raise ZeroDensity(f"sampling density vanishes at alpha={a}")
        d = np.array([abs(family.dalpha(xi, a)) for xi in x])
        return float(np.sum(d / f))

    alpha = np.asarray(alpha, dtype=float)
    out = np.array([one(a) for a in alpha.ravel()]).reshape(alpha.shape)
    return float(out) if out.ndim == 0 else out


def likelihood(alpha, x, family):
    x = _check_data(x)
    family = get_family(family)
    alpha = np.asarray(alpha, dtype=float)
    out = np.array([float(np.prod([family.density(xi, a) for xi in x])) for a in alpha.ravel()])
    out = out.reshape(alpha.shape)
    return float(out) if out.ndim == 0 else out


# --- planar location model: line and circle ----------------------------------


def line_fiducial_difference(x1: float, x2: float) -> tuple:
    """``theta ~ N(x, I)`` conditioned on ``theta1 - theta2 = 0``: ``N((x1 + x2) / 2, 1/2)``."""
    return 0.5 * (x1 + x2), 0.5


# phi(mu - x1) phi(mu - x2) = exp(-(x1 - x2)^2 / 4) exp(-(mu - m)^2) / (2 pi), m the
# midpoint, so the ratio law is worked in s = mu - m with the constant dropped.
# That keeps it finite however far apart x1 and x2 are. Beyond |s| = 40 the
# Gaussian factor is below 1e-690 and breakpoints there are skipped.
_LINE_CUT = 40.0


def _line_checked(x1, x2):
    x1, x2 = float(x1), float(x2)
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise DomainError("line data must be finite")
    return 0.5 * (x1 + x2)


def _pieces(f, breaks):
    edges = [-math.inf] + sorted(b for b in breaks if abs(b) < _LINE_CUT) + [math.inf]
    return sum(quadrature(f, lo, hi, tol=1e-12) for lo, hi in zip(edges[:-1], edges[1:]))


def _line_ratio_mass(m: float) -> float:
    """``J(m) = int |m + s| exp(-s^2) ds`` by quadrature split at the kink ``s = -m``."""
    return _pieces(lambda s: abs(m + s) * math.exp(-s * s), [-m])


def line_ratio_normalizer(x1: float, x2: float) -> float:
    """``1 / K`` for the kernel ``|mu| phi(mu - x1) phi(mu - x2)``, by quadrature.

    Underflows to 0 once ``|x1 - x2|`` exceeds about 55; the density itself
    stays well defined.
    """
    m = _line_checked(x1, x2)
    return _line_ratio_mass(m) * math.exp(-0.25 * (x1 - x2) ** 2) / (2 * math.pi)


def line_fiducial_ratio_density(mu, x1: float, x2: float):
    """``theta ~ N(x, I)`` conditioned on ``theta1 / theta2 = 1``, as a density of ``mu = theta1``.

    Equal to ``K |mu| phi(mu - x1) phi(mu - x2)``; the ``|mu|`` is the
    Jacobian of the ratio coordinate.
    """
    m = _line_checked(x1, x2)
    j = _line_ratio_mass(m)
    mu = np.asarray(mu, dtype=float)
    out = np.abs(mu) * np.exp(-((mu - m) ** 2)) / j
    return float(out) if out.ndim == 0 else out


def line_ratio_sample(x1: float, x2: float, rng: RandomSource, m: int) -> np.ndarray:
    """Draws from :func:`line_fiducial_ratio_density` by inversion of a tabulated CDF."""
    mid = _line_checked(x1, x2)
    j = _line_ratio_mass(mid)
    return grid_sample(lambda t: abs(t) * math.exp(-((t - mid) ** 2)) / j, mid - 12.0, mid + 12.0, rng, m)


def line_difference_density(mu, x1: float, x2: float):
    mean, var = line_fiducial_difference(x1, x2)
    sd = math.sqrt(var)
    out = std_normal_pdf((np.asarray(mu, dtype=float) - mean) / sd) / sd
    return float(out) if np.ndim(out) == 0 else out


def line_tv_distance(x1: float, x2: float) -> float:
    """Total variation between the difference- and ratio-conditioned line fiducials, by quadrature.

    Both densities share the factor ``exp(-s^2)``; they cross where
    ``|mu| = J / sqrt(pi)``, and the integral is split there and at ``mu = 0``.
    """
    m = _line_checked(x1, x2)
    j = _line_ratio_mass(m)
    root_pi = math.sqrt(math.pi)
    cross = j / root_pi

    def gap(s):
        return abs(abs(m + s) / j - 1.0 / root_pi) * math.exp(-s * s)

    return 0.5 * _pieces(gap, [-m, cross - m, -cross - m])


@dataclass(frozen=True)
class VonMisesLaw:
    mean_dir: float
    kappa: float

    def pdf(self, angle):
        return von_mises_density(angle, self.mean_dir, self.kappa)

    def sample(self, rng: RandomSource, m: int) -> np.ndarray:
        """Angles in ``(-pi, pi]`` by the Best-Fisher accept-reject scheme."""
        k = self.kappa
        if k < 1e-8:
            return _wrap(2 * math.pi * rng.uniform(m) - math.pi)
        tau = 1 + math.sqrt(1 + 4 * k * k)
        rho = (tau - math.sqrt(2 * tau)) / (2 * k)
        r = (1 + rho * rho) / (2 * rho)
        out = np.empty(m)
        have = 0
        while have < m:
            size = max(2 * (m - have), 64)
            u1, u2, u3 = rng.uniform(size), rng.uniform(size), rng.uniform(size)
            z = np.cos(math.pi * u1)
            f = (1 + r * z) / (r + z)
            c = k * (r - f)
            ok = (c * (2 - c) - u2 > 0) | (np.log(c / u2) + 1 - c >= 0)
            ang = np.sign(u3[ok] - 0.5) * np.arccos(np.clip(f[ok], -1, 1))
            take = min(ang.size, m - have)
            out[have:have + take] = ang[:take]
            have += take
        return _wrap(out + self.mean_dir)


def _wrap(angle):
    return np.pi - np.mod(np.pi - angle, 2 * np.pi)


def circle_fiducial(x, radius: float) -> VonMisesLaw:
    """``theta ~ N(x, I)`` conditioned on ``|theta| = R``: von Mises with ``kappa = |x| R``.

    At ``x = 0`` the law is uniform on the circle.
    """
    if not radius > 0:
        raise DomainError("radius must be positive")
    x1, x2 = (float(v) for v in x)
    a = math.hypot(x1, x2)
    return VonMisesLaw(mean_dir=math.atan2(x2, x1) if a > 0 else 0.0, kappa=a * radius)


# --- linear subspace conditioning --------------------------------------------


@dataclass(frozen=True)
class GaussianSubspaceLaw:
    """``N(P x, P)`` on a subspace, with ``P = B B^T`` for an orthonormal basis ``B``.

    In the coordinates ``z = B^T theta`` the law is ``N(B^T x, I)``.
    """

    mean: np.ndarray
    basis: np.ndarray
    coords_mean: np.ndarray

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def coords(self, theta) -> np.ndarray:
        return np.asarray(theta, dtype=float) @ self.basis

    def coord_density(self, z):
        """Density of the subspace coordinates ``z`` (last axis of length ``dim``)."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 0 or z.shape[-1] != self.coords_mean.size:
            z = z[..., None]
        d = z - self.coords_mean
        dim = self.coords_mean.size
        return np.exp(-0.5 * np.sum(d * d, axis=-1)) / (2 * math.pi) ** (dim / 2)

    def sample(self, rng: RandomSource, m: int) -> np.ndarray:
        z = rng.normal((m, self.basis.shape[1]))
        return self.mean + z @ self.basis.T


def projection_conditional_fiducial(x, basis, tol: float = 1e-10) -> GaussianSubspaceLaw:
    """Fiducial of ``theta`` in the span of ``basis`` from ``x = theta + u``, ``u ~ N(0, I)``.

    Conditioning on the projection of ``u`` onto the orthogonal complement
    (the part of ``u`` that is observed exactly) gives ``N(P x, P)``.

    Parameters
    ----------
    x : array of shape (k,)
    basis : array of shape (k, d)
        Orthonormal columns spanning the parameter subspace.
    """
    x = np.asarray(x, dtype=float)
    basis = np.asarray(basis, dtype=float)
    if basis.ndim == 1:
        basis = basis[:, None]
    if basis.ndim != 2 or basis.shape[0] != x.size:
        raise DomainError("basis must have shape (k, d) matching x")
    gram = basis.T @ basis
    if np.max(np.abs(gram - np.eye(basis.shape[1]))) > tol:
        raise NonOrthonormalBasis("basis columns are not orthonormal")
    coords = basis.T @ x
    return GaussianSubspaceLaw(mean=basis @ coords, basis=basis, coords_mean=coords)


# --- epsilon-band oracles ----------------------------------------------------


def band_rejection(x, statistic: Callable, target, eps: float, rng: RandomSource, proposals: int,
                   chunk: int = 1_000_000) -> np.ndarray:
    """Draws of ``theta = x - u`` (``u`` standard normal) with ``|statistic(theta) - target| < eps``.

    ``statistic`` maps an ``(m, k)`` array to ``(m,)`` or ``(m, j)``; for
    vector values the Euclidean norm of the difference is used. The choice of
    statistic is the conditioning coordinate, which matters as ``eps -> 0``.
    """
    x = np.asarray(x, dtype=float)
    kept = []
    done = 0
    while done < proposals:
        size = min(chunk, proposals - done)
        theta = x - rng.normal((size, x.size))
        gap = np.asarray(statistic(theta), dtype=float) - target
        if gap.ndim > 1:
            gap = np.sqrt(np.sum(gap * gap, axis=-1))
        kept.append(theta[np.abs(gap) < eps])
        done += size
    return np.concatenate(kept)


def difference_band(x, eps, rng, proposals):
    """``theta1`` of draws with ``|theta1 - theta2| < eps``."""
    return band_rejection(x, lambda t: t[:, 0] - t[:, 1], 0.0, eps, rng, proposals)[:, 0]


def ratio_band(x, eps, rng, proposals):
    """``theta1`` of draws with ``|theta1 / theta2 - 1| < eps``."""
    return band_rejection(x, lambda t: t[:, 0] / t[:, 1], 1.0, eps, rng, proposals)[:, 0]


def annulus_band(x, radius, eps, rng, proposals):
    """Angles of draws with ``| |theta| - R | < eps``."""
    kept = band_rejection(x, lambda t: np.hypot(t[:, 0], t[:, 1]), radius, eps, rng, proposals)
    return np.arctan2(kept[:, 1], kept[:, 0])


# --- general conditional model ----------------------------------------------


@dataclass(frozen=True)
class ConditionalFiducialModel:
    """A base fiducial model together with a condition ``C(theta) = c``.

    For ``POSITIVE_PROBABILITY_SET`` the conditional fiducial is sampled
    exactly by rejection. The other kinds have probability zero; use
    :meth:`band_sample` (or a closed form) and state the coordinate in
    ``condition``.
    """

    base: FiducialModel
    condition: Callable
    target: object
    kind: ConditionKind = ConditionKind.POSITIVE_PROBABILITY_SET

    def __post_init__(self):
        object.__setattr__(self, "kind", _kind(self.kind))

    def _propose(self, x, rng, size):
        u = self.base.law.sample(rng, size)
        theta = np.asarray(self.base.solve(u, x), dtype=float)
        return theta[np.all(np.isfinite(theta.reshape(size, -1)), axis=1)]

    def _collect(self, x, rng, m, keep, max_proposals):
        kept, have, used, batch = [], 0, 0, max(m, 1024)
        while have < m:
            if used >= max_proposals:
                raise RejectionStall(f"only {have} of {m} draws satisfied the condition "
                                     f"after {used} proposals")
            size = min(batch, max_proposals - used)
            theta = self._propose(x, rng, size)
            theta = theta[keep(theta)]
            used += size
            kept.append(theta)
            have += theta.shape[0]
            rate = max(have / used, 1e-6)
            batch = int(min(1.2 * (m - have) / rate + 64, 10_000_000))
        return np.concatenate(kept)[:m]

    def sample(self, x, rng: RandomSource, m: int, max_proposals: int = 10**8) -> FiducialSample:
        if self.kind is not ConditionKind.POSITIVE_PROBABILITY_SET:
            raise DomainError("condition has probability zero; use band_sample or a closed form")
        c = self.target
        draws = self._collect(x, rng, m, lambda t: np.asarray(self.condition(t)) == c, max_proposals)
        return FiducialSample(draws=draws, model_id=f"{self.base.model_id}|C", observation=x,
                              seed=rng.seed, stream=rng.stream)

    def band_sample(self, x, rng: RandomSource, m: int, eps: float,
                    max_proposals: int = 10**8) -> FiducialSample:
        """Approximate the conditional by keeping draws with ``|C(theta) - c| < eps``."""
        if not eps > 0:
            raise DomainError("eps must be positive")

        def keep(t):
            gap = np.asarray(self.condition(t), dtype=float) - self.target
            if gap.ndim > 1:
                gap = np.sqrt(np.sum(gap * gap, axis=-1))
            return np.abs(gap) < eps

        draws = self._collect(x, rng, m, keep, max_proposals)
        return FiducialSample(draws=draws, model_id=f"{self.base.model_id}|C~", observation=x,
                              seed=rng.seed, stream=rng.stream)
