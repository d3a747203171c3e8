"""Registry of one-parameter sampling families ``F(x | alpha)``.

A family supplies its CDF, optionally its density in ``x`` and the
derivative ``dF/dalpha``, and the parameter range. Missing derivatives are
taken by central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .numerics import gamma_cdf, gamma_pdf, std_normal_cdf, std_normal_pdf


@dataclass(frozen=True)
class Family:
    """A one-parameter family of sampling CDFs.

    Parameters
    ----------
    name : str
        Registry key.
    cdf : callable
        ``cdf(x, alpha)`` for scalar arguments.
    pdf : callable, optional
        ``dF/dx``; central differences in ``x`` are used when absent.
    dcdf_dalpha : callable, optional
        ``dF/dalpha`` in closed form.
    lo, hi : float
        Open parameter range.
    """

    name: str
    cdf: Callable[[float, float], float]
    pdf: Callable[[float, float], float] | None = None
    dcdf_dalpha: Callable[[float, float], float] | None = None
    lo: float = -math.inf
    hi: float = math.inf

    def step(self, alpha: float) -> float:
        """Finite-difference step ``max(1e-5, 1e-5 |alpha|)``, kept inside the range."""
        h = max(1e-5, 1e-5 * abs(alpha))
        if math.isfinite(self.lo):
            h = min(h, 0.5 * (alpha - self.lo))
        if math.isfinite(self.hi):
            h = min(h, 0.5 * (self.hi - alpha))
        return h

    def dalpha(self, x: float, alpha: float) -> float:
        if self.dcdf_dalpha is not None:
            return float(self.dcdf_dalpha(x, alpha))
        h = self.step(alpha)
        return (float(self.cdf(x, alpha + h)) - float(self.cdf(x, alpha - h))) / (2 * h)

    def density(self, x: float, alpha: float) -> float:
        if self.pdf is not None:
            return float(self.pdf(x, alpha))
        h = max(1e-5, 1e-5 * abs(x))
        return (float(self.cdf(x + h, alpha)) - float(self.cdf(x - h, alpha))) / (2 * h)

    def contains(self, alpha: float) -> bool:
        return self.lo < alpha < self.hi


_REGISTRY: dict = {}


def register_family(family: Family, replace: bool = False) -> Family:
    if family.name in _REGISTRY and not replace:
        raise DomainError(f"family {family.name!r} is already registered")
    _REGISTRY[family.name] = family
    return family


def get_family(name) -> Family:
    if isinstance(name, Family):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise DomainError(f"unknown family {name!r}; known: {sorted(_REGISTRY)}") from None


def family_names() -> list:
    return sorted(_REGISTRY)


def _gamma_x(x):
    if x < 0:
        raise DomainError("gamma family needs x >= 0")
    return x


register_family(Family(
    name="location-normal",
    cdf=lambda x, a: float(std_normal_cdf(x - a)),
    pdf=lambda x, a: float(std_normal_pdf(x - a)),
    dcdf_dalpha=lambda x, a: -float(std_normal_pdf(x - a)),
))

register_family(Family(
    name="scale-normal",
    cdf=lambda x, s: float(std_normal_cdf(x / s)),
    pdf=lambda x, s: float(std_normal_pdf(x / s)) / s,
    dcdf_dalpha=lambda x, s: -x / (s * s) * float(std_normal_pdf(x / s)),
    lo=0.0,
))

# gamma with unit scale; no closed form for dF/dalpha
register_family(Family(
    name="gamma-shape",
    cdf=lambda x, a: float(gamma_cdf(_gamma_x(x), a)),
    pdf=lambda x, a: float(gamma_pdf(_gamma_x(x), a)),
    lo=0.0,
))


def scan_grid(family: Family, x) -> np.ndarray:
    """Coarse parameter grid used to locate the mode of a fiducial density."""
    x = np.asarray(x, dtype=float)
    if math.isinf(family.lo) and math.isinf(family.hi):
        spread = float(np.ptp(x)) + 10.0
        return float(np.mean(x)) + np.linspace(-spread, spread, 801)
    if math.isinf(family.hi):
        return family.lo + np.exp(np.linspace(math.log(1e-6), math.log(1e6), 801))
    if math.isinf(family.lo):
        return family.hi - np.exp(np.linspace(math.log(1e-6), math.log(1e6), 801))
    return np.linspace(family.lo, family.hi, 803)[1:-1]
