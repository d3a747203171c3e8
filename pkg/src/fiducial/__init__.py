"""Fiducial inference by solving fiducial equations.

Simple models, their closed-form fiducial CDFs, worked examples (correlation,
gamma shape, digitized and truncated data), conditional fiducials and an
experiment harness for coverage and equivalence audits.
"""

from .core import (
    Direction,
    FiducialModel,
    FiducialSample,
    Interval,
    MonteCarloLaw,
    SamplingCdf,
    fiducial_cdf_monotone,
    fiducial_percentile,
    fisher_density_check,
    location_cdf_inversion_model,
    location_normal_cdf,
    location_normal_model,
    sample_data,
    sample_fiducial,
)
from .errors import DomainError, FiducialError, NumericalFailure
from .numerics import RandomSource

__version__ = "0.1.0"
