from .quadrature import integrate_peaked, quadrature
from .random import RandomSource, sample_chi2, sample_gamma, sample_std_normal, sample_uniform
from .roots import Bracket, brent_kernel, brent_start, brent_step, solve_monotone
from .special import (
    bessel_i0e,
    gamma_cdf,
    gamma_inv_cdf,
    gamma_log_inv_cdf,
    gamma_pdf,
    gamma_sf,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_ppf,
    von_mises_density,
)
from .stats import dkw_bound, empirical_cdf, ks_critical_value, ks_distance, percentile

__all__ = [
    "Bracket",
    "brent_kernel",
    "brent_start",
    "brent_step",
    "RandomSource",
    "bessel_i0e",
    "dkw_bound",
    "empirical_cdf",
    "gamma_cdf",
    "gamma_inv_cdf",
    "gamma_log_inv_cdf",
    "gamma_pdf",
    "gamma_sf",
    "integrate_peaked",
    "ks_critical_value",
    "ks_distance",
    "percentile",
    "quadrature",
    "sample_chi2",
    "sample_gamma",
    "sample_std_normal",
    "sample_uniform",
    "solve_monotone",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_ppf",
    "von_mises_density",
]
