import math

import numpy as np
import pytest
from scipy import stats

from fiducial.conditional import (
    ConditionalFiducialModel,
    ConditionKind,
    band_rejection,
    circle_fiducial,
    difference_band,
    gt_density,
    gt_law,
    hannig_density,
    hannig_law,
    hannig_prior,
    likelihood,
    line_difference_density,
    line_fiducial_difference,
    line_fiducial_ratio_density,
    line_ratio_normalizer,
    line_ratio_sample,
    line_tv_distance,
    projection_conditional_fiducial,
    ratio_band,
)
from fiducial.core import location_normal_model
from fiducial.errors import (
    AllRejected,
    DomainError,
    NonFiniteNormalization,
    NonOrthonormalBasis,
    RejectionStall,
    ZeroDensity,
)
from fiducial.families import Family, family_names, get_family, register_family
from fiducial.mcmc import grid_sample, mcmc_sample, pilot_proposal_sd
from fiducial.numerics import RandomSource, ks_distance, quadrature, std_normal_pdf


def _kde(sample, grid, bw):
    return np.array([np.mean(std_normal_pdf((g - sample) / bw)) / bw for g in grid])


# --- families ----------------------------------------------------------------

def test_builtin_families_registered():
    assert {"location-normal", "scale-normal", "gamma-shape"} <= set(family_names())
    with pytest.raises(DomainError):
        get_family("nope")
    with pytest.raises(DomainError):
        register_family(get_family("location-normal"))


def test_finite_difference_derivative_matches_closed_form():
    fam = get_family("scale-normal")
    numeric = Family("scale-fd", cdf=fam.cdf, lo=0.0)
    for s in (0.3, 1.0, 4.0):
        assert numeric.dalpha(1.3, s) == pytest.approx(fam.dalpha(1.3, s), rel=1e-7)
    assert numeric.density(1.3, 2.0) == pytest.approx(fam.density(1.3, 2.0), rel=1e-8)


def test_step_stays_inside_range():
    fam = get_family("gamma-shape")
    assert fam.step(1e-8) <= 0.5e-8
    assert fam.step(10.0) == pytest.approx(1e-4)


# --- line and circle ---------------------------------------------------------

def test_line_difference_examples():
    assert line_fiducial_difference(0, 0) == (0.0, 0.5)
    assert line_fiducial_difference(1, 3)[0] == 2.0


def test_line_difference_matches_band_oracle():
    kept = difference_band((0.4, 1.2), 0.01, RandomSource(1), 10**7)
    grid = np.linspace(-1.5, 3.0, 46)
    kde = _kde(kept, grid, 0.06)
    assert np.max(np.abs(kde - line_difference_density(grid, 0.4, 1.2))) <= 0.02


def test_line_ratio_density():
    assert line_fiducial_ratio_density(0.0, 1.0, 1.0) == 0.0
    grid = np.linspace(-12, 14, 260_001)
    total = np.trapezoid(line_fiducial_ratio_density(grid, 1.0, 1.0), grid)
    assert total == pytest.approx(1.0, abs=1e-7)


def test_line_ratio_matches_band_oracle():
    kept = ratio_band((1.0, 1.0), 0.01, RandomSource(2), 4 * 10**6)
    grid = np.linspace(-1.0, 3.0, 41)
    kde = _kde(kept, grid, 0.08)
    assert np.max(np.abs(kde - line_fiducial_ratio_density(grid, 1.0, 1.0))) <= 0.04


def test_borel_paradox_tv():
    assert line_tv_distance(1.0, 1.0) > 0.05


@pytest.mark.parametrize("x1,x2", [(1.0, 1.0), (0.0, 0.0), (-2.0, 0.5), (3.0, 40.0)])
def test_line_ratio_normalizer_closed_form(x1, x2):
    m = 0.5 * (x1 + x2)
    mass = math.exp(-m * m) + math.sqrt(math.pi) * m * math.erf(m)
    exact = mass * math.exp(-0.25 * (x1 - x2) ** 2) / (2 * math.pi)
    assert line_ratio_normalizer(x1, x2) == pytest.approx(exact, rel=1e-11)


def test_line_tv_far_from_origin():
    # for |m| large the ratio law is N(m, 1/2) tilted by |mu| / m: TV -> 1 / (2 sqrt(pi) m)
    assert line_tv_distance(30.0, 30.0) == pytest.approx(1 / (2 * math.sqrt(math.pi) * 30), rel=1e-6)
    assert 0 < line_tv_distance(40.0, -40.0) < 1
    assert line_tv_distance(1e200, 1e200) < 1e-12


def test_line_ratio_sample_mean():
    draws = line_ratio_sample(1.0, 1.0, RandomSource(20), 200_000)
    grid = np.linspace(-12, 14, 260_001)
    mean = np.trapezoid(grid * line_fiducial_ratio_density(grid, 1.0, 1.0), grid)
    assert draws.mean() == pytest.approx(mean, abs=4 * draws.std() / math.sqrt(draws.size))


def test_line_ratio_sample_unrepresentable_offset():
    with pytest.raises(NonFiniteNormalization):
        line_ratio_sample(1e200, 1e200, RandomSource(1), 10)
    with pytest.raises(DomainError):
        line_tv_distance(math.nan, 1.0)


def test_circle_fiducial_parameters():
    law = circle_fiducial((2.0, 0.0), 1.5)
    assert law.mean_dir == 0.0 and law.kappa == 3.0
    flat = circle_fiducial((0.0, 0.0), 1.0)
    assert flat.kappa == 0.0
    assert flat.pdf(1.0) == pytest.approx(1 / (2 * math.pi))
    with pytest.raises(DomainError):
        circle_fiducial((1.0, 0.0), 0.0)


def test_von_mises_sampler_matches_density():
    law = circle_fiducial((1.0, 2.0), 1.3)
    draws = law.sample(RandomSource(3), 200_000)
    assert np.all((draws > -math.pi) & (draws <= math.pi))
    ref = stats.vonmises(law.kappa, loc=law.mean_dir)
    assert stats.kstest(draws, ref.cdf).statistic < 0.005


# --- gt and Hannig densities -------------------------------------------------

def test_gt_n1_reduces_to_fisher_location():
    grid = np.linspace(-3, 4, 100)
    for kind in ("ratio", "difference"):
        dens = gt_density(grid, [0.5], "location-normal", kind)
        assert np.max(np.abs(dens - std_normal_pdf(0.5 - grid))) < 1e-5


def test_gt_location_difference_is_normal():
    x = np.array([0.2, -0.7, 1.4, 0.9])
    grid = np.linspace(-1.5, 2.5, 60)
    dens = gt_density(grid, x, "location-normal", "difference")
    assert np.max(np.abs(dens - stats.norm.pdf(grid, x.mean(), 1 / 2))) < 1e-6


def test_gt_scale_ratio_is_right_haar_posterior():
    x = np.array([1.0, 2.0])
    law = gt_law(x, "scale-normal", "ratio")
    haar = lambda s: s ** -3 * np.prod(std_normal_pdf(x / s)) if s > 0 else 0.0  # noqa: E731
    z = quadrature(haar, 0.0, math.inf, tol=1e-12)
    grid = np.linspace(0.3, 8, 40)
    assert np.max(np.abs(law(grid) - np.array([haar(s) for s in grid]) / z)) < 1e-8
    assert quadrature(law.pdf, 0.0, math.inf) == pytest.approx(1.0, abs=1e-8)


def test_gt_scale_ratio_matches_band_oracle():
    # per-coordinate sigma fiducials sigma_i = x_i / |z_i|, banded on their ratio
    x = np.array([1.0, 2.0])
    rng = RandomSource(4)
    z = np.abs(rng.normal((4 * 10**6, 2)))
    sig = x / z
    keep = np.abs(sig[:, 1] / sig[:, 0] - 1) < 0.01
    kept = sig[keep, 0]
    law = gt_law(x, "scale-normal", "ratio")
    grid = np.linspace(0.5, 4, 36)
    assert np.max(np.abs(_kde(kept, grid, 0.06) - law(grid))) < 0.04


def test_gt_rejects_other_kinds():
    with pytest.raises(DomainError):
        gt_law([1.0], "location-normal", ConditionKind.PROJECTION)
    with pytest.raises(DomainError):
        gt_law([1.0], "location-normal", "sideways")


def test_hannig_location_equals_normal():
    x = np.array([0.3, 1.1, -0.4])
    grid = np.linspace(-2, 2.5, 80)
    dens = hannig_density(grid, x, "location-normal")
    assert np.max(np.abs(dens - stats.norm.pdf(grid, x.mean(), 1 / math.sqrt(3)))) < 1e-5
    assert quadrature(hannig_law(x, "location-normal").pdf, -math.inf, math.inf) == \
        pytest.approx(1.0, abs=1e-8)


def test_hannig_n1_equals_gt():
    grid = np.linspace(0.05, 9, 100)
    a = gt_density(grid, [2.0], "gamma-shape")
    b = hannig_density(grid, [2.0], "gamma-shape")
    assert np.max(np.abs(a - b)) < 1e-6
    assert np.all(b >= 0)


def test_hannig_prior():
    x = np.array([0.3, 1.1, -0.4])
    assert np.allclose(hannig_prior(np.linspace(-2, 2, 9), x, "location-normal"), 3.0)
    fam = get_family("gamma-shape")
    assert hannig_prior(1.5, [0.8], fam) == pytest.approx(abs(fam.dalpha(0.8, 1.5)) / fam.density(0.8, 1.5))
    with pytest.raises(ZeroDensity):
        hannig_prior(2.0, [0.0], "gamma-shape")


def test_hannig_factorizes_as_prior_times_likelihood():
    x = np.array([0.7, 2.2, 1.4])
    grid = np.linspace(0.3, 6, 50)
    dens = hannig_density(grid, x, "gamma-shape")
    ratio = dens / (hannig_prior(grid, x, "gamma-shape") * likelihood(grid, x, "gamma-shape"))
    assert np.max(np.abs(ratio / ratio[0] - 1)) < 1e-6


def test_nonfinite_normalization():
    # |dF/dalpha| constant on a half-line: the kernel has no finite integral
    flat = register_family(Family("flat-test", cdf=lambda x, a: math.exp(-a),
                                  dcdf_dalpha=lambda x, a: -1.0, lo=0.0), replace=True)
    with pytest.raises(NonFiniteNormalization):
        gt_law([1.0], flat)


# --- projection --------------------------------------------------------------

def test_projection_reduces_to_line_difference():
    law = projection_conditional_fiducial([1.0, 3.0], np.array([1.0, 1.0]) / math.sqrt(2))
    assert np.allclose(law.mean, [2.0, 2.0])
    draws = law.sample(RandomSource(5), 200_000)
    assert np.allclose(draws[:, 0], draws[:, 1])
    assert draws[:, 0].var() == pytest.approx(0.5, rel=0.02)


def test_projection_full_space_is_unconditioned():
    x = np.array([0.5, -1.0, 2.0])
    law = projection_conditional_fiducial(x, np.eye(3))
    assert np.allclose(law.mean, x)
    assert np.allclose(law.projector, np.eye(3))


def test_projection_matches_band_oracle():
    b = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    x = np.array([0.5, -1.0, 2.0])
    law = projection_conditional_fiducial(x, b)
    kept = band_rejection(x, lambda t: t - np.outer(t @ b, b), 0.0, 0.3, RandomSource(6), 10**7)
    z = kept @ b
    grid = np.linspace(-1.5, 3.0, 31)
    assert np.max(np.abs(_kde(z, grid, 0.08) - law.coord_density(grid))) <= 0.03


def test_projection_mean_linear_and_idempotent():
    basis = np.linalg.qr(RandomSource(7).normal((4, 2)))[0]
    x, y = RandomSource(8).normal(4), RandomSource(9).normal(4)
    m = lambda v: projection_conditional_fiducial(v, basis).mean  # noqa: E731
    assert np.allclose(m(2 * x + y), 2 * m(x) + m(y))
    assert np.allclose(m(m(x)), m(x))


def test_projection_rejects_bad_basis():
    with pytest.raises(NonOrthonormalBasis):
        projection_conditional_fiducial([1.0, 2.0], np.array([[1.0], [1.0]]))


# --- conditional model -------------------------------------------------------

def test_positive_probability_condition():
    base = location_normal_model()
    cond = ConditionalFiducialModel(base, lambda t: t > 0, True)
    draws = cond.sample(0.0, RandomSource(10), 10_000).draws
    assert np.all(draws > 0)
    assert draws.mean() == pytest.approx(math.sqrt(2 / math.pi), abs=0.03)


def test_conditional_stall_and_kind_errors():
    base = location_normal_model()
    never = ConditionalFiducialModel(base, lambda t: t > 100, True)
    with pytest.raises(RejectionStall):
        never.sample(0.0, RandomSource(11), 10, max_proposals=10_000)
    zero = ConditionalFiducialModel(base, lambda t: t, 0.0, kind="difference")
    with pytest.raises(DomainError):
        zero.sample(0.0, RandomSource(12), 10)
    near = zero.band_sample(0.0, RandomSource(12), 100, eps=0.01).draws
    assert np.all(np.abs(near) < 0.01)


# --- MCMC --------------------------------------------------------------------

def test_mcmc_standard_normal():
    chain = mcmc_sample(lambda t: -0.5 * t * t, 0.0, 10**5, RandomSource(13), proposal_sd=2.4)
    assert chain.mean() == pytest.approx(0, abs=0.02)
    assert chain.var() == pytest.approx(1, abs=0.05)


def test_mcmc_proposal_from_pilot_grid():
    sd = pilot_proposal_sd(lambda t: -0.5 * (t / 3) ** 2, -30, 30)
    assert sd == pytest.approx(2.4 * 3, rel=1e-3)
    with pytest.raises(DomainError):
        mcmc_sample(lambda t: 0.0, 0.0, 10, RandomSource(1))


def test_mcmc_all_rejected():
    with pytest.raises(AllRejected):
        mcmc_sample(lambda t: -1e6 * t * t, 0.0, 5000, RandomSource(14), burn_in=0, proposal_sd=10.0)


def test_mcmc_thinning_and_acceptance():
    chain, rate = mcmc_sample(lambda t: -0.5 * t * t, 0.0, 1000, RandomSource(15), burn_in=10,
                              proposal_sd=1.0, thin=10, return_acceptance=True)
    assert chain.size == 100
    assert 0.3 < rate < 0.9


def test_mcmc_gt_gamma_shape_against_grid():
    law = gt_law([0.8, 2.5, 1.7], "gamma-shape")
    chain = mcmc_sample(law.logpdf, 2.0, 30_000, RandomSource(16), burn_in=3000,
                        pilot_range=(1e-3, 30.0), thin=3)
    ref = grid_sample(law.pdf, 1e-6, 40.0, RandomSource(17), 20_000)
    assert ks_distance(chain, ref) < 0.03
