import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiducial.errors import BracketFailure, DomainError
from fiducial.gamma_shape import (
    GammaShapeModel,
    bartlett_map,
    bartlett_map_rows,
    bartlett_statistic,
    fiducial_alpha,
    solve_alpha,
    solve_alpha_rows,
)
from fiducial.numerics import RandomSource, gamma_inv_cdf


def test_bartlett_statistic_examples():
    assert bartlett_statistic([3.0, 3.0, 3.0]) == 1.0
    assert bartlett_statistic([1.0, 4.0]) == pytest.approx(0.8, abs=1e-15)
    with pytest.raises(DomainError):
        bartlett_statistic([1.0, 0.0])
    with pytest.raises(DomainError):
        bartlett_statistic([2.0])


@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=20), st.floats(1e-6, 1e6))
def test_bartlett_statistic_scale_invariant(y, beta):
    y = np.array(y)
    assert bartlett_statistic(beta * y) == pytest.approx(bartlett_statistic(y), abs=1e-14)


def test_bartlett_map_is_statistic_of_quantiles():
    u = np.array([0.1, 0.4, 0.8, 0.95])
    y = np.array([gamma_inv_cdf(v, 1.7) for v in u])
    assert bartlett_map(u, 1.7) == pytest.approx(bartlett_statistic(y), abs=1e-12)


def test_bartlett_map_increasing_in_alpha():
    rng = RandomSource(1)
    u = rng.uniform((1000, 5))
    grid = np.geomspace(0.05, 100, 20)
    w = np.array([bartlett_map_rows(u, a) for a in grid])
    assert np.all(np.diff(w, axis=0) > 0)
    assert np.all(w[5] < bartlett_map_rows(u, 2 * grid[5]))


def test_bartlett_map_limits_and_errors():
    u = RandomSource(2).uniform(5)
    assert bartlett_map(u, 1e4) > 0.99
    with pytest.raises(DomainError):
        bartlett_map(np.full(4, 0.3), 1.0)
    with pytest.raises(DomainError):
        bartlett_map(np.array([0.2, 1.0]), 1.0)


def test_solve_alpha_round_trip():
    u = RandomSource(3).uniform(6)
    w = bartlett_map(u, 2.5)
    assert solve_alpha(u, w) == pytest.approx(2.5, abs=1e-6)
    assert bartlett_map(u, solve_alpha(u, w)) == pytest.approx(w, abs=1e-9)


def test_solve_alpha_round_trip_many():
    rng = RandomSource(4)
    u = rng.uniform((1000, 5))
    alpha0 = np.exp(rng.uniform(1000) * np.log(250)) * 0.2
    for row, a in zip(u, alpha0):
        w = bartlett_map(row, a)
        assert solve_alpha_rows(row, w)[0] == pytest.approx(a, abs=1e-6, rel=1e-9)


def test_solve_alpha_errors_and_monotone():
    u = RandomSource(5).uniform(5)
    with pytest.raises(DomainError):
        solve_alpha(u, 1.0)
    with pytest.raises(DomainError):
        solve_alpha(u, 0.0)
    assert solve_alpha(u, 0.9) > solve_alpha(u, 0.5)


def test_solve_alpha_bracket_failure_near_one():
    u = np.array([0.5, 0.5 + 1e-15])
    with pytest.raises(BracketFailure):
        solve_alpha(u, 0.5)


def test_python_and_compiled_solvers_agree():
    rng = RandomSource(6)
    u = rng.uniform((50, 4))
    for row in u:
        assert solve_alpha(row, 0.7) == pytest.approx(solve_alpha_rows(row, 0.7)[0], rel=1e-10)


def test_fiducial_alpha_positive_and_scale_free():
    y = GammaShapeModel(5).sample_y(2.0, RandomSource(7), 1)[0]
    a = fiducial_alpha(y, RandomSource(8), 500)
    b = fiducial_alpha(7 * y, RandomSource(8), 500)
    assert np.all(a.draws > 0)
    assert np.array_equal(a.draws, b.draws)


def test_fiducial_depends_on_data_only_through_w():
    y1 = np.array([1.0, 4.0])
    y2 = np.array([4.0, 1.0]) * 3
    assert np.array_equal(fiducial_alpha(y1, RandomSource(9), 200).draws,
                          fiducial_alpha(y2, RandomSource(9), 200).draws)


def test_fiducial_alpha_rejects_constant_data():
    with pytest.raises(DomainError):
        fiducial_alpha(np.ones(4), RandomSource(1), 10)


def test_model_validation():
    with pytest.raises(DomainError):
        GammaShapeModel(1)
    with pytest.raises(DomainError):
        GammaShapeModel(3, beta=0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 50), st.integers(0, 2**32 - 1))
def test_fiducial_model_round_trip(alpha, seed):
    model = GammaShapeModel(4).fiducial_model()
    u = model.law.sample(RandomSource(seed), 3)
    w = model.forward(u, alpha)
    for row, wi in zip(u, w):
        assert model.solve(row, wi)[0] == pytest.approx(alpha, rel=1e-8)


def test_nearly_constant_data_gives_huge_finite_shapes():
    fid = fiducial_alpha(np.array([1.0, 1.00001]), RandomSource(10), 200)
    assert np.all(np.isfinite(fid.draws))
    assert np.median(fid.draws) > 1e9
