import numpy as np
import pytest

from fiducial.core import location_cdf_inversion_model, location_normal_model
from fiducial.correlation import CorrelationModel
from fiducial.discrete import TruncatedMeanModel
from fiducial.errors import DomainError
from fiducial.harness import (
    CoverageReport,
    coverage_experiment,
    equivalence_experiment,
    ks_threshold,
    truncated_b_coverage,
    within_tolerance,
    worker_count,
)
from fiducial.numerics import RandomSource


def test_location_coverage():
    report = coverage_experiment(location_normal_model(), 0.0, [0.05, 0.5], 10**4, 10**3, RandomSource(1))
    assert report.coverages[0] == pytest.approx(0.95, abs=0.01)
    assert report.coverages[1] == pytest.approx(0.5, abs=0.015)
    assert np.all((report.coverages >= 0) & (report.coverages <= 1))


def test_coverage_preconditions():
    with pytest.raises(DomainError):
        coverage_experiment(location_normal_model(), 0.0, [0.05], 0, 100, RandomSource(1))
    with pytest.raises(DomainError):
        coverage_experiment(location_normal_model(), 0.0, [1.5], 100, 100, RandomSource(1))


def test_correlation_coverage_small():
    model = CorrelationModel(10).fiducial_model()
    report = coverage_experiment(model, 0.4, [0.1, 0.5], 1000, 300, RandomSource(2))
    assert within_tolerance(report, 3 * report.binomial_sd() + 0.01)


def test_coverage_same_for_any_worker_count():
    model = location_normal_model()
    one = coverage_experiment(model, 0.3, [0.1, 0.5], 200, 100, RandomSource(3), workers=1)
    four = coverage_experiment(model, 0.3, [0.1, 0.5], 200, 100, RandomSource(3), workers=4)
    assert np.array_equal(one.coverages, four.coverages)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("FID_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FID_THREADS", "zero")
    with pytest.raises(DomainError):
        worker_count()
    monkeypatch.delenv("FID_THREADS")
    assert worker_count() == 1


def test_truncated_b_coverage_at_least_nominal():
    model = TruncatedMeanModel(sigma=1.0, n=4, mu_max=1.0)
    levels = [0.05, 0.2, 0.5]
    report = truncated_b_coverage(model, 0.6, levels, 4000, RandomSource(4))
    assert np.all(report.coverages >= 1 - report.levels - 3 * report.binomial_sd())
    assert report.draws_per_rep == 0


def test_equivalence_same_seed_is_zero():
    model = location_normal_model()
    res = equivalence_experiment(model, model, 0.0, 1000, RandomSource(5), RandomSource(5))
    assert res.distance == 0.0 and res.passed


def test_equivalence_location_vs_inversion():
    res = equivalence_experiment(location_normal_model(), location_cdf_inversion_model(), 0.0, 10**5,
                                 RandomSource(6))
    assert res.threshold == pytest.approx(ks_threshold(10**5))
    assert res.threshold == pytest.approx(0.00728, abs=1e-5)
    assert res.distance < 0.0073


def test_report_json_keys():
    report = CoverageReport("m", 0.0, np.array([0.05]), np.array([0.95]), 100, 10, seed=1)
    assert list(report.to_json_dict()) == ["model", "seed", "levels", "coverages", "reps",
                                           "draws_per_rep", "elapsed_ms"]
