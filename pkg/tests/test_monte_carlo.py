"""
Sampling oracle for the variance estimator and its confidence interval.
"""
import numpy as np
import pytest

from app.errors import DataError, DomainError
from app.models import BoundaryMomentMode, CoverageReport, MonteCarloParams, TrialConfig
from app.services.monte_carlo import (
    coverage_checks,
    estimate_variance,
    estimate_variance_from_counts,
    make_rng,
    run_coverage,
    sample_counts,
    sample_quantized,
    shifted_values,
    uniform_open,
)
from app.services.quantized_source import discrete_distribution, quantizer_for_source


@pytest.fixture
def small_trial_config():
    return MonteCarloParams(
        bits=8, range_sigma=5.0, check_length=10**4, confidence_epsilon=0.2, trials=200, seed=7
    ).trial_config()


class TestSampling:
    """Seeded PCG64 sampling"""

    def test_uniform_open_interval(self):
        u = uniform_open(make_rng(1), 100_000)
        assert u.min() > 0.0
        assert u.max() < 1.0

    def test_uniform_open_extreme_draws(self):
        class ExtremeDraws:
            def integers(self, low, high, size, dtype):
                return np.array([low, high - 1], dtype=dtype)

        u = uniform_open(ExtremeDraws(), 2)
        assert 0.0 < u[0] < u[1] < 1.0
        np.testing.assert_array_equal(u * 2.0**52 - 0.5, [0.0, 2.0**52 - 1.0])

    def test_same_seed_same_samples(self, source, quantizer_8bit):
        a = sample_quantized(source, quantizer_8bit, 1000, seed=42)
        b = sample_quantized(source, quantizer_8bit, 1000, seed=42)
        np.testing.assert_array_equal(a, b)

    def test_different_seed_different_samples(self, source, quantizer_8bit):
        a = sample_quantized(source, quantizer_8bit, 1000, seed=42)
        b = sample_quantized(source, quantizer_8bit, 1000, seed=43)
        assert not np.array_equal(a, b)

    def test_samples_inside_level_range(self, source, quantizer_8bit):
        idx = sample_quantized(source, quantizer_8bit, 10_000, seed=3)
        assert idx.min() >= quantizer_8bit.i_min
        assert idx.max() <= quantizer_8bit.i_max

    def test_count_must_be_positive(self, source, quantizer_8bit):
        with pytest.raises(DomainError):
            sample_quantized(source, quantizer_8bit, 0, seed=1)

    def test_histogram_matches_level_distribution(self, source):
        q = quantizer_for_source(source, 3.0, 4)
        d = discrete_distribution(source, q)
        m = 10**6
        idx = sample_quantized(source, q, m, seed=2024)
        counts = np.bincount(idx - q.i_min, minlength=q.level_count)
        expected = m * d.probabilities
        sd = np.sqrt(expected * (1.0 - d.probabilities))
        assert np.all(np.abs(counts - expected) <= 5.0 * sd + 1.0)

    def test_sample_counts_total(self, source, quantizer_8bit):
        d = discrete_distribution(source, quantizer_8bit)
        counts = sample_counts(d, 12_345, make_rng(5))
        assert counts.sum() == 12_345
        assert counts.shape == (quantizer_8bit.level_count,)


class TestVarianceEstimator:
    """Edge-shifted sample variance"""

    def test_shifted_values(self, toy_quantizer):
        np.testing.assert_array_equal(
            shifted_values(toy_quantizer),
            [-0.875, -0.625, -0.375, -0.125, 0.375, 0.625, 0.875],
        )

    def test_constant_samples(self, toy_quantizer):
        assert estimate_variance([0, 0, 0], toy_quantizer) == 0.0

    def test_symmetric_pair(self, toy_quantizer):
        assert estimate_variance([-1, 1], toy_quantizer) == 0.140625

    def test_matches_numpy_variance(self, source, quantizer_8bit):
        idx = sample_quantized(source, quantizer_8bit, 5000, seed=11)
        w = shifted_values(quantizer_8bit)[idx - quantizer_8bit.i_min]
        assert estimate_variance(idx, quantizer_8bit) == pytest.approx(np.var(w), rel=1e-12)

    def test_counts_and_indices_agree(self, toy_quantizer):
        counts = np.array([0, 1, 0, 2, 0, 0, 1])
        indices = [-2, 0, 0, 3]
        assert estimate_variance_from_counts(counts, toy_quantizer) == pytest.approx(
            estimate_variance(indices, toy_quantizer), rel=1e-15
        )

    def test_empty_input(self, toy_quantizer):
        with pytest.raises(DataError):
            estimate_variance([], toy_quantizer)
        with pytest.raises(DataError):
            estimate_variance_from_counts(np.zeros(7, dtype=int), toy_quantizer)

    def test_out_of_range_index(self, toy_quantizer):
        with pytest.raises(DataError):
            estimate_variance([0, 4], toy_quantizer)

    def test_wrong_histogram_length(self, toy_quantizer):
        with pytest.raises(DataError):
            estimate_variance_from_counts(np.ones(5), toy_quantizer)


class TestCoverageRun:
    """Coverage trials and their embedded checks"""

    def test_deterministic(self, small_trial_config):
        assert run_coverage(small_trial_config) == run_coverage(small_trial_config)

    def test_independent_of_workers(self, small_trial_config):
        threaded = small_trial_config.model_copy(update={"workers": 4})
        assert run_coverage(threaded) == run_coverage(small_trial_config)

    def test_seed_changes_result(self, small_trial_config):
        other = small_trial_config.model_copy(update={"seed": 8})
        assert run_coverage(other).empirical_mean_vhat != run_coverage(small_trial_config).empirical_mean_vhat

    def test_predicted_variance_scales_with_m(self, small_trial_config):
        base = small_trial_config.model_copy(update={"trials": 2})
        quadruple = base.model_copy(update={"samples_per_trial": 4 * 10**4})
        ratio = run_coverage(base).predicted_var / run_coverage(quadruple).predicted_var
        assert ratio == pytest.approx(4.0, rel=1e-12)

    def test_moderate_epsilon_coverage(self):
        cfg = MonteCarloParams(
            bits=10, range_sigma=5.0, check_length=10**4, confidence_epsilon=0.2, trials=2000, seed=99
        ).trial_config()
        report = run_coverage(cfg)
        checks = coverage_checks(report, cfg.confidence_epsilon)
        assert all(check.passed for check in checks), checks
        assert [check.name for check in checks] == ["mean", "variance", "coverage"]

    def test_empirical_variance_halves_when_m_doubles(self):
        variances = []
        for m in (10**4, 2 * 10**4, 4 * 10**4):
            cfg = MonteCarloParams(
                bits=8, range_sigma=5.0, check_length=m, confidence_epsilon=0.1, trials=4000, seed=17
            ).trial_config()
            variances.append(run_coverage(cfg).empirical_var_vhat)
        for larger, smaller in zip(variances, variances[1:]):
            assert larger / smaller == pytest.approx(2.0, rel=0.15)

    @pytest.mark.parametrize("epsilon", [0.5, 0.1, 0.05])
    def test_coverage_at_moderate_epsilon(self, epsilon):
        cfg = MonteCarloParams(
            bits=8, range_sigma=5.0, check_length=10**4, confidence_epsilon=epsilon, trials=2000, seed=99
        ).trial_config()
        report = run_coverage(cfg)
        checks = coverage_checks(report, epsilon)
        assert all(check.passed for check in checks), checks

    def test_gaussian_samples_path(self):
        params = dict(bits=8, range_sigma=5.0, check_length=2000, confidence_epsilon=0.2, trials=300, seed=5)
        per_sample = MonteCarloParams(**params, per_sample=True).trial_config()
        histogram = MonteCarloParams(**params).trial_config()
        report = run_coverage(per_sample)
        assert all(check.passed for check in coverage_checks(report, 0.2)), report
        assert report == run_coverage(per_sample)
        assert report.predicted_mean == run_coverage(histogram).predicted_mean
        assert report.empirical_mean_vhat != run_coverage(histogram).empirical_mean_vhat

    def test_failing_coverage_is_reported(self):
        report = CoverageReport(
            trials=100, hits=50, coverage=0.5, empirical_mean_vhat=1.0,
            predicted_mean=1.0, empirical_var_vhat=1e-4, predicted_var=1e-4,
        )
        checks = {check.name: check for check in coverage_checks(report, 0.05)}
        assert not checks["coverage"].passed
        assert checks["mean"].passed
        assert checks["variance"].passed

    def test_trial_count_must_be_positive(self, source, quantizer_8bit):
        with pytest.raises(ValueError):
            TrialConfig(
                trials=0, samples_per_trial=10, source=source, quantizer=quantizer_8bit, confidence_epsilon=0.05
            )

    @pytest.mark.slow
    def test_estimator_acceptance(self):
        cfg = MonteCarloParams(
            bits=16, range_sigma=10.0, alim_sigma=10.5, check_length=10**5,
            confidence_epsilon=0.05, trials=10**4, seed=2024, workers=4,
            boundary_moment_mode=BoundaryMomentMode.LEVEL_VALUE,
        ).trial_config()
        report = run_coverage(cfg)
        se = np.sqrt(report.predicted_var / report.trials)
        assert abs(report.empirical_mean_vhat - report.predicted_mean) <= 5.0 * se
        assert report.empirical_var_vhat == pytest.approx(report.predicted_var, rel=0.1)
        assert 0.94 <= report.coverage <= 0.96
        assert all(check.passed for check in coverage_checks(report, 0.05))
