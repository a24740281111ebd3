"""
Infinite-data security quantities: entropy, worst-case variance and g(lambda).
"""
import logging
import math

import numpy as np
import pytest
from scipy import stats

from app.errors import DataError, DomainError
from app.models import DiscreteDistribution, QuantizerConfig
from app.services.asymptotic_security import (
    asymptotic_randomness,
    holevo_bound,
    randomness_budget,
    shannon_entropy,
    symplectic_eigenvalue,
    worst_case_variance,
    xlog2x,
)
from app.services.quantized_source import discrete_distribution, quantizer_for_source


def brute_force_worst_case_variance(d, q):
    """Level-by-level oracle with exact summation"""
    levels = d.levels
    a_bar = math.fsum(level.probability * level.value for level in levels)
    terms = []
    for level in levels:
        if level.index == q.i_min:
            w = -q.a_lim
        elif level.index == q.i_max:
            w = q.a_lim
        elif level.index <= 0:
            w = level.index * q.delta - q.delta / 2
        else:
            w = level.index * q.delta + q.delta / 2
        terms.append(level.probability * (w - a_bar) ** 2)
    return math.fsum(terms)


def independent_r_dis(source, q):
    """r_dis from scipy's normal distribution and a direct g(lambda)"""
    edges = (np.arange(q.i_min, q.i_max) + 0.5) * q.delta
    dist = stats.norm(loc=source.mean, scale=source.sigma)
    cdf = np.concatenate(([0.0], dist.cdf(edges), [1.0]))
    sf = np.concatenate(([1.0], dist.sf(edges), [0.0]))
    mid = q.level_count // 2
    p = np.concatenate((np.diff(cdf)[:mid], -np.diff(sf)[mid:]))
    p = p / math.fsum(p)
    d = DiscreteDistribution(delta=q.delta, i_min=q.i_min, probabilities=p)
    h = float(stats.entropy(p, base=2))
    lam = brute_force_worst_case_variance(d, q)
    g = ((lam + 1) / 2) * math.log2((lam + 1) / 2) - ((lam - 1) / 2) * math.log2((lam - 1) / 2)
    return h - g


class TestEntropyHelpers:
    """x log x, Shannon entropy"""

    def test_xlog2x(self):
        assert xlog2x(0.0) == 0.0
        assert xlog2x(1.0) == 0.0
        assert xlog2x(0.5) == -0.5
        assert xlog2x(2.0) == 2.0

    def test_uniform_entropy(self):
        d = DiscreteDistribution(delta=1.0, i_min=-2, probabilities=[0.25, 0.25, 0.0, 0.25, 0.25])
        assert shannon_entropy(d) == pytest.approx(2.0, abs=1e-15)

    def test_point_mass_entropy(self):
        d = DiscreteDistribution(delta=1.0, i_min=-1, probabilities=[0.0, 1.0, 0.0])
        assert shannon_entropy(d) == 0.0

    def test_entropy_requires_normalization(self):
        d = DiscreteDistribution(delta=1.0, i_min=-1, probabilities=[0.1, 0.1, 0.1])
        with pytest.raises(DataError):
            shannon_entropy(d)

    def test_entropy_grows_with_resolution(self, source):
        entropies = [
            shannon_entropy(discrete_distribution(source, quantizer_for_source(source, 3.0, n)))
            for n in (4, 8, 12, 16)
        ]
        assert all(b > a for a, b in zip(entropies, entropies[1:]))
        # roughly one extra bit per extra ADC bit
        assert entropies[-1] - entropies[-2] == pytest.approx(4.0, abs=0.02)


class TestWorstCaseVariance:
    """Edge-shifted variance bound"""

    def test_hand_example(self):
        q = QuantizerConfig(sampling_range=1.0, bits=2, a_lim=2.0)
        d = DiscreteDistribution(delta=q.delta, i_min=-1, probabilities=[0.25, 0.5, 0.25])
        # centre bin moves to -delta/2, boundary bins to -/+ a_lim
        assert worst_case_variance(d, q) == 2.03125

    @pytest.mark.parametrize("bits", [4, 8, 12, 16])
    @pytest.mark.parametrize("range_sigma", [1.0, 3.0, 9.0])
    def test_matches_brute_force(self, source, bits, range_sigma):
        q = quantizer_for_source(source, range_sigma, bits)
        d = discrete_distribution(source, q)
        assert worst_case_variance(d, q) == pytest.approx(brute_force_worst_case_variance(d, q), rel=1e-12)

    @pytest.mark.parametrize("bits", [2, 4, 8, 12, 16])
    @pytest.mark.parametrize("range_sigma", [0.5, 1.0, 3.0, 9.0])
    def test_bounds_level_variance(self, source, bits, range_sigma):
        q = quantizer_for_source(source, range_sigma, bits)
        d = discrete_distribution(source, q)
        p, values = d.probabilities, d.values
        a_bar = float(np.dot(p, values))
        level_variance = float(np.dot(p, values**2)) - a_bar**2
        assert worst_case_variance(d, q) >= level_variance - 1e-12

    def test_exceeds_source_variance(self, source):
        q = quantizer_for_source(source, 3.0, 16)
        v_bar = worst_case_variance(discrete_distribution(source, q), q)
        assert v_bar > source.variance

    def test_misaligned_distribution(self, source, toy_quantizer, quantizer_8bit):
        d = discrete_distribution(source, toy_quantizer)
        with pytest.raises(DataError):
            worst_case_variance(d, quantizer_8bit)


class TestHolevoBound:
    """Symplectic eigenvalue and g(lambda)"""

    def test_vacuum(self):
        assert holevo_bound(1.0) == 0.0

    def test_floor_at_vacuum(self):
        assert symplectic_eigenvalue(0.5, 0.5) == 1.0
        assert symplectic_eigenvalue(4.0, 1.0) == 2.0

    def test_negative_variance_rejected(self):
        with pytest.raises(DomainError):
            symplectic_eigenvalue(-1.0, 1.0)

    def test_below_vacuum_rejected(self):
        with pytest.raises(DomainError):
            holevo_bound(0.99)

    def test_monotone_and_concave(self):
        lam = np.linspace(1.0, 50.0, 500)
        g = np.array([holevo_bound(x) for x in lam])
        assert np.all(np.diff(g) > 0.0)
        assert np.all(np.diff(g, 2) <= 1e-12)

    def test_large_lambda_asymptote(self):
        lam = 1e6
        assert holevo_bound(lam) == pytest.approx(math.log2(math.e * lam / 2.0), abs=1e-6)

    def test_known_value(self):
        # lambda = 3: 2 log2 2 - 1 log2 1
        assert holevo_bound(3.0) == pytest.approx(2.0)

    def test_near_vacuum_value(self):
        # 1.05 log2 1.05 - 0.05 log2 0.05
        assert holevo_bound(1.1) == pytest.approx(0.29000, abs=1e-4)


class TestAsymptoticRandomness:
    """r_dis = H - g(lambda_bar)"""

    def test_summary_consistency(self, source, quantizer_8bit):
        summary = asymptotic_randomness(source, quantizer_8bit)
        assert summary.v_bar_x == summary.v_bar_p
        assert summary.lambda_bar == pytest.approx(summary.v_bar_x)
        assert summary.r_dis_bits == pytest.approx(summary.shannon_bits - summary.holevo_bits, abs=1e-15)
        assert 0.0 < summary.r_dis_bits < summary.shannon_bits

    def test_reference_point_16_bits(self, source):
        q = quantizer_for_source(source, 3.0, 16)
        summary = asymptotic_randomness(source, q)
        assert summary.r_dis_bits == pytest.approx(independent_r_dis(source, q), abs=1e-8)
        assert 14.3 < summary.r_dis_bits < 15.0

    def test_single_peak_16_bits(self, source):
        # a_lim = 10 sigma caps the range just below 10 sigma
        grid = np.round(np.arange(1.0, 9.9501, 0.05), 2)
        rates = np.array([
            asymptotic_randomness(source, quantizer_for_source(source, n, 16)).r_dis_bits for n in grid
        ])
        k = int(np.argmax(rates))
        assert 3.3 <= grid[k] <= 3.7
        steps = np.diff(rates)
        assert np.all(steps[:k] > 0.0)
        assert np.all(steps[k:] < 0.0)

    def test_small_a_lim_logs_warning(self, source, caplog):
        q = quantizer_for_source(source, 3.0, 8, alim_sigma=4.0)
        with caplog.at_level(logging.WARNING):
            asymptotic_randomness(source, q)
        assert "beyond a_lim" in caplog.text

    def test_default_a_lim_is_quiet(self, source, quantizer_8bit, caplog):
        with caplog.at_level(logging.WARNING):
            asymptotic_randomness(source, quantizer_8bit)
        assert "beyond a_lim" not in caplog.text


class TestRandomnessBudget:
    """Protocol-level extractable bits"""

    def test_budget(self):
        assert randomness_budget(1000, 100, 10, 0.5) == 440.0

    def test_budget_floored_at_zero(self):
        assert randomness_budget(1000, 100, 10_000, 0.5) == 0.0

    def test_check_exceeds_total(self):
        with pytest.raises(DomainError):
            randomness_budget(100, 1000, 0, 0.5)

    def test_negative_seed(self):
        with pytest.raises(DomainError):
            randomness_budget(100, 10, -1, 0.5)
