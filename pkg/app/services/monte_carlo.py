"""
Sampling oracle for the variance estimator and its confidence interval.

Samples are drawn with PCG64. A Gaussian sample is sigma * Phi^-1(u) for a
uniform u strictly inside (0, 1), evaluated with the same numerics kernel that
integrates the level probabilities, so sampler and analytics share one model.
Coverage trials draw the level histogram directly (multinomial over p_dis),
which has the same law as quantizing m Gaussian samples; per_sample trials
quantize the Gaussian draws instead, so they also exercise discrete_distribution.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Union
import logging
import math

import numpy as np

from app.errors import DataError, DomainError
from app.models import (
    CoverageCheck,
    CoverageReport,
    DiscreteDistribution,
    FiniteSizeConfig,
    QuantizerConfig,
    SourceModel,
    TrialConfig,
)
from app.services import numerics
from app.services.asymptotic_security import worst_case_variance
from app.services.finite_size import b_moments, confidence_half_width, predicted_mean
from app.services.quantized_source import discrete_distribution, quantize

logger = logging.getLogger(__name__)

_UNIFORM_BITS = 52


def make_rng(seed: Union[int, np.random.SeedSequence]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def uniform_open(rng: np.random.Generator, count: int) -> np.ndarray:
    """Midpoints of the 2^-52 grid; k + 0.5 stays exact below 2^52, so 0 and 1 never occur."""
    k = rng.integers(0, 1 << _UNIFORM_BITS, size=count, dtype=np.uint64)
    return (k + 0.5) * 2.0**-_UNIFORM_BITS


def sample_quantized(s: SourceModel, q: QuantizerConfig, count: int, seed: int) -> np.ndarray:
    """count i.i.d. N(0, sigma^2) draws passed through the quantizer."""
    if count < 1:
        raise DomainError("count must be at least 1", {"count": f"got {count}"})
    return draw_quantized(s, q, count, make_rng(seed))


def draw_quantized(s: SourceModel, q: QuantizerConfig, count: int, rng: np.random.Generator) -> np.ndarray:
    samples = s.mean + s.sigma * numerics.normal_quantile(uniform_open(rng, count))
    return quantize(q, samples)


def sample_counts(d: DiscreteDistribution, m: int, rng: np.random.Generator) -> np.ndarray:
    """Histogram over the levels of m draws from d."""
    return rng.multinomial(m, d.probabilities)


def shifted_values(q: QuantizerConfig) -> np.ndarray:
    """Level values moved half a bin away from zero (level 0 moves down)."""
    indices = np.arange(q.i_min, q.i_max + 1, dtype=np.int64)
    return indices * q.delta + np.where(indices >= 1, 0.5 * q.delta, -0.5 * q.delta)


def estimate_variance_from_counts(counts: np.ndarray, q: QuantizerConfig) -> float:
    counts = np.asarray(counts)
    if counts.shape != (q.level_count,):
        raise DataError(
            "Histogram does not match quantizer levels",
            {"counts": f"expected {q.level_count} bins, got {counts.shape}"},
        )
    m = int(counts.sum())
    if m == 0:
        raise DataError("Cannot estimate a variance from no samples", {"counts": "empty"})
    w = shifted_values(q)
    mean = float(np.dot(counts, w)) / m
    return float(np.dot(counts, (w - mean) ** 2)) / m


def estimate_variance(indices: Sequence[int], q: QuantizerConfig) -> float:
    """Edge-shifted sample variance of a list of level indices."""
    arr = np.asarray(indices, dtype=np.int64)
    if arr.size == 0:
        raise DataError("Cannot estimate a variance from no samples", {"indices": "empty"})
    if arr.min() < q.i_min or arr.max() > q.i_max:
        raise DataError(
            "Level index outside quantizer range",
            {"indices": f"allowed [{q.i_min}, {q.i_max}]"},
        )
    counts = np.bincount(arr - q.i_min, minlength=q.level_count)
    return estimate_variance_from_counts(counts, q)


def run_coverage(cfg: TrialConfig) -> CoverageReport:
    """
    Repeat trials of m samples and count how often the estimate falls inside
    [V_bar - dV, V_bar + dV]. Per-trial seeds are spawned from the master seed,
    and moments are summed with fsum, so the report does not depend on workers.
    """
    q = cfg.quantizer
    m = cfg.samples_per_trial
    d = discrete_distribution(cfg.source, q)
    v_bar = worst_case_variance(d, q)
    moments = b_moments(d, q, cfg.boundary_moment_mode)
    finite_cfg = FiniteSizeConfig(
        check_length=m,
        confidence_epsilon=cfg.confidence_epsilon,
        boundary_moment_mode=cfg.boundary_moment_mode,
    )
    delta_v = confidence_half_width(moments, finite_cfg)

    def run_trial(seed_seq: np.random.SeedSequence) -> float:
        rng = make_rng(seed_seq)
        if cfg.per_sample:
            return estimate_variance(draw_quantized(cfg.source, q, m, rng), q)
        return estimate_variance_from_counts(sample_counts(d, m, rng), q)

    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    source_kind = "Gaussian samples" if cfg.per_sample else "level histograms"
    logger.info(f"Running {cfg.trials} coverage trials of m={m} from {source_kind} on {cfg.workers} worker(s)")
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            estimates = list(pool.map(run_trial, seeds))
    else:
        estimates = [run_trial(ss) for ss in seeds]

    vhat = np.asarray(estimates)
    hits = int(np.count_nonzero((vhat >= v_bar - delta_v) & (vhat <= v_bar + delta_v)))
    mean = math.fsum(estimates) / cfg.trials
    if cfg.trials > 1:
        var = math.fsum((v - mean) ** 2 for v in estimates) / (cfg.trials - 1)
    else:
        var = 0.0

    report = CoverageReport(
        trials=cfg.trials,
        hits=hits,
        coverage=hits / cfg.trials,
        empirical_mean_vhat=mean,
        predicted_mean=predicted_mean(moments, q),
        empirical_var_vhat=var,
        predicted_var=moments.sigma_b_sq / m,
    )
    logger.info(f"Coverage {report.coverage:.4f} ({hits}/{cfg.trials}), V_bar={v_bar:.6f}, dV={delta_v:.6g}")
    return report


def coverage_checks(report: CoverageReport, epsilon: float) -> List[CoverageCheck]:
    """Pass/fail checks of a report against the CLT prediction."""
    checks = []

    se = math.sqrt(report.predicted_var / report.trials)
    diff = abs(report.empirical_mean_vhat - report.predicted_mean)
    limit = 5.0 * se if se > 0 else 1e-12
    checks.append(CoverageCheck(
        name="mean",
        passed=diff <= limit,
        detail=f"|mean - predicted| = {diff:.3g}, limit {limit:.3g}",
    ))

    if report.trials > 1 and report.predicted_var > 0:
        ratio = report.empirical_var_vhat / report.predicted_var
        tol = max(0.1, 5.0 * math.sqrt(2.0 / (report.trials - 1)))
        checks.append(CoverageCheck(
            name="variance",
            passed=abs(ratio - 1.0) <= tol,
            detail=f"var ratio = {ratio:.4f}, tolerance {tol:.3g}",
        ))

    target = 1.0 - epsilon
    tol = 3.0 * math.sqrt(epsilon * (1.0 - epsilon) / report.trials) + 0.005
    checks.append(CoverageCheck(
        name="coverage",
        passed=abs(report.coverage - target) <= tol,
        detail=f"coverage = {report.coverage:.4f}, target {target:.4f} +/- {tol:.3g}",
    ))
    return checks
