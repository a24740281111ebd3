"""
Statistical-fluctuation correction for a finite number m of check samples.

The variance estimator is averaged over b = v^2 + delta*|v| per sample, so by the
central limit theorem it is Gaussian with variance sigma_b^2 / m. The confidence
half-width Z_{eps/2} * sqrt(sigma_b^2 / m) is added to the worst-case variance
before it enters g(lambda).
"""
import logging
import math

import numpy as np

from app.errors import DomainError
from app.models import (
    CLT_WARNING,
    BMoments,
    BoundaryMomentMode,
    DiscreteDistribution,
    FiniteSizeConfig,
    FiniteSizeResult,
    QuantizerConfig,
    SourceModel,
)
from app.services import numerics
from app.services.asymptotic_security import (
    holevo_bound,
    shannon_entropy,
    symplectic_eigenvalue,
    worst_case_variance,
)
from app.services.quantized_source import check_alignment, check_normalized, discrete_distribution

logger = logging.getLogger(__name__)


def moment_values(d: DiscreteDistribution, q: QuantizerConfig, mode: BoundaryMomentMode) -> np.ndarray:
    """Per-level value v(i); in clamp mode the boundary levels sit at -a_lim / +a_lim."""
    values = d.values.copy()
    if BoundaryMomentMode(mode) == BoundaryMomentMode.CLAMP_TO_ALIM:
        values[0] = -q.a_lim
        values[-1] = q.a_lim
    return values


def b_moments(
    d: DiscreteDistribution,
    q: QuantizerConfig,
    mode: BoundaryMomentMode = BoundaryMomentMode.CLAMP_TO_ALIM,
) -> BMoments:
    check_alignment(d, q)
    check_normalized(d)
    p = d.probabilities
    v = moment_values(d, q, mode)
    b = v * v + q.delta * np.abs(v)

    mu_a = float(np.dot(p, v))
    mu_b = float(np.dot(p, b))
    sigma_b_sq = float(np.dot(p, b * b)) - mu_b * mu_b
    return BMoments(mu_a=mu_a, mu_b=mu_b, sigma_b_sq=max(sigma_b_sq, 0.0))


def predicted_mean(moments: BMoments, q: QuantizerConfig) -> float:
    """Expected value of the variance estimator: mu_b - mu_a^2 + delta^2 / 4"""
    return moments.mu_b - moments.mu_a**2 + 0.25 * q.delta**2


def confidence_half_width(moments: BMoments, cfg: FiniteSizeConfig) -> float:
    z = numerics.z_two_sided(cfg.confidence_epsilon)
    return z * math.sqrt(moments.sigma_b_sq / cfg.check_length)


def variance_upper_bound(v_bar: float, delta_v: float) -> float:
    if delta_v < 0:
        raise DomainError("Half-width must be non-negative", {"delta_v": f"got {delta_v}"})
    return v_bar + delta_v


def lambda_max(v_x_max: float, v_p_max: float) -> float:
    """Upper bound on lambda from the per-quadrature variance bounds, floored at 1."""
    return symplectic_eigenvalue(v_x_max, v_p_max)


def finite_size_randomness(s: SourceModel, q: QuantizerConfig, cfg: FiniteSizeConfig) -> FiniteSizeResult:
    d = discrete_distribution(s, q)
    shannon = shannon_entropy(d)
    v_bar = worst_case_variance(d, q)
    moments = b_moments(d, q, cfg.boundary_moment_mode)

    delta_v = confidence_half_width(moments, cfg)
    # X and P share the same bound
    v_max = variance_upper_bound(v_bar, delta_v)
    lam_max = lambda_max(v_max, v_max)
    holevo = holevo_bound(lam_max)

    warning = None
    if cfg.clt_warning:
        warning = CLT_WARNING
        logger.warning(f"check_length={cfg.check_length}: {CLT_WARNING}")

    return FiniteSizeResult(
        moments=moments,
        delta_v=delta_v,
        v_max=v_max,
        lambda_max=lam_max,
        holevo_finite_bits=holevo,
        r_finite_bits=shannon - holevo,
        warning=warning,
    )
