"""
Infinite-data security quantities: Shannon entropy of the ADC output, the
edge-shifted worst-case variance, the symplectic eigenvalue, the Gaussian
von Neumann entropy g(lambda) and the resulting extractable randomness.
"""
import logging
import math

import numpy as np

from app.errors import DomainError
from app.models import DiscreteDistribution, QuantizerConfig, SecuritySummary, SourceModel
from app.services.quantized_source import (
    check_alignment,
    check_normalized,
    discrete_distribution,
    tail_probability,
)

logger = logging.getLogger(__name__)

# mass beyond a_lim above which the clamp assumption is worth flagging
TAIL_WARNING_LEVEL = 1e-6


def xlog2x(x: float) -> float:
    """x * log2(x) with 0 * log 0 := 0"""
    return x * math.log2(x) if x > 0.0 else 0.0


def shannon_entropy(d: DiscreteDistribution) -> float:
    """Entropy of the level distribution in bits."""
    check_normalized(d)
    p = d.probabilities[d.probabilities > 0.0]
    h = -float(np.sum(p * np.log2(p)))
    return max(h, 0.0)


def worst_case_variance(d: DiscreteDistribution, q: QuantizerConfig) -> float:
    """
    Upper bound on the quadrature variance.

    Boundary levels sit at -a_lim / +a_lim. Interior values move to the bin edge
    farther from zero: i <= 0 uses i*delta - delta/2, i >= 1 uses i*delta + delta/2.
    The mean is the level-value mean of the distribution.
    """
    check_alignment(d, q)
    check_normalized(d)
    p = d.probabilities
    values = d.values
    a_bar = float(np.dot(p, values))

    shifted = values + np.where(d.indices >= 1, 0.5 * q.delta, -0.5 * q.delta)
    interior = float(np.dot(p[1:-1], (shifted[1:-1] - a_bar) ** 2))
    boundary = p[0] * (-q.a_lim - a_bar) ** 2 + p[-1] * (q.a_lim - a_bar) ** 2
    return interior + float(boundary)


def symplectic_eigenvalue(v_x: float, v_p: float) -> float:
    """sqrt(V_x V_p) for zero correlation, floored at the vacuum value 1."""
    if v_x < 0 or v_p < 0:
        raise DomainError(
            "Quadrature variances must be non-negative",
            {"v_x": f"{v_x}", "v_p": f"{v_p}"},
        )
    return max(1.0, math.sqrt(v_x * v_p))


def holevo_bound(lam: float) -> float:
    """Von Neumann entropy g(lambda) of a single-mode Gaussian state, in bits."""
    if not lam >= 1.0 or not math.isfinite(lam):
        raise DomainError("Symplectic eigenvalue must be >= 1", {"lambda": f"got {lam}"})
    return xlog2x((lam + 1.0) / 2.0) - xlog2x((lam - 1.0) / 2.0)


def asymptotic_randomness(s: SourceModel, q: QuantizerConfig) -> SecuritySummary:
    tail = tail_probability(s, q.a_lim)
    if tail > TAIL_WARNING_LEVEL:
        logger.warning(f"Mass beyond a_lim={q.a_lim:.4g} is {tail:.3g}; the clamp bound is not conservative")
    d = discrete_distribution(s, q)
    shannon = shannon_entropy(d)
    # both quadratures share the same distribution
    v_bar = worst_case_variance(d, q)
    lam = symplectic_eigenvalue(v_bar, v_bar)
    holevo = holevo_bound(lam)
    logger.debug(f"asymptotic: H={shannon:.6f} V_bar={v_bar:.6f} lambda={lam:.6f}")
    return SecuritySummary(
        shannon_bits=shannon,
        v_bar_x=v_bar,
        v_bar_p=v_bar,
        lambda_bar=lam,
        holevo_bits=holevo,
        r_dis_bits=shannon - holevo,
    )


def randomness_budget(n_tot: int, n_c: int, seed_len: int, r_per_sample: float) -> float:
    """Extractable bits from n_tot samples after spending n_c on checks and seed_len on seeding."""
    if n_c < 0 or seed_len < 0:
        raise DomainError(
            "Sample and seed counts must be non-negative",
            {"n_c": f"{n_c}", "seed_len": f"{seed_len}"},
        )
    if n_c > n_tot:
        raise DomainError(
            "Check samples cannot exceed total samples",
            {"n_c": f"{n_c} > n_tot {n_tot}"},
        )
    return max(0.0, (n_tot - n_c) * r_per_sample - seed_len)
