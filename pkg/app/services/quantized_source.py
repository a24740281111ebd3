"""
Gaussian quadrature source and its digitization by a finite ADC.
"""
from typing import List, Union
import logging
import math

import numpy as np
from pydantic import ValidationError

from app.errors import DataError, DomainError, config_error_from_validation
from app.models import (
    DEFAULT_ALIM_SIGMA,
    DiscreteDistribution,
    QuantizerConfig,
    SourceModel,
)
from app.services import numerics

logger = logging.getLogger(__name__)


def make_quantizer(sampling_range: float, bits: int, a_lim: float) -> QuantizerConfig:
    """Build a QuantizerConfig; a ConfigError names the offending field."""
    try:
        return QuantizerConfig(sampling_range=sampling_range, bits=bits, a_lim=a_lim)
    except ValidationError as e:
        raise config_error_from_validation(e) from e


def quantizer_for_source(
    source: SourceModel,
    range_sigma: float,
    bits: int,
    alim_sigma: float = DEFAULT_ALIM_SIGMA,
) -> QuantizerConfig:
    """Quantizer whose range and clamp bound are given in units of sigma."""
    return make_quantizer(range_sigma * source.sigma, bits, alim_sigma * source.sigma)


def quantize(q: QuantizerConfig, sample: Union[float, np.ndarray]) -> Union[int, np.ndarray]:
    """
    Level index of a sample: interior bin i covers [i*delta - delta/2, i*delta + delta/2),
    samples beyond the outermost edges land in the boundary levels.
    """
    arr = np.asarray(sample, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Samples must be finite", {"sample": "non-finite value"})
    idx = np.clip(np.floor(arr / q.delta + 0.5), q.i_min, q.i_max).astype(np.int64)
    if idx.ndim == 0:
        return int(idx)
    return idx


def discrete_distribution(s: SourceModel, q: QuantizerConfig) -> DiscreteDistribution:
    """
    Level probabilities of the quantized Gaussian.

    Negative levels are integrated with the CDF and positive levels with the
    survival function, so tail bins keep their relative precision and p(i) and
    p(-i) come out of identical arithmetic.
    """
    indices = np.arange(q.i_min, q.i_max + 1, dtype=np.float64)
    lower = (indices - 0.5) * q.delta
    upper = (indices + 0.5) * q.delta
    sd = s.sigma

    p = np.empty_like(indices)
    neg = indices < 0
    pos = indices > 0
    p[neg] = numerics.gaussian_cdf(upper[neg], s.mean, sd) - numerics.gaussian_cdf(lower[neg], s.mean, sd)
    p[pos] = numerics.gaussian_sf(lower[pos], s.mean, sd) - numerics.gaussian_sf(upper[pos], s.mean, sd)
    half = 0.5 * q.delta
    p[indices == 0] = numerics.gaussian_cdf(half, s.mean, sd) - numerics.gaussian_cdf(-half, s.mean, sd)

    # boundary levels absorb the tails
    p[0] = numerics.gaussian_cdf(upper[0], s.mean, sd)
    p[-1] = numerics.gaussian_sf(lower[-1], s.mean, sd)
    logger.debug(f"{q.level_count} levels over N={q.sampling_range:.4g}, boundary mass {p[0] + p[-1]:.3g}")

    return DiscreteDistribution(delta=q.delta, i_min=q.i_min, probabilities=p)


def tail_probability(s: SourceModel, a_lim: float, two_sided: bool = True) -> float:
    """Mass of the continuous Gaussian beyond a_lim (|a| > a_lim, or a > a_lim if one-sided)."""
    if not a_lim > 0 or not math.isfinite(a_lim):
        raise DomainError("a_lim must be positive", {"a_lim": f"got {a_lim}"})
    one_side = float(numerics.gaussian_sf(a_lim, s.mean, s.sigma))
    return 2.0 * one_side if two_sided else one_side


def check_alignment(d: DiscreteDistribution, q: QuantizerConfig) -> None:
    if d.i_min != q.i_min or d.i_max != q.i_max:
        raise DataError(
            "Distribution does not match quantizer levels",
            {"levels": f"distribution [{d.i_min}, {d.i_max}] vs quantizer [{q.i_min}, {q.i_max}]"},
        )
    if not math.isclose(d.delta, q.delta, rel_tol=1e-12):
        raise DataError(
            "Distribution does not match quantizer bin width",
            {"delta": f"distribution {d.delta} vs quantizer {q.delta}"},
        )


def check_normalized(d: DiscreteDistribution, tolerance: float = 1e-9) -> None:
    total = d.total()
    if abs(total - 1.0) > tolerance:
        raise DataError(
            "Distribution is not normalized",
            {"probabilities": f"sum is {total!r}"},
        )


def distribution_rows(d: DiscreteDistribution) -> List[dict]:
    return [
        {"index": level.index, "level": level.value, "probability": level.probability}
        for level in d.levels
    ]
