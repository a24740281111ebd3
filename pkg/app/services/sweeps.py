"""
Single-point rate evaluation and one-variable parameter sweeps.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional
import logging

from pydantic import ValidationError

from app.errors import ConfigError, config_error_from_validation
from app.models import (
    INTEGER_VARIABLES,
    RateParams,
    RateReport,
    SweepSpec,
    SweepVariable,
)
from app.services.asymptotic_security import asymptotic_randomness, randomness_budget
from app.services.finite_size import finite_size_randomness

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "x", "r_ideal", "r_finite", "gap", "shannon", "holevo_ideal",
    "holevo_finite", "v_bar", "delta_v", "v_max", "warn",
]

# Grid used when a sweep names a variable but no grid
DEFAULT_GRIDS: Dict[SweepVariable, dict] = {
    SweepVariable.CHECK_LENGTH: {"start": 1e3, "stop": 1e8, "count": 200, "scale": "log"},
    SweepVariable.CONFIDENCE_EPSILON: {"start": 1e-15, "stop": 1.0, "count": 200, "scale": "log"},
    SweepVariable.RANGE_SIGMA: {"start": 1.0, "stop": 9.95, "count": 180, "scale": "linear"},
    SweepVariable.BITS: {"start": 2, "stop": 20, "count": 19, "scale": "linear"},
}

# Reproductions of the standard scans: variable, grid and fixed parameters
PRESETS: Dict[str, dict] = {
    "check-length-scan": {
        "variable": "check_length",
        "grid": DEFAULT_GRIDS[SweepVariable.CHECK_LENGTH],
        "fixed": {"bits": 16, "range_sigma": 3.0, "confidence_epsilon": 1e-10},
    },
    "epsilon-scan": {
        "variable": "confidence_epsilon",
        "grid": DEFAULT_GRIDS[SweepVariable.CONFIDENCE_EPSILON],
        "fixed": {"bits": 16, "range_sigma": 3.0, "check_length": 10**6},
    },
    "range-scan": {
        "variable": "range_sigma",
        "grid": DEFAULT_GRIDS[SweepVariable.RANGE_SIGMA],
        "fixed": {"bits": 16, "check_length": 10**4, "confidence_epsilon": 1e-10},
    },
    "range-scan-coarse": {
        "variable": "range_sigma",
        "grid": DEFAULT_GRIDS[SweepVariable.RANGE_SIGMA],
        "fixed": {"bits": 8, "check_length": 10**4, "confidence_epsilon": 1e-10},
    },
    "resolution-scan": {
        "variable": "bits",
        "grid": {"grid": list(range(4, 17))},
        "fixed": {"range_sigma": 3.0, "check_length": 10**4, "confidence_epsilon": 1e-10},
    },
}


def build_rate_params(**values) -> RateParams:
    try:
        return RateParams(**values)
    except ValidationError as e:
        raise config_error_from_validation(e) from e


def evaluate_rate(
    params: RateParams,
    total_samples: Optional[int] = None,
    seed_length: int = 0,
) -> RateReport:
    """Asymptotic and finite-size randomness for one parameter record."""
    try:
        source = params.source()
        quantizer = params.quantizer()
    except ValidationError as e:
        raise config_error_from_validation(e) from e

    summary = asymptotic_randomness(source, quantizer)
    finite = finite_size_randomness(source, quantizer, params.finite_config())

    budget = None
    if total_samples is not None:
        budget = randomness_budget(total_samples, params.check_length, seed_length, finite.r_finite_bits)

    return RateReport(
        params=params,
        sigma=source.sigma,
        sampling_range=quantizer.sampling_range,
        a_lim=quantizer.a_lim,
        summary=summary,
        finite=finite,
        budget_bits=budget,
    )


def build_sweep_spec(**values) -> SweepSpec:
    try:
        return SweepSpec(**values)
    except ValidationError as e:
        raise config_error_from_validation(e) from e


def preset_spec(name: str, fixed_overrides: Optional[dict] = None, grid_overrides: Optional[dict] = None) -> SweepSpec:
    if name not in PRESETS:
        raise ConfigError(f"Unknown preset '{name}'", {"preset": f"choose from {', '.join(PRESETS)}"})
    preset = PRESETS[name]
    fixed = {**preset["fixed"], **(fixed_overrides or {})}
    grid = dict(preset["grid"])
    if grid_overrides:
        if "grid" in grid_overrides:
            grid = {}
        elif any(key in grid_overrides for key in ("start", "stop", "count")):
            grid.pop("grid", None)
        grid.update(grid_overrides)
    return build_sweep_spec(variable=preset["variable"], fixed=build_rate_params(**fixed), **grid)


def params_at(spec: SweepSpec, x: float) -> RateParams:
    value = int(x) if spec.variable in INTEGER_VARIABLES else x
    values = spec.fixed.model_dump()
    values[spec.variable.value] = value
    return build_rate_params(**values)


def sweep_row(report: RateReport, x: float, integer_x: bool) -> dict:
    summary, finite = report.summary, report.finite
    return {
        "x": int(x) if integer_x else x,
        "r_ideal": summary.r_dis_bits,
        "r_finite": finite.r_finite_bits,
        "gap": summary.r_dis_bits - finite.r_finite_bits,
        "shannon": summary.shannon_bits,
        "holevo_ideal": summary.holevo_bits,
        "holevo_finite": finite.holevo_finite_bits,
        "v_bar": summary.v_bar_x,
        "delta_v": finite.delta_v,
        "v_max": finite.v_max,
        "warn": finite.warning is not None,
    }


def evaluate_point(spec: SweepSpec, x: float) -> dict:
    report = evaluate_rate(params_at(spec, x))
    return sweep_row(report, x, spec.variable in INTEGER_VARIABLES)


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[dict]:
    """One row per grid point, in grid order regardless of evaluation order."""
    points = spec.points()
    # validate every point before spending time on any of them
    for x in points:
        params_at(spec, x)
    logger.info(f"Sweeping {spec.variable.value} over {len(points)} points")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda x: evaluate_point(spec, x), points))
    else:
        rows = [evaluate_point(spec, x) for x in points]
    logger.info(f"Sweep of {spec.variable.value} finished")
    return rows
