"""
CSV and JSON rendering. CSV numbers carry 10 significant digits, JSON keeps the
shortest round-trip float repr; both use '\\n' line endings.
"""
from typing import Iterable, List, Sequence
import csv
import io
import json

from app.models import CoverageCheck, CoverageReport, RateReport
from app.services.sweeps import SWEEP_COLUMNS

DISTRIBUTION_COLUMNS = ["index", "level", "probability"]
COVERAGE_COLUMNS = [
    "trials", "hits", "coverage", "empirical_mean",
    "predicted_mean", "empirical_var", "predicted_var",
]


def format_number(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".10g")


def render_csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row[col]) for col in columns])
    return buffer.getvalue()


def render_json(document) -> str:
    return json.dumps(document, indent=2) + "\n"


def sweep_csv(rows: List[dict]) -> str:
    return render_csv(SWEEP_COLUMNS, rows)


def sweep_json(variable: str, rows: List[dict]) -> str:
    return render_json({"variable": variable, "columns": SWEEP_COLUMNS, "rows": rows})


def distribution_csv(rows: List[dict]) -> str:
    return render_csv(DISTRIBUTION_COLUMNS, rows)


def distribution_json(rows: List[dict]) -> str:
    return render_json({"columns": DISTRIBUTION_COLUMNS, "rows": rows})


def coverage_row(report: CoverageReport) -> dict:
    return report.model_dump(by_alias=True)


def coverage_csv(report: CoverageReport) -> str:
    return render_csv(COVERAGE_COLUMNS, [coverage_row(report)])


def coverage_json(report: CoverageReport, checks: List[CoverageCheck]) -> str:
    return render_json({
        **coverage_row(report),
        "checks": [check.model_dump() for check in checks],
        "passed": all(check.passed for check in checks),
    })


def rate_document(report: RateReport) -> dict:
    return report.model_dump(mode="json")


def rate_json(report: RateReport) -> str:
    return render_json(rate_document(report))


def rate_text(report: RateReport) -> str:
    """Human-readable 'name: value' report echoing inputs in sigma and absolute units."""
    p, s, f = report.params, report.summary, report.finite
    lines = [
        "# inputs",
        f"excess_noise: {format_number(p.excess_noise)}",
        f"variance: {format_number(1.0 + p.excess_noise)}",
        f"sigma: {format_number(report.sigma)}",
        f"bits: {p.bits}",
        f"range_sigma: {format_number(p.range_sigma)}",
        f"range_abs: {format_number(report.sampling_range)}",
        f"alim_sigma: {format_number(p.alim_sigma)}",
        f"alim_abs: {format_number(report.a_lim)}",
        f"check_length: {p.check_length}",
        f"confidence_epsilon: {format_number(p.confidence_epsilon)}",
        f"moment_mode: {p.boundary_moment_mode.value}",
        "# asymptotic",
        f"shannon_bits: {format_number(s.shannon_bits)}",
        f"v_bar: {format_number(s.v_bar_x)}",
        f"lambda_bar: {format_number(s.lambda_bar)}",
        f"holevo_bits: {format_number(s.holevo_bits)}",
        f"r_dis_bits: {format_number(s.r_dis_bits)}",
        "# finite size",
        f"mu_a: {format_number(f.moments.mu_a)}",
        f"mu_b: {format_number(f.moments.mu_b)}",
        f"sigma_b_sq: {format_number(f.moments.sigma_b_sq)}",
        f"delta_v: {format_number(f.delta_v)}",
        f"v_max: {format_number(f.v_max)}",
        f"lambda_max: {format_number(f.lambda_max)}",
        f"holevo_finite_bits: {format_number(f.holevo_finite_bits)}",
        f"r_finite_bits: {format_number(f.r_finite_bits)}",
        f"gap_bits: {format_number(s.r_dis_bits - f.r_finite_bits)}",
    ]
    if report.budget_bits is not None:
        lines.append(f"budget_bits: {format_number(report.budget_bits)}")
    if f.warning:
        lines.append(f"warning: {f.warning}")
    return "\n".join(lines) + "\n"
