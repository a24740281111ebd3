from fastapi import APIRouter
from fastapi.responses import JSONResponse
import logging
from app.errors import ConfigError, DataError, DomainError
from app.models import RateParams, SweepSpec, TrialRequest
from app.services import export
from app.services.monte_carlo import coverage_checks, run_coverage
from app.services.quantized_source import discrete_distribution, distribution_rows
from app.services.sweeps import evaluate_rate, run_sweep
from pydantic import ValidationError

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/api")

def create_error_response(status_code: int, message: str, details: dict = None):
    """Create standardized error response"""
    return JSONResponse(
        status_code=status_code,
        content={
            "error": True,
            "message": message,
            "details": details or {},
            "status_code": status_code
        }
    )

def error_response_for(exc: Exception, action: str):
    """Map a pipeline exception onto the error envelope"""
    if isinstance(exc, ValidationError):
        exc = ConfigError("Validation failed", {
            " -> ".join(str(x) for x in error["loc"]) or "__root__": error["msg"]
            for error in exc.errors()
        })
    if isinstance(exc, ConfigError):
        logger.info(f"Rejected {action}: {exc}")
        return create_error_response(422, exc.message, exc.details)
    if isinstance(exc, (DomainError, DataError)):
        logger.info(f"Bad {action} request: {exc}")
        return create_error_response(400, exc.message, exc.details)
    logger.error(f"Unexpected error in {action}: {str(exc)}")
    return create_error_response(500, "Internal server error occurred")

@router.post("/rate")
def rate(params: RateParams):
    """Asymptotic and finite-size randomness for one parameter point"""
    try:
        report = evaluate_rate(params)
        document = export.rate_document(report)
        document["warning"] = report.finite.warning
        return document
    except Exception as e:
        return error_response_for(e, "rate")

@router.post("/distribution")
def distribution(params: RateParams):
    """Level probabilities of the configured quantizer"""
    try:
        d = discrete_distribution(params.source(), params.quantizer())
        rows = distribution_rows(d)
        return {"rows": rows, "count": len(rows)}
    except Exception as e:
        return error_response_for(e, "distribution")

@router.post("/sweep")
def sweep(spec: SweepSpec):
    try:
        rows = run_sweep(spec)
        return {"variable": spec.variable.value, "rows": rows}
    except Exception as e:
        return error_response_for(e, "sweep")

@router.post("/montecarlo")
def montecarlo(request: TrialRequest):
    """Coverage run of the variance estimator with embedded pass/fail checks"""
    try:
        cfg = request.trial_config()
        report = run_coverage(cfg)
        checks = coverage_checks(report, cfg.confidence_epsilon)
        return {
            "report": export.coverage_row(report),
            "checks": [check.model_dump() for check in checks],
            "passed": all(check.passed for check in checks),
        }
    except Exception as e:
        return error_response_for(e, "montecarlo")
