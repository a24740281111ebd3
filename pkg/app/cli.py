"""
Command line: rate, sweep, distribution, montecarlo and serve.

Exit codes: 0 ok, 1 usage / configuration / IO error, 2 ok with a CLT validity
warning, 3 Monte Carlo check failure.
"""
from typing import List, Optional
import argparse
import logging
import math
import sys

from pydantic import ValidationError

from app.errors import QRNGError, config_error_from_validation
from app.models import (
    CLT_WARNING,
    BoundaryMomentMode,
    GridScale,
    MonteCarloParams,
    SweepVariable,
)
from app.services import export
from app.services.monte_carlo import coverage_checks, run_coverage
from app.services.quantized_source import discrete_distribution, distribution_rows
from app.services.sweeps import (
    DEFAULT_GRIDS,
    PRESETS,
    build_rate_params,
    build_sweep_spec,
    evaluate_rate,
    preset_spec,
    run_sweep,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_WARNING = 2
EXIT_CHECK_FAILED = 3

# parameter field -> command-line flag
PARAM_FLAGS = {
    "excess_noise": "--excess-noise",
    "bits": "--bits",
    "range_sigma": "--range-sigma",
    "alim_sigma": "--alim-sigma",
    "check_length": "--check-length",
    "confidence_epsilon": "--confidence-epsilon",
    "boundary_moment_mode": "--moment-mode",
    "trials": "--trials",
    "seed": "--seed",
    "workers": "--workers",
}


class UsageError(Exception):
    pass


class CLIArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def count_type(text: str) -> int:
    """Integer flag that also accepts exact float spellings such as 1e4."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    if value != int(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    return int(value)


def grid_type(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated list of numbers")


def add_param_flags(p: argparse.ArgumentParser) -> None:
    # defaults stay None so only explicit flags override the model defaults
    p.add_argument("--excess-noise", type=float, dest="excess_noise")
    p.add_argument("--bits", type=int)
    p.add_argument("--range-sigma", type=float, dest="range_sigma")
    p.add_argument("--alim-sigma", type=float, dest="alim_sigma")
    p.add_argument("--check-length", type=count_type, dest="check_length")
    p.add_argument("--confidence-epsilon", type=float, dest="confidence_epsilon")
    p.add_argument(
        "--moment-mode",
        choices=[m.value for m in BoundaryMomentMode],
        dest="boundary_moment_mode",
    )


def explicit_params(args: argparse.Namespace) -> dict:
    fields = [
        "excess_noise", "bits", "range_sigma", "alim_sigma",
        "check_length", "confidence_epsilon", "boundary_moment_mode",
    ]
    return {f: getattr(args, f) for f in fields if getattr(args, f, None) is not None}


def write_output(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def cmd_rate(args: argparse.Namespace) -> int:
    params = build_rate_params(**explicit_params(args))
    report = evaluate_rate(params, total_samples=args.total_samples, seed_length=args.seed_length)
    if args.format == "json":
        write_output(export.rate_json(report), args.out)
    else:
        write_output(export.rate_text(report), args.out)
    if report.finite.warning:
        print(f"warning: {CLT_WARNING}", file=sys.stderr)
        return EXIT_WARNING
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = {}
    if args.grid is not None:
        grid["grid"] = args.grid
    for key in ("start", "stop", "count"):
        if getattr(args, key) is not None:
            grid[key] = getattr(args, key)
    if args.scale is not None:
        grid["scale"] = args.scale

    if args.preset:
        spec = preset_spec(args.preset, explicit_params(args), grid)
    else:
        if args.variable is None:
            raise UsageError("one of --variable or --preset is required")
        variable = SweepVariable(args.variable)
        if "grid" not in grid and "start" not in grid:
            grid = {**DEFAULT_GRIDS[variable], **grid}
        spec = build_sweep_spec(
            variable=variable,
            fixed=build_rate_params(**explicit_params(args)),
            **grid,
        )

    rows = run_sweep(spec, workers=args.workers)
    if args.format == "json":
        write_output(export.sweep_json(spec.variable.value, rows), args.out)
    else:
        write_output(export.sweep_csv(rows), args.out)
    return EXIT_OK


def cmd_distribution(args: argparse.Namespace) -> int:
    params = build_rate_params(**explicit_params(args))
    rows = distribution_rows(discrete_distribution(params.source(), params.quantizer()))
    if args.format == "json":
        write_output(export.distribution_json(rows), args.out)
    else:
        write_output(export.distribution_csv(rows), args.out)
    return EXIT_OK


def cmd_montecarlo(args: argparse.Namespace) -> int:
    values = explicit_params(args)
    for key in ("trials", "seed", "workers"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    if args.per_sample:
        values["per_sample"] = True
    try:
        params = MonteCarloParams(**values)
        cfg = params.trial_config()
    except ValidationError as e:
        raise config_error_from_validation(e) from e

    report = run_coverage(cfg)
    checks = coverage_checks(report, cfg.confidence_epsilon)
    if args.format == "csv":
        write_output(export.coverage_csv(report), args.out)
    else:
        write_output(export.coverage_json(report, checks), args.out)

    failed = [check for check in checks if not check.passed]
    for check in failed:
        print(f"check failed: {check.name}: {check.detail}", file=sys.stderr)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = CLIArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = CLIArgumentParser(
        prog="qrng-finite",
        description="Finite-size extractable randomness of a continuous-variable source-independent QRNG.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rate = sub.add_parser("rate", parents=[common], help="evaluate one parameter point")
    add_param_flags(rate)
    rate.add_argument("--total-samples", type=count_type, dest="total_samples",
                      help="n_tot; reports the randomness budget with n_c = check length")
    rate.add_argument("--seed-length", type=count_type, dest="seed_length", default=0)
    rate.add_argument("--format", choices=["text", "json"], default="text")
    rate.add_argument("--out")
    rate.set_defaults(handler=cmd_rate)

    sweep = sub.add_parser("sweep", parents=[common], help="sweep one parameter")
    add_param_flags(sweep)
    sweep.add_argument("--preset", choices=sorted(PRESETS))
    sweep.add_argument("--variable", choices=[v.value for v in SweepVariable])
    sweep.add_argument("--grid", type=grid_type, help="explicit comma-separated grid")
    sweep.add_argument("--start", type=float)
    sweep.add_argument("--stop", type=float)
    sweep.add_argument("--count", type=int)
    sweep.add_argument("--scale", choices=[s.value for s in GridScale])
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    sweep.add_argument("--out")
    sweep.set_defaults(handler=cmd_sweep)

    dist = sub.add_parser("distribution", parents=[common], help="dump level probabilities")
    add_param_flags(dist)
    dist.add_argument("--format", choices=["csv", "json"], default="csv")
    dist.add_argument("--out")
    dist.set_defaults(handler=cmd_distribution)

    mc = sub.add_parser("montecarlo", parents=[common], help="validate the estimator by sampling")
    add_param_flags(mc)
    mc.add_argument("--trials", type=count_type)
    mc.add_argument("--seed", type=int)
    mc.add_argument("--workers", type=int)
    mc.add_argument("--per-sample", action="store_true", dest="per_sample",
                    help="quantize Gaussian draws instead of drawing level histograms")
    mc.add_argument("--format", choices=["csv", "json"], default="json")
    mc.add_argument("--out")
    mc.set_defaults(handler=cmd_montecarlo)

    serve = sub.add_parser("serve", parents=[common], help="serve the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)

    return parser


def describe_error(exc: QRNGError) -> str:
    if not exc.details:
        return exc.message
    parts = []
    for field, msg in exc.details.items():
        flag = PARAM_FLAGS.get(field.split(" -> ")[0], field)
        parts.append(f"{flag}: {msg}")
    return f"{exc.message} ({'; '.join(parts)})"


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        return args.handler(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QRNGError as e:
        print(f"error: {describe_error(e)}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: cannot write output: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
