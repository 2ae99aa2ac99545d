"""Command-line entry point."""

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from lumpvol.core.config import get_settings
from lumpvol.core.exceptions import (
    InvalidGenusDegreeException,
    LumpVolException,
    ValidationException,
)
from lumpvol.core.logging import configure_logging, get_logger
from lumpvol.models.formula import FormulaInput
from lumpvol.models.rational_map import ModuliChart, PolyTuple
from lumpvol.models.vortex import VortexConfig
from lumpvol.repositories.report_repository import ReportRepository
from lumpvol.schemas.maps import PolyTupleSchema
from lumpvol.schemas.reports import (
    ErrorResponse,
    FormulaReport,
    KWSolveReport,
    MetricReport,
    SweepReport,
    VolumeEstimateSchema,
    VortexMetricReportSchema,
)
from lumpvol.schemas.run import RunConfig
from lumpvol.services.closed_form import (
    baptista_volume,
    dim_hol,
    format_exact,
    format_factored,
    main_volume,
    parse_area,
    parse_coupling,
)
from lumpvol.services.convergence import geometric_s2, sweep
from lumpvol.services.kw_vortex import bound_checks, norm_function, vortex_metric
from lumpvol.services.l2_metric import l2_metric_matrix, volume_density
from lumpvol.services.moduli_volume import calibrate_cpq, mc_volume_l2, mc_volume_vortex
from lumpvol.services.sphere_geometry import build_grid
from lumpvol.tasks.solver_tasks import robust_kw_solve

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def standard_map(r: int, k: int) -> PolyTuple:
    """[z^r : 1 : 0 : ... : 0]."""
    coeffs = np.zeros((k + 1, r + 1), dtype=np.complex128)
    coeffs[0, 0] = 1.0
    coeffs[1, r] = 1.0
    return PolyTuple(coeffs)


def load_map(path: Optional[str], r: Optional[int], k: Optional[int]) -> PolyTuple:
    """Map from a JSON file, or the standard map of degree r into CP^k."""
    if path is None:
        return standard_map(r if r is not None else 1, k if k is not None else 1)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationException(f"cannot read map file {path!r}: {exc}", field="map")
    return PolyTupleSchema.model_validate(data).to_model()


def _config(args: argparse.Namespace, **extra: object) -> RunConfig:
    fields = {
        name: getattr(args, name)
        for name in RunConfig.model_fields
        if name != "subcommand" and getattr(args, name, None) is not None
    }
    fields.update({key: value for key, value in extra.items() if value is not None})
    return RunConfig(subcommand=args.command, **fields)


def cmd_formula(args: argparse.Namespace) -> tuple[BaseModel, RunConfig]:
    """Exact Main Theorem and finite-s volumes."""
    if args.r is None or args.k is None:
        raise ValidationException("--r and --k are required", field="r")
    coupling = parse_coupling(args.s2) if args.s2 is not None else None
    inp = FormulaInput(
        b=args.b,
        r=args.r,
        k=args.k,
        s2=coupling,
        vol_sigma=parse_area(args.vol_sigma),
    )
    value = main_volume(inp, args.policy)
    report = FormulaReport(
        b=inp.b,
        r=inp.r,
        k=inp.k,
        q=inp.q,
        dim_hol=dim_hol(inp),
        main_volume=format_exact(value),
        main_volume_factored=format_factored(inp),
        main_volume_decimal=float(value),
    )
    if coupling is not None:
        finite = baptista_volume(inp, args.policy)
        report.s2 = str(coupling)
        report.vol_sigma = format_exact(inp.vol_sigma)
        report.finite_volume = format_exact(finite)
        report.finite_volume_decimal = float(finite)
    return report, _config(args)


def _require_s2(args: argparse.Namespace) -> float:
    if args.s2 is None:
        raise ValidationException("--s2 is required", field="s2")
    return parse_coupling(args.s2).as_float


def cmd_kw_solve(args: argparse.Namespace) -> tuple[BaseModel, RunConfig]:
    """Solve the gauge equation for a map at one coupling."""
    P = load_map(args.map_file, args.r, args.k)
    grid = build_grid(args.L)
    cfg = VortexConfig(_require_s2(args), P.r, P.k)
    h = norm_function(P, grid)
    sol = robust_kw_solve(h, cfg)
    checks = bound_checks(sol, h, cfg)
    bounds = {**asdict(checks), "holds": checks.holds}
    return KWSolveReport.from_model(sol, bounds), _config(args, r=P.r, k=P.k)


def cmd_metric(args: argparse.Namespace) -> tuple[BaseModel, RunConfig]:
    """Limiting L2 metric at a map."""
    P = load_map(args.map_file, args.r, args.k)
    chart = ModuliChart.containing(P)
    G = l2_metric_matrix(
        P, build_grid(args.L), chart, args.normalization, estimate_error=True
    )
    return MetricReport.from_model(G, volume_density(G)), _config(args, r=P.r, k=P.k)


def cmd_vortex_metric(args: argparse.Namespace) -> tuple[BaseModel, RunConfig]:
    """Finite-s vortex metric and its X/Y/Z breakdown."""
    P = load_map(args.map_file, args.r, args.k)
    cfg = VortexConfig(_require_s2(args), P.r, P.k)
    report = vortex_metric(P, cfg, build_grid(args.L), normalization=args.normalization)
    schema = VortexMetricReportSchema.from_model(report, volume_density(report.g))
    return schema, _config(args, r=P.r, k=P.k)


def cmd_converge(args: argparse.Namespace) -> tuple[BaseModel, RunConfig]:
    """Geometric coupling sweep towards the large-s limits."""
    P = load_map(args.map_file, args.r, args.k)
    if args.s2_sweep:
        s2_values = [parse_coupling(s).as_float for s in args.s2_sweep]
    else:
        s2_values = geometric_s2(P.r)
    result = sweep(P, s2_values, args.L, args.normalization)
    config = _config(args, r=P.r, k=P.k, s2_sweep=s2_values)
    return SweepReport.from_model(result), config


def cmd_mc_volume(args: argparse.Namespace) -> tuple[BaseModel, RunConfig]:
    """Monte Carlo volume: L2, vortex at --s2, or calibration with --calibrate."""
    if args.calibrate:
        return cmd_calibrate(args)
    r = args.r if args.r is not None else 1
    k = args.k if args.k is not None else 1
    if args.s2 is None:
        estimate = mc_volume_l2(
            r, k, args.n, args.seed, args.L, args.threads, args.normalization
        )
    else:
        estimate = mc_volume_vortex(
            r,
            k,
            parse_coupling(args.s2).as_float,
            args.n,
            args.seed,
            args.L,
            args.threads,
            args.normalization,
        )
    return VolumeEstimateSchema.from_model(estimate), _config(args, r=r, k=k)


def cmd_calibrate(args: argparse.Namespace) -> tuple[BaseModel, RunConfig]:
    """Fubini-Study volume of CP^q through the density-ratio pipeline."""
    if args.q is None:
        raise ValidationException("--q is required for calibration", field="q")
    estimate = calibrate_cpq(args.q, args.n, args.seed, args.mode, args.threads)
    return VolumeEstimateSchema.from_model(estimate), _config(args)


COMMANDS: Dict[str, Callable[[argparse.Namespace], tuple[BaseModel, RunConfig]]] = {
    "formula": cmd_formula,
    "kw-solve": cmd_kw_solve,
    "metric": cmd_metric,
    "vortex-metric": cmd_vortex_metric,
    "converge": cmd_converge,
    "mc-volume": cmd_mc_volume,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument(
        "--format",
        choices=["json", "csv", "text"],
        default="json",
        help="output format",
    )
    common.add_argument("--log-level", help="log level (default: LUMPVOL_LOG_LEVEL)")

    topology = argparse.ArgumentParser(add_help=False)
    topology.add_argument("--r", type=int, help="degree")
    topology.add_argument("--k", type=int, help="target dimension")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--L", type=int, default=settings.GRID_L, help="band-limit")
    grid.add_argument(
        "--normalization",
        choices=["unit_area", "quotient"],
        help="target Fubini-Study scale",
    )

    maps = argparse.ArgumentParser(add_help=False)
    maps.add_argument(
        "--map", dest="map_file", help="map JSON file (default: [z^r : 1 : 0 ...])"
    )
    maps.add_argument("--s2", help="coupling s^2, e.g. 16pi")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--n", type=int, default=1000, help="sample count")
    sampling.add_argument("--seed", type=int, default=0, help="root seed")
    sampling.add_argument(
        "--threads", type=int, default=settings.THREADS, help="worker count"
    )
    sampling.add_argument("--q", type=int, help="calibration dimension")
    sampling.add_argument(
        "--mode", choices=["ratio", "polydisc"], default="ratio", help="calibration"
    )

    parser = argparse.ArgumentParser(
        prog="lumpvol",
        description="Volumes of rational-map and vortex moduli spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    formula = sub.add_parser("formula", parents=[common, topology], help="closed forms")
    formula.add_argument("--b", type=int, default=0, help="genus")
    formula.add_argument("--s2", help="coupling s^2, e.g. 16pi")
    formula.add_argument("--vol-sigma", default="1", help="area of the surface")
    formula.add_argument(
        "--policy", choices=["riemann_roch", "strict"], help="genus/degree policy"
    )

    for name, text in (
        ("kw-solve", "gauge equation solve"),
        ("metric", "limiting L2 metric"),
        ("vortex-metric", "finite-s vortex metric"),
    ):
        sub.add_parser(name, parents=[common, topology, grid, maps], help=text)

    converge = sub.add_parser(
        "converge", parents=[common, topology, grid, maps], help="coupling sweep"
    )
    converge.add_argument(
        "--s2-sweep", nargs="+", help="couplings (default: 8pi r ... 512pi r)"
    )

    mc = sub.add_parser(
        "mc-volume", parents=[common, topology, grid, sampling], help="Monte Carlo"
    )
    mc.add_argument("--s2", help="vortex coupling; omit for the L2 volume")
    mc.add_argument("--calibrate", action="store_true", help="calibrate on CP^q")

    sub.add_parser("calibrate", parents=[common, sampling], help="CP^q calibration")
    return parser


def _emit_error(error: ErrorResponse) -> None:
    sys.stderr.write(error.model_dump_json() + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if not hasattr(args, "calibrate"):
        args.calibrate = False
    configure_logging(args.log_level)
    if args.format == "csv" and args.command != "converge":
        _emit_error(
            ErrorResponse(
                error="VALIDATION_ERROR",
                message="csv output is only available for converge",
                details={"field": "format"},
            )
        )
        return EXIT_USAGE

    logger.info("run_started", command=args.command)
    try:
        report, config = COMMANDS[args.command](args)
        ReportRepository(args.out).save(report, config, args.format)
    except (ValidationException, InvalidGenusDegreeException) as exc:
        _emit_error(
            ErrorResponse(
                error=exc.error_code, message=exc.message, details=exc.details
            )
        )
        return EXIT_USAGE
    except PydanticValidationError as exc:
        _emit_error(
            ErrorResponse(
                error="VALIDATION_ERROR",
                message="input validation failed",
                details={"errors": json.loads(exc.json())},
            )
        )
        return EXIT_USAGE
    except LumpVolException as exc:
        _emit_error(
            ErrorResponse(
                error=exc.error_code or "NUMERICAL_ERROR",
                message=exc.message,
                details=exc.details,
            )
        )
        return EXIT_NUMERICAL
    except Exception as exc:  # noqa: BLE001
        logger.error("unhandled_exception", error=str(exc), exc_info=True)
        _emit_error(
            ErrorResponse(
                error="INTERNAL_ERROR",
                message="An unexpected error occurred",
                details={"type": type(exc).__name__},
            )
        )
        return EXIT_UNEXPECTED
    logger.info("run_finished", command=args.command)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
