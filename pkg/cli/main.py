"""CLI entrypoint for the degennes spectral toolkit.

Usage (examples):
    python -m cli.main band --format json --output band.json
    python -m cli.main conjecture --grid-points 64
    python -m cli.main current --scan --format csv --output current.csv
    python -m cli.main agmon --e 0.9 --K 1
    python -m cli.main mourre --alpha 0.25
    python -m cli.main audit --plot

Exit codes: 0 checks pass, 2 checks failed or verdict CONTRADICTED,
3 numerical non-convergence, 4 invalid configuration or input.
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional, Sequence
import argparse
import logging
import os
import sys

import numpy as np

from degennes.config import load_settings
from degennes.errors import ConfigInvalid, DeGennesError
from degennes.models.entities import ReportMixin, Verdict
from degennes.pipeline.pipeline import AUDIT_ALPHAS, AuditRunResult, SpectralPipeline
from degennes.storage.plots import write_plots
from degennes.storage.report_storage import persist_report, validate_output

logger = logging.getLogger("cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Key-value configuration file (DEGENNES_* keys)")
    common.add_argument("--output", help="Report path (default: <command>_report.<format>)")
    common.add_argument("--format", default="json", help="Report format: csv or json")
    common.add_argument("--plot", action="store_true", help="Write SVG plots next to the report")
    common.add_argument("--seed", type=int, help="Seed for randomized spot checks")
    common.add_argument("--workers", type=int, help="Threads for fiber sweeps")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    common.add_argument("--grid-points", type=int, help="Grid points at the coarsest level")
    common.add_argument("--tol", type=float, help="Target eigenvalue tolerance")
    common.add_argument("--domain-length", type=float, help="Initial truncation length")
    common.add_argument("--refinement-levels", type=int, help="Number of grid levels")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="degennes", description="Band functions, edge currents and Mourre constants."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    band = sub.add_parser("band", parents=[common], help="Sample bands and check their properties")
    band.add_argument("--xi-min", type=float, default=-1.0)
    band.add_argument("--xi-max", type=float, default=6.0)
    band.add_argument("--n-samples", type=int, default=71)

    sub.add_parser("conjecture", parents=[common], help="Sign of mu_1''' at the minimum")

    current = sub.add_parser("current", parents=[common], help="Algebraic current and window extrema")
    current.add_argument("--scan", action="store_true", help="Tabulate c(e) over (Theta0, Theta1)")
    current.add_argument("--n-e", type=int, default=50)
    current.add_argument("--e", type=float)
    current.add_argument("--delta", type=float)

    agmon = sub.add_parser("agmon", parents=[common], help="Weighted norms of low-energy ground states")
    agmon.add_argument("--e", type=float, default=0.9)
    agmon.add_argument("--K", type=float, default=1.0)
    agmon.add_argument("--n-xi", type=int, default=25)

    mourre = sub.add_parser("mourre", parents=[common], help="Window, Mourre constant and LAP ledger")
    mourre.add_argument("--alpha", type=float, default=0.25)
    mourre.add_argument("--h", type=float, default=1e-2)

    audit = sub.add_parser("audit", parents=[common], help="Power of h in the LAP bound")
    audit.add_argument("--alpha", type=float, nargs="+", default=list(AUDIT_ALPHAS))
    audit.add_argument("--h-max", type=float, default=1e-1)
    audit.add_argument("--h-min", type=float, default=1e-4)
    audit.add_argument("--n-h", type=int, default=13)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "domain_length": args.domain_length,
        "grid_points": args.grid_points,
        "refinement_levels": args.refinement_levels,
        "target_tol": args.tol,
        "workers": args.workers,
        "log_level": args.log_level,
        "seed": args.seed,
    }


def _run(pipeline: SpectralPipeline, args: argparse.Namespace) -> ReportMixin:
    if args.command == "band":
        return pipeline.run_band(args.xi_min, args.xi_max, args.n_samples)
    if args.command == "conjecture":
        return pipeline.run_conjecture()
    if args.command == "current":
        return pipeline.run_current(args.e, args.delta, args.scan, args.n_e)
    if args.command == "agmon":
        return pipeline.run_agmon(args.e, args.K, args.n_xi)
    if args.command == "mourre":
        return pipeline.run_mourre(args.alpha, args.h)
    h_grid = np.logspace(np.log10(args.h_max), np.log10(args.h_min), args.n_h).tolist()
    return pipeline.run_audit(args.alpha, h_grid)


# flags that do not change what a command computes
_RUN_FLAGS = {"command", "config", "output", "format", "plot", "workers", "log_level"}


def _command_params(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _RUN_FLAGS}


def _check_arguments(args: argparse.Namespace) -> None:
    if args.command == "current" and not args.scan and (args.e is None or args.delta is None):
        raise ConfigInvalid("current needs --scan or both --e and --delta")


def _exit_code(result: ReportMixin) -> int:
    if getattr(result, "verdict", None) is Verdict.CONTRADICTED:
        return 2
    passed = getattr(result, "passed", True)
    if not passed:
        failed: List[str] = []
        properties = getattr(result, "properties", None)
        if properties is not None:
            failed = [f"{c.name} ({c.detail})" for c in properties.checks if not c.passed]
        if isinstance(result, AuditRunResult):
            failed = result.failures()
        logger.error("checks failed: %s", "; ".join(failed))
        return 2
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 4

    output = args.output or f"{args.command}_report.{args.format}"
    try:
        settings = load_settings(args.config, _overrides(args))
        logging.basicConfig(level=settings.log_level, format=LOG_FORMAT, stream=sys.stderr)
        validate_output(output, args.format)
        _check_arguments(args)

        pipeline = SpectralPipeline(settings)
        result = _run(pipeline, args)
        persist_report(result, output, args.format)
        if args.plot:
            write_plots(
                args.command, result, os.path.dirname(os.path.abspath(output)), _command_params(args)
            )
    except DeGennesError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    return _exit_code(result)


if __name__ == "__main__":
    sys.exit(main())
