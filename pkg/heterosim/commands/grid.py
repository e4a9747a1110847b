"""`heterosim grid`: the factorial measurement-heterogeneity grid."""
import argparse
import logging
from typing import Any

from heterosim.commands import add_common_arguments, report_written
from heterosim.config import RunConfig
from heterosim.models import FAMILIES, Scenario
from heterosim.reports import emit_reports
from heterosim.simgrid import build_grid, run_study

logger = logging.getLogger(__name__)


def _extra(args: argparse.Namespace) -> dict[str, Any]:
    values: dict[str, Any] = {}
    if args.family:
        values["families"] = tuple(args.family)
    if args.consistent_predictor is not None:
        values["consistent_predictor"] = args.consistent_predictor
    return values


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("grid", help="Run the scenario grid")
    add_common_arguments(parser)
    parser.add_argument(
        "--family",
        action="append",
        choices=FAMILIES,
        help="Scenario family (repeatable; default single)",
    )
    parser.add_argument(
        "--consistent-predictor",
        choices=["derivation", "validation"],
        help="Error level of the consistent predictor in two_pred_one_consistent",
    )
    parser.set_defaults(command="grid", handler=run, extra_overrides=_extra)


def scenarios_for(config: RunConfig) -> list[Scenario]:
    return build_grid(
        config.families,
        config.factor_scale,
        config.consistent_predictor,
        config.n_deriv,
        config.n_valid,
    )


def run(config: RunConfig) -> int:
    scenarios = scenarios_for(config)
    logger.info(f"🧮 Grid: {', '.join(config.families)} ({len(scenarios)} scenarios)")
    result = run_study(
        scenarios,
        config.reps,
        config.master_seed,
        config.workers,
        config.curve_reps,
        config.loess,
    )
    outdir = config.resolved_outdir()
    report_written(logger, emit_reports(result, outdir, config.svg), outdir)
    return 0
