"""`heterosim brier-sweep`: decomposed Brier score over relative measurement variance."""
import argparse
import logging
from typing import Any

from heterosim.commands import add_common_arguments, report_written
from heterosim.config import RunConfig
from heterosim.reports import emit_brier_sweep
from heterosim.simgrid import brier_sweep

logger = logging.getLogger(__name__)


def _extra(args: argparse.Namespace) -> dict[str, Any]:
    section: dict[str, Any] = {}
    if args.mv_percent:
        section["mv_percents"] = tuple(args.mv_percent)
    if args.n is not None:
        section["n"] = args.n
    return {"sweep": section} if section else {}


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("brier-sweep", help="Decomposed Brier score sweep")
    add_common_arguments(parser)
    parser.add_argument(
        "--mv-percent", type=float, action="append", help="Sweep level (repeatable)"
    )
    parser.add_argument("--n", type=int, help="Sample size (default 1000000)")
    parser.set_defaults(command="brier-sweep", handler=run, extra_overrides=_extra)


def run(config: RunConfig) -> int:
    rows = brier_sweep(config.sweep.mv_percents, config.sweep.n, config.master_seed)
    for row in rows:
        logger.info(
            f"%MV={row.mv_percent:g} {row.mode}: calibration {row.calibration_term:+.5f}, "
            f"refinement {row.refinement_term:.5f}"
        )
    outdir = config.resolved_outdir()
    report_written(logger, emit_brier_sweep(rows, outdir), outdir)
    return 0
