"""`heterosim report`: re-aggregate an existing replicates.csv."""
import argparse
import logging
from pathlib import Path
from typing import Any

from heterosim.commands import add_common_arguments, report_written
from heterosim.config import RunConfig
from heterosim.reports import emit_report_from_replicates

logger = logging.getLogger(__name__)


def _extra(args: argparse.Namespace) -> dict[str, Any]:
    return {"replicates_path": args.replicates} if args.replicates is not None else {}


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("report", help="Rebuild summaries from replicates.csv")
    add_common_arguments(parser)
    parser.add_argument("--replicates", type=Path, help="Path of a replicates.csv")
    parser.set_defaults(command="report", handler=run, extra_overrides=_extra)


def run(config: RunConfig) -> int:
    assert config.replicates_path is not None
    outdir = config.resolved_outdir()
    logger.info(f"📊 Re-aggregating {config.replicates_path}")
    report_written(logger, emit_report_from_replicates(config.replicates_path, outdir), outdir)
    return 0
