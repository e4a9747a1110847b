"""`heterosim large-sample`: one large-sample panel, transported and re-estimated."""
import argparse
import logging
from typing import Any

from heterosim.commands import add_common_arguments, report_written
from heterosim.config import RunConfig
from heterosim.reports import emit_large_sample
from heterosim.simgrid import run_large_sample
from heterosim.simgrid.presets import PANELS

logger = logging.getLogger(__name__)


def _extra(args: argparse.Namespace) -> dict[str, Any]:
    section = {
        field: getattr(args, dest)
        for dest, field in (("panel", "panel"), ("n", "n"), ("mv_percent", "mv_percent"))
        if getattr(args, dest) is not None
    }
    return {"large_sample": section} if section else {}


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("large-sample", help="Run one large-sample panel")
    add_common_arguments(parser)
    parser.add_argument("--panel", choices=sorted(PANELS), help="Panel name")
    parser.add_argument("--n", type=int, help="Sample size (default 1000000)")
    parser.add_argument(
        "--mv-percent", type=float, help="Relative measurement variance (transport panels)"
    )
    parser.set_defaults(command="large-sample", handler=run, extra_overrides=_extra)


def run(config: RunConfig) -> int:
    settings = config.large_sample
    result = run_large_sample(
        settings.panel,
        settings.n,
        config.master_seed,
        settings.mv_percent,
        config.loess,
    )
    outdir = config.resolved_outdir()
    report_written(logger, emit_large_sample(result, outdir, config.svg), outdir)
    return 0
