"""`heterosim scenario`: custom scenarios from the [scenario.*] sections of a config file."""
import logging
from typing import Any

from heterosim.commands import add_common_arguments, report_written
from heterosim.config import RunConfig
from heterosim.exceptions import ConfigError
from heterosim.reports import emit_reports
from heterosim.simgrid import run_study

logger = logging.getLogger(__name__)


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("scenario", help="Run custom scenarios from --config")
    add_common_arguments(parser)
    parser.set_defaults(command="scenario", handler=run)


def run(config: RunConfig) -> int:
    if not config.scenarios:
        raise ConfigError("no [scenario.<id>] sections configured")
    result = run_study(
        config.scenarios,
        config.reps,
        config.master_seed,
        config.workers,
        config.curve_reps,
        config.loess,
    )
    outdir = config.resolved_outdir()
    report_written(logger, emit_reports(result, outdir, config.svg), outdir)
    return 0
