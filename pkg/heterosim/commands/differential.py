"""`heterosim differential`: differential measurement in cases at derivation or validation."""
import logging
from typing import Any

from heterosim.commands import add_common_arguments, report_written
from heterosim.config import RunConfig
from heterosim.reports import emit_reports
from heterosim.simgrid import differential_presets, run_study

logger = logging.getLogger(__name__)


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser(
        "differential", help="Run the four differential-measurement presets"
    )
    add_common_arguments(parser)
    parser.set_defaults(command="differential", handler=run)


def run(config: RunConfig) -> int:
    scenarios = differential_presets(config.factor_scale, config.n_deriv, config.n_valid)
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
