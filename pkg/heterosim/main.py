"""heterosim command-line entry point."""
import argparse
import logging
import sys
from typing import Optional, Sequence

from heterosim import __version__
from heterosim.commands import (
    brier_sweep,
    config_from_args,
    differential,
    grid,
    large_sample,
    report,
    scenario,
)
from heterosim.config import RunConfig
from heterosim.exceptions import HeterosimError

logger = logging.getLogger("heterosim")

SUBCOMMANDS = (grid, differential, large_sample, brier_sweep, scenario, report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heterosim",
        description="Measurement heterogeneity simulations for logistic prediction models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in SUBCOMMANDS:
        module.register(subparsers)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level)


def parse_config(argv: Sequence[str]) -> RunConfig:
    """RunConfig for a command line (flags override --config values)."""
    args = build_parser().parse_args(list(argv))
    return config_from_args(args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(list(argv) if argv is not None else None)
    configure_logging(args.verbose, args.quiet)
    try:
        config = config_from_args(args)
        logger.debug(f"Run configuration: {config.model_dump(exclude={'scenarios'})}")
        return args.handler(config)
    except HeterosimError as e:
        logger.error(f"❌ {e.error}: {e.message}")
        return 2
    except Exception as e:
        logger.exception(f"❌ Unexpected failure: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
