"""CLI subcommands. Each module exposes `register(subparsers)` and `run(config) -> int`."""
import argparse
from pathlib import Path
from typing import Any

from heterosim.config import RunConfig
from heterosim.configfile import load_config_file, validate_config
from heterosim.reports import written_summary

# argparse destination -> RunConfig field (or (section, field))
_RUN_FLAGS = {
    "seed": "seed",
    "reps": "reps",
    "n_deriv": "n_deriv",
    "n_valid": "n_valid",
    "workers": "workers",
    "outdir": "outdir",
    "factor_scale": "factor_scale",
    "curve_reps": "curve_reps",
    "svg": "svg",
}
_LOESS_FLAGS = {"loess_span": "span", "loess_degree": "degree", "loess_grid": "grid_points"}


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Options shared by every subcommand; unset options fall back to the config file."""
    parser.add_argument("--config", type=Path, help="Run configuration file")
    parser.add_argument("--seed", type=int, help="Master seed (required)")
    parser.add_argument("--reps", type=int, help="Replicates per scenario (default 10000)")
    parser.add_argument("--n-deriv", type=int, help="Derivation sample size (default 2000)")
    parser.add_argument("--n-valid", type=int, help="Validation sample size (default 2000)")
    parser.add_argument("--workers", type=int, help="Worker processes (default 1)")
    parser.add_argument("--outdir", type=Path, help="Output directory")
    parser.add_argument(
        "--factor-scale",
        choices=["variance", "sd"],
        help="Read grid error factors as variances (default) or standard deviations",
    )
    parser.add_argument("--curve-reps", type=int, help="Calibration curves kept per scenario")
    parser.add_argument("--svg", action="store_true", default=None, help="Also write SVG overlays")
    parser.add_argument("--loess-span", type=float)
    parser.add_argument("--loess-degree", type=int)
    parser.add_argument("--loess-grid", type=int)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    """Explicitly given flags as RunConfig values."""
    values: dict[str, Any] = {"command": args.command}
    for dest, field in _RUN_FLAGS.items():
        if getattr(args, dest, None) is not None:
            values[field] = getattr(args, dest)
    loess = {
        field: getattr(args, dest)
        for dest, field in _LOESS_FLAGS.items()
        if getattr(args, dest, None) is not None
    }
    if loess:
        values["loess"] = loess
    extra = getattr(args, "extra_overrides", None)
    if extra is not None:
        for key, value in extra(args).items():
            if isinstance(value, dict):
                values.setdefault(key, {}).update(value)
            else:
                values[key] = value
    return values


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = overrides_from_args(args)
    if args.config is not None:
        return load_config_file(args.config, overrides)
    return validate_config(overrides)


def report_written(logger: Any, paths: list[Path], outdir: Path) -> None:
    logger.info(f"✅ {len(paths)} files in {outdir}: {written_summary(paths, outdir)}")
