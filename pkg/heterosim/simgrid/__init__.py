"""Simulation study: scenario grid, replicate runner, aggregation and named experiments."""
from heterosim.simgrid.aggregate import pool_rows, replicates_frame, summarize_frame
from heterosim.simgrid.grid import build_grid
from heterosim.simgrid.presets import (
    brier_sweep,
    differential_presets,
    run_differential_presets,
    run_large_sample,
)
from heterosim.simgrid.runner import run_grid, run_replicate, run_replicates, run_study

__all__ = [
    "brier_sweep",
    "build_grid",
    "differential_presets",
    "pool_rows",
    "replicates_frame",
    "run_differential_presets",
    "run_grid",
    "run_large_sample",
    "run_replicate",
    "run_replicates",
    "run_study",
    "summarize_frame",
]
