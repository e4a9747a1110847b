"""Report emission: CSV tables, calibration-curve point files and SVG overlays."""
import logging
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from heterosim.exceptions import ReportError
from heterosim.models import (
    FAMILIES,
    SUMMARY_COLUMNS,
    BrierSweepRow,
    CalibrationCurve,
    GridResult,
    GridSummary,
    LargeSampleResult,
    PooledRow,
)
from heterosim.simgrid.aggregate import pool_rows, replicates_frame, summarize_frame
from heterosim.simgrid.presets import DIFFERENTIAL_PRESET_IDS

logger = logging.getLogger(__name__)

SUMMARY_FLOAT_FORMAT = "%.6g"
REPLICATE_FLOAT_FORMAT = "%.12g"

POOLED_COLUMNS: tuple[str, ...] = (
    "family",
    "sigma_order",
    "psi_v",
    "theta_v",
    "n_cells",
    *SUMMARY_COLUMNS[1:],
)
LARGE_SAMPLE_COLUMNS: tuple[str, ...] = (
    "panel",
    "mode",
    "n",
    "c_statistic",
    "calib_slope",
    "citl",
    "brier",
    "brier_calibration",
    "brier_refinement",
)


class ReportWriter:
    """Owns an output directory and writes report files into it."""

    def __init__(self, outdir: Path):
        self.outdir = Path(outdir)
        self.curves_path = self.outdir / "curves"
        self.written: list[Path] = []

    def _ensure_directories(self) -> None:
        try:
            self.curves_path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"❌ Failed to create output directory {self.outdir}: {e}")
            raise ReportError(
                f"output directory is not writable: {self.outdir}", {"reason": str(e)}
            ) from e

    def write_frame(
        self, frame: pd.DataFrame, name: str, float_format: str = SUMMARY_FLOAT_FORMAT
    ) -> Path:
        """Write one UTF-8, comma-delimited table."""
        self._ensure_directories()
        path = self.outdir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        try:
            frame.to_csv(
                path,
                index=False,
                float_format=float_format,
                lineterminator="\n",
                encoding="utf-8",
            )
        except OSError as e:
            raise ReportError(f"failed to write {path}", {"reason": str(e)}) from e
        self.written.append(path)
        logger.info(f"✅ Wrote {path} ({len(frame)} rows)")
        return path

    def write_tables(self, tables: Sequence[tuple[str, pd.DataFrame]]) -> list[Path]:
        return [self.write_frame(frame, name) for name, frame in tables]

    def write_overlay(self, scenario_id: str, curves: Sequence[CalibrationCurve]) -> Path:
        from heterosim.utils.plotting import overlay_curves

        self._ensure_directories()
        path = overlay_curves(curves, scenario_id, self.curves_path / f"{scenario_id}.svg")
        self.written.append(path)
        return path


def summary_frame(summaries: Sequence[GridSummary]) -> pd.DataFrame:
    return pd.DataFrame([s.model_dump() for s in summaries], columns=list(SUMMARY_COLUMNS))


def pooled_frame(rows: Sequence[PooledRow]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in rows], columns=list(POOLED_COLUMNS))


def curves_frame(curves: Sequence[tuple[int, CalibrationCurve]]) -> pd.DataFrame:
    """Points of every kept curve of one scenario, long format."""
    return pd.DataFrame(
        [
            {"rep": rep, "predicted": p, "observed": o}
            for rep, curve in curves
            for p, o in zip(curve.predicted, curve.observed)
        ],
        columns=["rep", "predicted", "observed"],
    )


def table_frames(frame: pd.DataFrame) -> list[tuple[str, pd.DataFrame]]:
    """summary.csv, table3.csv (pooled grid rows) and table4.csv (differential presets)."""
    summaries = summarize_frame(frame)
    tables = [("summary.csv", summary_frame(summaries))]

    pooled: list[PooledRow] = []
    for family in FAMILIES:
        family_rows = frame[(frame["family"] == family) & frame["var_eps_d"].notna()]
        if not family_rows.empty:
            pooled.extend(pool_rows(frame, family))
    if pooled:
        tables.append(("table3.csv", pooled_frame(pooled)))

    presets = [s for i in DIFFERENTIAL_PRESET_IDS for s in summaries if s.scenario_id == i]
    if presets:
        tables.append(("table4.csv", summary_frame(presets)))
    return tables


def emit_reports(result: GridResult, outdir: Path, svg: bool = False) -> list[Path]:
    """Write every report for a finished run; nothing is written unless every table was built."""
    if not result.replicates:
        raise ReportError("no replicate results to report")

    frame = replicates_frame(result.replicates, result.scenarios)
    tables = table_frames(frame)
    curves: dict[str, list[tuple[int, CalibrationCurve]]] = {}
    for replicate in result.replicates:
        if replicate.curve is not None:
            curves.setdefault(replicate.scenario_id, []).append(
                (replicate.rep_index, replicate.curve)
            )
    tables.extend((f"curves/{sid}.csv", curves_frame(kept)) for sid, kept in curves.items())

    writer = ReportWriter(outdir)
    writer.write_frame(frame, "replicates.csv", REPLICATE_FLOAT_FORMAT)
    writer.write_tables(tables)
    if svg:
        for scenario_id, kept in curves.items():
            writer.write_overlay(scenario_id, [c for _, c in kept])
    return writer.written


def emit_report_from_replicates(replicates_path: Path, outdir: Path) -> list[Path]:
    """Re-aggregate an existing replicates.csv."""
    try:
        frame = pd.read_csv(replicates_path, keep_default_na=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ReportError(f"cannot read {replicates_path}", {"reason": str(e)}) from e
    if frame.empty:
        raise ReportError(f"{replicates_path} holds no replicates")
    missing = {"scenario_id", "family", "var_eps_d", "excluded", "slope_valid"} - set(frame.columns)
    if missing:
        raise ReportError(f"{replicates_path} is missing columns {sorted(missing)}")
    tables = table_frames(frame)
    writer = ReportWriter(outdir)
    writer.write_tables(tables)
    return writer.written


def emit_large_sample(result: LargeSampleResult, outdir: Path, svg: bool = False) -> list[Path]:
    rows = []
    for mode, report in (
        ("derivation", result.derivation),
        ("transported", result.transported),
        ("reestimated", result.reestimated),
    ):
        rows.append(
            {
                "panel": result.panel,
                "mode": mode,
                "n": report.n,
                "c_statistic": report.c_statistic,
                "calib_slope": report.calib_slope,
                "citl": report.citl,
                "brier": report.brier.total,
                "brier_calibration": report.brier.calibration_term,
                "brier_refinement": report.brier.refinement_term,
            }
        )
    tables = [("large_sample.csv", pd.DataFrame(rows, columns=list(LARGE_SAMPLE_COLUMNS)))]
    curves = {
        f"{result.panel}_{mode}": curve
        for mode, curve in (
            ("transported", result.transported_curve),
            ("reestimated", result.reestimated_curve),
        )
        if curve is not None
    }
    tables.extend((f"curves/{name}.csv", curves_frame([(0, c)])) for name, c in curves.items())

    writer = ReportWriter(outdir)
    writer.write_tables(tables)
    if svg:
        for name, curve in curves.items():
            writer.write_overlay(name, [curve])
    return writer.written


def emit_brier_sweep(rows: Sequence[BrierSweepRow], outdir: Path) -> list[Path]:
    if not rows:
        raise ReportError("no sweep rows to report")
    writer = ReportWriter(outdir)
    frame = pd.DataFrame([r.model_dump() for r in rows])
    writer.write_frame(frame, "brier_sweep.csv")
    return writer.written


def written_summary(paths: Sequence[Path], outdir: Optional[Path] = None) -> str:
    """One-line listing of written files, relative to outdir when given."""
    names = [str(p.relative_to(outdir)) if outdir else str(p) for p in paths]
    return ", ".join(names)
