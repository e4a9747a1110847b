"""Replicate tables and their aggregation into scenario summaries and pooled rows."""
import logging
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from heterosim.exceptions import ReportError
from heterosim.models import (
    GridSummary,
    PooledRow,
    ReplicateResult,
    Scenario,
)

logger = logging.getLogger(__name__)

FACTOR_COLUMNS: tuple[str, ...] = ("var_eps_d", "psi_v", "theta_v", "var_eps_v")

REPLICATE_COLUMNS: tuple[str, ...] = (
    "scenario_id",
    "family",
    "rho",
    *FACTOR_COLUMNS,
    "rep",
    "excluded",
    "exclusion_reason",
    "c_deriv",
    "c_valid",
    "slope_deriv",
    "slope_valid",
    "citl_deriv",
    "citl_valid",
    "brier_deriv",
    "brier_valid",
    "brier_cal_deriv",
    "brier_ref_deriv",
    "brier_cal_valid",
    "brier_ref_valid",
    "events_deriv",
    "events_valid",
    "alpha_hat",
    "beta_hat_1",
    "beta_hat_2",
)

SIGMA_ORDERS: tuple[str, ...] = ("lt", "eq", "gt")


def _replicate_row(result: ReplicateResult, scenario: Scenario) -> dict[str, Any]:
    factors = scenario.factors
    row: dict[str, Any] = {
        "scenario_id": result.scenario_id,
        "family": scenario.family,
        "rho": scenario.rho,
        "rep": result.rep_index,
        "excluded": result.excluded,
        "exclusion_reason": result.exclusion_reason or "",
    }
    for name in FACTOR_COLUMNS:
        row[name] = getattr(factors, name) if factors is not None else np.nan

    fit = result.deriv_fit
    betas = list(fit.beta_hat) if fit is not None else []
    row["alpha_hat"] = fit.alpha_hat if fit is not None else np.nan
    row["beta_hat_1"] = betas[0] if betas else np.nan
    row["beta_hat_2"] = betas[1] if len(betas) > 1 else np.nan

    for suffix, report in (("deriv", result.in_sample), ("valid", result.out_of_sample)):
        if report is None:
            for prefix in ("c", "slope", "citl", "brier", "brier_cal", "brier_ref", "events"):
                row[f"{prefix}_{suffix}"] = np.nan
            continue
        row[f"c_{suffix}"] = report.c_statistic
        row[f"slope_{suffix}"] = report.calib_slope
        row[f"citl_{suffix}"] = report.citl
        row[f"brier_{suffix}"] = report.brier.total
        row[f"brier_cal_{suffix}"] = report.brier.calibration_term
        row[f"brier_ref_{suffix}"] = report.brier.refinement_term
        row[f"events_{suffix}"] = report.n_events
    return row


def replicates_frame(
    replicates: Sequence[ReplicateResult], scenarios: Sequence[Scenario]
) -> pd.DataFrame:
    """One row per replicate, with the scenario's family and grid factors."""
    by_id = {s.id: s for s in scenarios}
    rows = []
    for result in replicates:
        if result.scenario_id not in by_id:
            raise ReportError(f"replicate refers to unknown scenario {result.scenario_id}")
        rows.append(_replicate_row(result, by_id[result.scenario_id]))
    return pd.DataFrame(rows, columns=list(REPLICATE_COLUMNS))


def _mean(values: pd.Series) -> Optional[float]:
    return float(values.mean()) if len(values) else None


def _sd(values: pd.Series) -> Optional[float]:
    return float(values.std(ddof=1)) if len(values) >= 2 else None


def _performance_stats(group: pd.DataFrame) -> dict[str, Any]:
    excluded = group["excluded"].astype(bool)
    kept = group[~excluded]
    slope = kept["slope_valid"]
    return {
        "c_deriv_mean": _mean(kept["c_deriv"]),
        "c_deriv_sd": _sd(kept["c_deriv"]),
        "c_valid_mean": _mean(kept["c_valid"]),
        "c_valid_sd": _sd(kept["c_valid"]),
        "slope_median": float(slope.median()) if len(slope) else None,
        "slope_sd": _sd(slope),
        "citl_mean": _mean(kept["citl_valid"]),
        "citl_sd": _sd(kept["citl_valid"]),
        "brier_deriv_mean": _mean(kept["brier_deriv"]),
        "brier_deriv_sd": _sd(kept["brier_deriv"]),
        "brier_valid_mean": _mean(kept["brier_valid"]),
        "brier_valid_sd": _sd(kept["brier_valid"]),
        "n_excluded": int(excluded.sum()),
        "n_replicates": int(len(kept)),
    }


def summarize_frame(frame: pd.DataFrame) -> list[GridSummary]:
    """Per-scenario means, sds and median slope over non-excluded replicates."""
    summaries = []
    for scenario_id, group in frame.groupby("scenario_id", sort=True):
        summaries.append(GridSummary(scenario_id=str(scenario_id), **_performance_stats(group)))
    return summaries


def sigma_order(frame: pd.DataFrame) -> pd.Series:
    """lt / eq / gt comparison of derivation and validation error factors."""
    d, v = frame["var_eps_d"], frame["var_eps_v"]
    return pd.Series(
        np.select([d < v, d > v], ["lt", "gt"], default="eq"), index=frame.index
    )


def pool_rows(frame: pd.DataFrame, family: str = "single") -> list[PooledRow]:
    """Table-style rows pooling replicates over all cells with the same
    (sigma order, psi_v, theta_v); two-predictor cells also pool over rho.
    """
    cells = frame[(frame["family"] == family) & frame["var_eps_d"].notna()].copy()
    if cells.empty:
        raise ReportError(f"no grid replicates to pool for family {family}")
    cells["sigma_order"] = sigma_order(cells)

    rows = []
    for psi in sorted(cells["psi_v"].unique()):
        for theta in sorted(cells["theta_v"].unique()):
            for order in SIGMA_ORDERS:
                group = cells[
                    (cells["psi_v"] == psi)
                    & (cells["theta_v"] == theta)
                    & (cells["sigma_order"] == order)
                ]
                if group.empty:
                    continue
                rows.append(
                    PooledRow(
                        family=family,  # type: ignore[arg-type]
                        sigma_order=order,  # type: ignore[arg-type]
                        psi_v=float(psi),
                        theta_v=float(theta),
                        n_cells=int(group["scenario_id"].nunique()),
                        **_performance_stats(group),
                    )
                )
    logger.debug(f"Pooled {len(cells)} replicates of {family} into {len(rows)} rows")
    return rows

