"""Predictive performance measures.

Discrimination (empirical concordance, binormal AUC and its change under a
measurement model), overall accuracy (Brier score with its calibration and
refinement components) and calibration (recalibration slope,
calibration-in-the-large, loess calibration curves).
"""
import logging
import math

import numpy as np
import numpy.typing as npt
from scipy import special, stats

from heterosim import glm
from heterosim.exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    UndefinedMetricError,
)
from heterosim.measurement import transform_stats
from heterosim.models import (
    BrierDecomposition,
    CalibrationCurve,
    GroupStats,
    LinearPredictor,
    MeasurementModel,
    PerformanceReport,
)

logger = logging.getLogger(__name__)

MIN_CURVE_POINTS = 50


def _paired(a: npt.ArrayLike, b: npt.ArrayLike, names: str) -> tuple[np.ndarray, np.ndarray]:
    a_arr = np.asarray(a, dtype=float).ravel()
    b_arr = np.asarray(b, dtype=float).ravel()
    if a_arr.shape != b_arr.shape:
        raise DimensionMismatchError(
            f"{names} must have equal length, got {a_arr.shape[0]} and {b_arr.shape[0]}"
        )
    return a_arr, b_arr


def normal_cdf(z: float) -> float:
    """Standard normal CDF (scipy's ndtr, accurate to double precision)."""
    return float(special.ndtr(z))


def concordance(scores: npt.ArrayLike, y: npt.ArrayLike) -> float:
    """Fraction of case/non-case pairs ranked correctly; ties count one half.

    Computed from mid-ranks (Mann-Whitney U), which equals pair enumeration exactly.
    """
    s, y_arr = _paired(scores, y, "scores and outcomes")
    cases = y_arr == 1
    n1 = int(cases.sum())
    n0 = s.shape[0] - n1
    if n1 == 0 or n0 == 0:
        raise UndefinedMetricError("concordance needs both cases and non-cases")
    ranks = stats.rankdata(s, method="average")
    u = ranks[cases].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def group_stats(values: npt.ArrayLike, y: npt.ArrayLike) -> GroupStats:
    """Class-wise means and sample variances (n - 1 denominators)."""
    v, y_arr = _paired(values, y, "values and outcomes")
    case_v = v[y_arr == 1]
    noncase_v = v[y_arr == 0]
    if case_v.size < 2 or noncase_v.size < 2:
        raise UndefinedMetricError("each class needs at least two observations")
    return GroupStats(
        mean_case=float(case_v.mean()),
        mean_noncase=float(noncase_v.mean()),
        var_case=float(case_v.var(ddof=1)),
        var_noncase=float(noncase_v.var(ddof=1)),
    )


def binormal_auc(group: GroupStats) -> float:
    """Phi of the standardized case/non-case mean difference."""
    total_var = group.var_case + group.var_noncase
    if total_var <= 0.0:
        raise UndefinedMetricError("binormal AUC needs positive total variance")
    return normal_cdf((group.mean_case - group.mean_noncase) / math.sqrt(total_var))


def delta_auc(stats_x: GroupStats, model: MeasurementModel) -> float:
    """Change in binormal AUC when X is replaced by its measurement W."""
    return binormal_auc(transform_stats(stats_x, model)) - binormal_auc(stats_x)


def brier(probs: npt.ArrayLike, y: npt.ArrayLike) -> BrierDecomposition:
    """Brier score split into calibration and refinement terms.

    (y - p)^2 = (y - p)(1 - 2p) + p(1 - p) holds pointwise for binary y.
    """
    p, y_arr = _paired(probs, y, "probabilities and outcomes")
    if p.size == 0:
        raise UndefinedMetricError("Brier score of an empty sample")
    if np.any((p < 0.0) | (p > 1.0)):
        raise InvalidParameterError("probabilities must lie in [0, 1]")
    resid = y_arr - p
    return BrierDecomposition(
        total=float(np.mean(resid**2)),
        calibration_term=float(np.mean(resid * (1.0 - 2.0 * p))),
        refinement_term=float(np.mean(p * (1.0 - p))),
    )


def expected_delta_bs(probs_w: npt.ArrayLike, probs_x: npt.ArrayLike) -> float:
    """Expected Brier change under perfect calibration: refinement(w) - refinement(x)."""
    pw, px = _paired(probs_w, probs_x, "probability vectors")
    return float(np.mean(pw * (1.0 - pw)) - np.mean(px * (1.0 - px)))


def loess_calibration_curve(
    probs: npt.ArrayLike,
    y: npt.ArrayLike,
    grid: int = 100,
    span: float = 0.75,
    degree: int = 1,
) -> CalibrationCurve:
    """Local polynomial (tricube-weighted) smooth of y on predicted probability.

    Evaluated at `grid` equally spaced points over the observed prediction range.
    """
    p, y_arr = _paired(probs, y, "probabilities and outcomes")
    n = p.shape[0]
    if n < MIN_CURVE_POINTS:
        raise InvalidParameterError(
            f"calibration curve needs at least {MIN_CURVE_POINTS} observations, got {n}"
        )
    if grid < 2 or not 0.0 < span <= 1.0 or degree not in (1, 2):
        raise InvalidParameterError(
            "invalid loess settings", {"grid": grid, "span": span, "degree": degree}
        )

    q = min(n, max(degree + 1, math.ceil(span * n)))
    points = np.linspace(p.min(), p.max(), grid)
    fitted = np.empty(grid)
    for i, x0 in enumerate(points):
        dist = np.abs(p - x0)
        h = np.partition(dist, q - 1)[q - 1]
        if h <= 0.0:
            fitted[i] = y_arr[dist == 0.0].mean()
            continue
        u = dist / h
        weights = np.where(u < 1.0, (1.0 - u**3) ** 3, 0.0)
        keep = weights > 0.0
        centred = p[keep] - x0
        design = np.vander(centred, degree + 1, increasing=True)
        root_w = np.sqrt(weights[keep])
        coef, *_ = np.linalg.lstsq(design * root_w[:, None], y_arr[keep] * root_w, rcond=None)
        fitted[i] = coef[0]

    return CalibrationCurve(
        predicted=tuple(float(v) for v in points),
        observed=tuple(float(v) for v in fitted),
        span=span,
        degree=degree,
    )


def performance_report(lp: LinearPredictor | npt.ArrayLike, y: npt.ArrayLike) -> PerformanceReport:
    """All out-of-sample measures for one linear predictor on one sample."""
    values = lp.values if isinstance(lp, LinearPredictor) else np.asarray(lp, dtype=float)
    values, y_arr = _paired(values, y, "linear predictor and outcomes")
    probs = np.clip(special.expit(values), glm.PROB_CLAMP, 1.0 - glm.PROB_CLAMP)

    recal = glm.recalibration_fit(values, y_arr)
    offset_fit = glm.citl_fit(values, y_arr)
    if not (recal.converged and offset_fit.converged):
        logger.debug("Recalibration did not converge for this sample")

    return PerformanceReport(
        c_statistic=concordance(values, y_arr),
        brier=brier(probs, y_arr),
        calib_slope=recal.beta_hat[0],
        citl=offset_fit.alpha_hat,
        n=int(y_arr.shape[0]),
        n_events=int(y_arr.sum()),
        converged=recal.converged and offset_fit.converged,
    )
