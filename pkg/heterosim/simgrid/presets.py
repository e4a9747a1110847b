"""Named experiments: differential-measurement presets, large-sample panels and the
decomposed Brier sweep over relative measurement variance.
"""
import logging
from typing import Callable, Optional, Sequence

import numpy as np

from heterosim import glm
from heterosim.cohort import (
    large_sample_population,
    event_probabilities,
    measure,
    sample_predictors,
)
from heterosim.config import DEFAULT_MV_PERCENTS, LoessSettings
from heterosim.exceptions import InvalidParameterError
from heterosim.measurement import (
    FactorScale,
    exact,
    factor_variance,
    make_differential,
    make_random,
    make_systematic,
)
from heterosim.metrics import brier, loess_calibration_curve, performance_report
from heterosim.models import (
    BrierSweepRow,
    ClassParams,
    FittedModel,
    GridResult,
    GridSummary,
    LargeSampleResult,
    MeasurementModel,
    Scenario,
)
from heterosim.simgrid.runner import run_study
from heterosim.utils.rng import task_streams

logger = logging.getLogger(__name__)

# Differential measurement presets

DEFAULT_ERROR_VARIANCE = 1.0
DIFFERENTIAL_CASE_LEVELS: tuple[float, ...] = (0.5, 2.0)
DIFFERENTIAL_PRESET_IDS: tuple[str, ...] = (
    "differential_derivation_case0.5",
    "differential_derivation_case2",
    "differential_validation_case0.5",
    "differential_validation_case2",
)


def differential_presets(
    factor_scale: FactorScale = "variance", n_deriv: int = 2000, n_valid: int = 2000
) -> list[Scenario]:
    """Cases measured with a different error variance at derivation or at validation.

    Every other error variance is 1.0.
    """
    base = factor_variance(DEFAULT_ERROR_VARIANCE, factor_scale)
    homogeneous = make_random(base)
    scenarios = []
    for setting in ("derivation", "validation"):
        for level in DIFFERENTIAL_CASE_LEVELS:
            differential = make_differential(
                ClassParams(var_eps=base),
                ClassParams(var_eps=factor_variance(level, factor_scale)),
            )
            deriv, valid = (
                (differential, homogeneous)
                if setting == "derivation"
                else (homogeneous, differential)
            )
            scenarios.append(
                Scenario(
                    id=f"differential_{setting}_case{level:g}",
                    family="single_differential",
                    deriv_models=(deriv,),
                    valid_models=(valid,),
                    n_deriv=n_deriv,
                    n_valid=n_valid,
                )
            )
    return scenarios


def run_differential_presets(
    reps: int,
    master_seed: int,
    workers: int = 1,
    factor_scale: FactorScale = "variance",
    curve_reps: int = 0,
    loess: Optional[LoessSettings] = None,
) -> GridResult:
    return run_study(
        differential_presets(factor_scale), reps, master_seed, workers, curve_reps, loess
    )


def differential_preset_summaries(
    reps: int, master_seed: int, workers: int = 1
) -> list[GridSummary]:
    """Summaries of the four differential presets in preset order."""
    result = run_differential_presets(reps, master_seed, workers)
    by_id = {s.scenario_id: s for s in result.summaries}
    return [by_id[i] for i in DIFFERENTIAL_PRESET_IDS]


# Large-sample panels

DERIVATION_ERROR_VARIANCE = 0.5
PanelModels = tuple[MeasurementModel, MeasurementModel]


def _random_panel(valid_var: float) -> Callable[[float], PanelModels]:
    return lambda _: (make_random(DERIVATION_ERROR_VARIANCE), make_random(valid_var))


def _systematic_panel(psi: float, theta: float) -> Callable[[float], PanelModels]:
    return lambda _: (
        make_random(DERIVATION_ERROR_VARIANCE),
        make_systematic(psi, theta, DERIVATION_ERROR_VARIANCE),
    )


def _differential_panel(
    setting: str, case: ClassParams
) -> Callable[[float], PanelModels]:
    differential = make_differential(ClassParams(var_eps=DERIVATION_ERROR_VARIANCE), case)
    homogeneous = make_random(DERIVATION_ERROR_VARIANCE)
    if setting == "derivation":
        return lambda _: (differential, homogeneous)
    return lambda _: (homogeneous, differential)


def transport_models(direction: str, mv_percent: float, var_x: float) -> PanelModels:
    """Derivation and validation measurements at a relative measurement variance.

    mv_percent = 100 * Var(W_validation) / Var(W_derivation).
    """
    if mv_percent <= 0:
        raise InvalidParameterError(
            f"relative measurement variance must be positive, got {mv_percent}"
        )
    ratio = mv_percent / 100.0
    if direction == "x_to_w":
        if ratio < 1.0:
            raise InvalidParameterError("x_to_w needs mv_percent >= 100")
        return exact(), make_random(var_x * (ratio - 1.0))
    if direction == "w_to_x":
        if ratio > 1.0:
            raise InvalidParameterError("w_to_x needs mv_percent <= 100")
        return make_random(var_x * (1.0 / ratio - 1.0)), exact()
    if direction == "w_to_w":
        var_w_deriv = var_x + DERIVATION_ERROR_VARIANCE
        var_valid = var_w_deriv * ratio - var_x
        if var_valid < 0:
            raise InvalidParameterError(
                f"w_to_w needs mv_percent >= {100 * var_x / var_w_deriv:g}"
            )
        return make_random(DERIVATION_ERROR_VARIANCE), make_random(var_valid)
    if direction == "x_to_x":
        return exact(), exact()
    raise InvalidParameterError(f"unknown transport direction: {direction}")


def _transport_panel(direction: str) -> Callable[[float], PanelModels]:
    var_x = large_sample_population()[0].covariance[0][0]
    return lambda mv: transport_models(direction, mv, var_x)


PANELS: dict[str, Callable[[float], PanelModels]] = {
    "random_less_precise": _random_panel(2.0),
    "random_consistent": _random_panel(DERIVATION_ERROR_VARIANCE),
    "random_more_precise": _random_panel(0.0),
    "additive_psi0": _systematic_panel(0.0, 1.0),
    "additive_psi025": _systematic_panel(0.25, 1.0),
    "multiplicative_theta05": _systematic_panel(0.0, 0.5),
    "multiplicative_theta1": _systematic_panel(0.0, 1.0),
    "multiplicative_theta2": _systematic_panel(0.0, 2.0),
    "differential_validation_less_precise": _differential_panel(
        "validation", ClassParams(var_eps=2.0)
    ),
    "differential_validation_more_precise": _differential_panel(
        "validation", ClassParams(var_eps=0.0)
    ),
    "differential_validation_weaker": _differential_panel(
        "validation", ClassParams(theta=0.5, var_eps=DERIVATION_ERROR_VARIANCE)
    ),
    "differential_derivation_more_precise": _differential_panel(
        "derivation", ClassParams(var_eps=0.0)
    ),
    "differential_derivation_less_precise": _differential_panel(
        "derivation", ClassParams(var_eps=2.0)
    ),
    "differential_derivation_weaker": _differential_panel(
        "derivation", ClassParams(theta=0.5, var_eps=DERIVATION_ERROR_VARIANCE)
    ),
    "transport_x_to_w": _transport_panel("x_to_w"),
    "transport_w_to_w": _transport_panel("w_to_w"),
    "transport_w_to_x": _transport_panel("w_to_x"),
}


def panel_models(panel: str, mv_percent: float = 200.0) -> PanelModels:
    if panel not in PANELS:
        raise InvalidParameterError(f"unknown panel: {panel}", {"allowed": sorted(PANELS)})
    return PANELS[panel](mv_percent)


def _fit_or_warn(design: np.ndarray, y: np.ndarray, label: str) -> FittedModel:
    fit = glm.fit(design, y)
    if not fit.converged:
        logger.warning(f"⚠️ {label} fit did not converge after {fit.iterations} iterations")
    return fit


def run_large_sample(
    panel: str,
    n: int,
    master_seed: int,
    mv_percent: float = 200.0,
    loess: Optional[LoessSettings] = None,
    curves: bool = True,
) -> LargeSampleResult:
    """One large sample carrying a derivation and a validation measurement of the same x.

    The model derived on w_D is evaluated on w_V as-is (transported) and after
    refitting on w_V (re-estimated).
    """
    deriv_model, valid_model = panel_models(panel, mv_percent)
    spec, outcome = large_sample_population()
    rng_pop, rng_deriv, rng_valid = task_streams(
        master_seed, "large_sample", panel, n, n_streams=3
    )
    logger.info(f"🚀 Large-sample panel {panel} (n={n})")

    x = sample_predictors(n, spec, rng_pop)
    y = (rng_pop.random(n) < event_probabilities(x, outcome)).astype(np.int8)
    w_deriv = measure(x, y, [deriv_model], rng_deriv)
    w_valid = measure(x, y, [valid_model], rng_valid)

    deriv_fit = _fit_or_warn(w_deriv, y, "Derivation")
    refit = _fit_or_warn(w_valid, y, "Re-estimated")
    lp_transported = glm.linear_predictor(deriv_fit, w_valid)
    lp_reestimated = glm.linear_predictor(refit, w_valid)

    transported_curve = reestimated_curve = None
    if curves:
        settings = loess or LoessSettings()
        transported_curve, reestimated_curve = (
            loess_calibration_curve(
                glm.predict_prob(model, w_valid),
                y,
                settings.grid_points,
                settings.span,
                settings.degree,
            )
            for model in (deriv_fit, refit)
        )

    result = LargeSampleResult(
        panel=panel,
        n=n,
        deriv_fit=deriv_fit,
        derivation=performance_report(glm.linear_predictor(deriv_fit, w_deriv), y),
        transported=performance_report(lp_transported, y),
        reestimated=performance_report(lp_reestimated, y),
        transported_curve=transported_curve,
        reestimated_curve=reestimated_curve,
    )
    logger.info(
        f"✅ {panel}: c {result.derivation.c_statistic:.3f} -> "
        f"{result.transported.c_statistic:.3f}, slope {result.transported.calib_slope:.3f}"
    )
    return result


# Decomposed Brier sweep

def sweep_direction(mv_percent: float) -> str:
    if mv_percent < 100.0:
        return "w_to_x"
    if mv_percent > 100.0:
        return "x_to_w"
    return "x_to_x"


def brier_sweep(
    mv_percents: Sequence[float] = DEFAULT_MV_PERCENTS,
    n: int = 1_000_000,
    master_seed: int = 0,
) -> list[BrierSweepRow]:
    """Calibration and refinement terms of re-estimated and transported models.

    Every %MV level reuses the same population draw; only measurement noise differs.
    """
    if any(mv <= 0 for mv in mv_percents):
        raise InvalidParameterError("relative measurement variances must be positive")
    spec, outcome = large_sample_population()
    var_x = spec.covariance[0][0]
    (rng_pop,) = task_streams(master_seed, "brier_sweep", n, n_streams=1)
    x = sample_predictors(n, spec, rng_pop)
    y = (rng_pop.random(n) < event_probabilities(x, outcome)).astype(np.int8)

    rows = []
    for mv in mv_percents:
        direction = sweep_direction(mv)
        deriv_model, valid_model = transport_models(direction, mv, var_x)
        rng_deriv, rng_valid = task_streams(master_seed, "brier_sweep", n, mv, n_streams=2)
        w_deriv = measure(x, y, [deriv_model], rng_deriv)
        w_valid = measure(x, y, [valid_model], rng_valid)

        deriv_fit = _fit_or_warn(w_deriv, y, f"%MV={mv:g} derivation")
        refit = _fit_or_warn(w_valid, y, f"%MV={mv:g} re-estimated")
        for mode, model in (("reestimated", refit), ("transported", deriv_fit)):
            decomposition = brier(glm.predict_prob(model, w_valid), y)
            rows.append(
                BrierSweepRow(
                    mv_percent=float(mv),
                    mode=mode,  # type: ignore[arg-type]
                    direction=direction,  # type: ignore[arg-type]
                    total=decomposition.total,
                    calibration_term=decomposition.calibration_term,
                    refinement_term=decomposition.refinement_term,
                )
            )
        logger.debug(f"Brier sweep %MV={mv:g} ({direction}) done")
    return rows
