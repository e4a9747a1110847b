"""Factorial scenario grid of the finite-sample study.

Derivation measurements are random error with variance var_eps_d. Validation
measurements follow psi_v + theta_v * X + eps with variance var_eps_v. Two
predictor families also vary the predictor correlation rho.
"""
import itertools
import logging
from typing import Iterable, Literal, Sequence

from heterosim.measurement import (
    FactorScale,
    factor_variance,
    make_differential,
    make_random,
    make_systematic,
)
from heterosim.models import (
    FAMILIES,
    ClassParams,
    Family,
    MeasurementModel,
    Scenario,
    ScenarioFactors,
)

logger = logging.getLogger(__name__)

VAR_EPS_LEVELS: tuple[float, ...] = (0.5, 1.0, 2.0)
PSI_LEVELS: tuple[float, ...] = (0.0, 0.25)
THETA_LEVELS: tuple[float, ...] = (0.5, 1.0, 2.0)
RHO_LEVELS: tuple[float, ...] = (0.0, 0.5, 0.9)

ConsistentPredictor = Literal["derivation", "validation"]


def scenario_id(family: Family, factors: ScenarioFactors, rho: float | None = None) -> str:
    """Stable identifier, e.g. `single_vd0.5_psi0_th1_vv2`."""
    parts = [family]
    if rho is not None:
        parts.append(f"rho{rho:g}")
    parts.extend(
        [
            f"vd{factors.var_eps_d:g}",
            f"psi{factors.psi_v:g}",
            f"th{factors.theta_v:g}",
            f"vv{factors.var_eps_v:g}",
        ]
    )
    return "_".join(parts)


def factor_levels() -> Iterable[ScenarioFactors]:
    """All 54 factor combinations in grid order (var_eps_d slowest)."""
    for vd, psi, theta, vv in itertools.product(
        VAR_EPS_LEVELS, PSI_LEVELS, THETA_LEVELS, VAR_EPS_LEVELS
    ):
        yield ScenarioFactors(var_eps_d=vd, psi_v=psi, theta_v=theta, var_eps_v=vv)


def _models(
    family: Family,
    factors: ScenarioFactors,
    factor_scale: FactorScale,
    consistent_predictor: ConsistentPredictor,
) -> tuple[tuple[MeasurementModel, ...], tuple[MeasurementModel, ...]]:
    var_d = factor_variance(factors.var_eps_d, factor_scale)
    var_v = factor_variance(factors.var_eps_v, factor_scale)
    deriv = make_random(var_d)
    valid = make_systematic(factors.psi_v, factors.theta_v, var_v)

    if family == "single":
        return (deriv,), (valid,)
    if family == "two_pred_both":
        return (deriv, deriv), (valid, valid)
    if family == "two_pred_one_consistent":
        steady = make_random(var_d if consistent_predictor == "derivation" else var_v)
        return (deriv, steady), (valid, steady)
    # single_differential: non-cases keep the derivation measurement
    noncase = ClassParams(psi=0.0, theta=1.0, var_eps=var_d)
    case = ClassParams(psi=factors.psi_v, theta=factors.theta_v, var_eps=var_v)
    return (deriv,), (make_differential(noncase, case),)


def build_family(
    family: Family,
    factor_scale: FactorScale = "variance",
    consistent_predictor: ConsistentPredictor = "derivation",
    n_deriv: int = 2000,
    n_valid: int = 2000,
) -> list[Scenario]:
    two_predictors = family.startswith("two_pred")
    rhos: Sequence[float | None] = RHO_LEVELS if two_predictors else (None,)
    scenarios = []
    for rho in rhos:
        for factors in factor_levels():
            deriv, valid = _models(family, factors, factor_scale, consistent_predictor)
            scenarios.append(
                Scenario(
                    id=scenario_id(family, factors, rho),
                    family=family,
                    rho=rho or 0.0,
                    deriv_models=deriv,
                    valid_models=valid,
                    n_deriv=n_deriv,
                    n_valid=n_valid,
                    factors=factors,
                )
            )
    return scenarios


def build_grid(
    families: Sequence[Family] = FAMILIES,  # type: ignore[assignment]
    factor_scale: FactorScale = "variance",
    consistent_predictor: ConsistentPredictor = "derivation",
    n_deriv: int = 2000,
    n_valid: int = 2000,
) -> list[Scenario]:
    """Scenarios for the requested families: 54 + 162 + 162 + 54 for all four."""
    scenarios: list[Scenario] = []
    for family in FAMILIES:
        if family in families:
            scenarios.extend(
                build_family(
                    family,  # type: ignore[arg-type]
                    factor_scale,
                    consistent_predictor,
                    n_deriv,
                    n_valid,
                )
            )
    logger.debug(f"Built {len(scenarios)} scenarios for {list(families)}")
    return scenarios
