"""Measurement error models: random, systematic and differential.

A measurement W of an exact predictor X follows

    W = psi_y + theta_y * X + eps,   eps ~ N(0, var_eps_y)

with parameters selected by the outcome class y. Random (classical) error has
psi = 0 and theta = 1 in both classes; systematic error shares (psi, theta,
var_eps) across classes; differential error lets them differ.
"""
import logging
import math
from typing import Literal

import numpy as np
import numpy.typing as npt

from heterosim.exceptions import DimensionMismatchError, InvalidParameterError
from heterosim.models import ClassParams, GroupStats, MeasurementModel

logger = logging.getLogger(__name__)

FactorScale = Literal["variance", "sd"]


def _check_variance(var_eps: float) -> float:
    if not math.isfinite(var_eps) or var_eps < 0:
        raise InvalidParameterError(
            f"error variance must be finite and non-negative, got {var_eps}",
            {"var_eps": var_eps},
        )
    return float(var_eps)


def make_random(var_eps: float) -> MeasurementModel:
    """Classical error W = X + eps in both classes."""
    params = ClassParams(psi=0.0, theta=1.0, var_eps=_check_variance(var_eps))
    return MeasurementModel(params_noncase=params, params_case=params)


def make_systematic(psi: float, theta: float, var_eps: float) -> MeasurementModel:
    """Non-differential W = psi + theta * X + eps."""
    if not (math.isfinite(psi) and math.isfinite(theta)):
        raise InvalidParameterError("psi and theta must be finite", {"psi": psi, "theta": theta})
    params = ClassParams(psi=psi, theta=theta, var_eps=_check_variance(var_eps))
    return MeasurementModel(params_noncase=params, params_case=params)


def make_differential(noncase: ClassParams, case: ClassParams) -> MeasurementModel:
    """General model with separate parameters for non-cases (y=0) and cases (y=1)."""
    _check_variance(noncase.var_eps)
    _check_variance(case.var_eps)
    return MeasurementModel(params_noncase=noncase, params_case=case)


def exact() -> MeasurementModel:
    """W identical to X."""
    return make_random(0.0)


def factor_variance(value: float, scale: FactorScale = "variance") -> float:
    """Error variance implied by a grid factor value."""
    if scale == "sd":
        if value < 0:
            raise InvalidParameterError(f"standard deviation must be non-negative, got {value}")
        return float(value) ** 2
    return _check_variance(value)


def scaled_random(value: float, scale: FactorScale = "variance") -> MeasurementModel:
    """Random-error model from a grid factor value read under `scale`."""
    return make_random(factor_variance(value, scale))


def apply(model: MeasurementModel, x: float, y: int, rng: np.random.Generator) -> float:
    """Measure one exact value x of an individual with outcome y."""
    if y not in (0, 1):
        raise InvalidParameterError(f"outcome must be 0 or 1, got {y}")
    p = model.for_class(int(y))
    # one draw per call even when var_eps is 0, so streams stay aligned across models
    z = rng.standard_normal()
    return float(p.psi + p.theta * x + p.sd_eps * z)


def apply_vector(
    model: MeasurementModel,
    x: npt.ArrayLike,
    y: npt.ArrayLike,
    rng: np.random.Generator,
) -> np.ndarray:
    """Measure a vector of exact values; noise is drawn in index order."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y)
    if x_arr.ndim != 1 or x_arr.shape != y_arr.shape:
        raise DimensionMismatchError(
            f"x and y must be 1-D of equal length, got {x_arr.shape} and {y_arr.shape}"
        )
    if y_arr.size and not np.all((y_arr == 0) | (y_arr == 1)):
        raise InvalidParameterError("outcomes must be 0 or 1")

    z = rng.standard_normal(x_arr.shape[0])
    case = y_arr == 1
    n, c = model.params_noncase, model.params_case
    psi = np.where(case, c.psi, n.psi)
    theta = np.where(case, c.theta, n.theta)
    sd = np.where(case, c.sd_eps, n.sd_eps)
    return psi + theta * x_arr + sd * z


def transform_stats(stats: GroupStats, model: MeasurementModel) -> GroupStats:
    """Class moments of W implied by the class moments of X."""
    n, c = model.params_noncase, model.params_case
    return GroupStats(
        mean_case=c.psi + c.theta * stats.mean_case,
        mean_noncase=n.psi + n.theta * stats.mean_noncase,
        var_case=c.theta**2 * stats.var_case + c.var_eps,
        var_noncase=n.theta**2 * stats.var_noncase + n.var_eps,
    )
