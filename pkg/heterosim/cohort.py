"""Synthetic populations: correlated Gaussian predictors, logistic outcomes, measurements."""
import logging
import math
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import pandas as pd
from scipy import integrate, linalg, special

from heterosim.exceptions import (
    CovarianceError,
    DimensionMismatchError,
    InvalidParameterError,
)
from heterosim.measurement import apply_vector
from heterosim.models import Cohort, MeasurementModel, OutcomeModel, PredictorSpec

logger = logging.getLogger(__name__)

SUPPORTED_RHO: dict[float, float] = {0.0: 2.3, 0.5: 2.3, 0.9: 2.1}


def standard_scenario_outcome(
    kind: Literal["single", "two_pred"], rho: float = 0.0
) -> tuple[PredictorSpec, OutcomeModel]:
    """Populations of the finite-sample study.

    single:   logit(Y) = log(4) X, X ~ N(0, 1)
    two_pred: logit(Y) = b X1 + b X2, unit variances, correlation rho;
              b = 2.3 for rho in {0, 0.5} and 2.1 for rho = 0.9
    """
    if kind == "single":
        spec = PredictorSpec(mean=(0.0,), covariance=((1.0,),))
        return spec, OutcomeModel(alpha=0.0, beta=(math.log(4.0),))
    if kind == "two_pred":
        key = float(rho)
        if key not in SUPPORTED_RHO:
            raise InvalidParameterError(
                f"unsupported predictor correlation {rho}",
                {"allowed": sorted(SUPPORTED_RHO)},
            )
        b = SUPPORTED_RHO[key]
        spec = PredictorSpec(mean=(0.0, 0.0), covariance=((1.0, key), (key, 1.0)))
        return spec, OutcomeModel(alpha=0.0, beta=(b, b))
    raise InvalidParameterError(f"unknown population kind: {kind}")


def large_sample_population() -> tuple[PredictorSpec, OutcomeModel]:
    """logit(Y) = log(8) X with X ~ N(0, 0.5) (variance)."""
    spec = PredictorSpec(mean=(0.0,), covariance=((0.5,),))
    return spec, OutcomeModel(alpha=0.0, beta=(math.log(8.0),))


def cholesky_factor(spec: PredictorSpec) -> np.ndarray:
    """Lower-triangular factor of the predictor covariance."""
    try:
        return linalg.cholesky(spec.covariance_array(), lower=True)
    except linalg.LinAlgError as e:
        raise CovarianceError(
            f"covariance is not positive definite: {e}",
            {"covariance": [list(row) for row in spec.covariance]},
        ) from e


def sample_predictors(n: int, spec: PredictorSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw an (n, P) matrix of exact predictor values."""
    factor = cholesky_factor(spec)
    z = rng.standard_normal((n, spec.n_predictors))
    return spec.mean_array() + z @ factor.T


def event_probabilities(x: np.ndarray, outcome: OutcomeModel) -> np.ndarray:
    return special.expit(outcome.alpha + x @ np.asarray(outcome.beta, dtype=float))


def measure(
    x: np.ndarray,
    y: np.ndarray,
    models: Sequence[MeasurementModel],
    rng: np.random.Generator,
) -> np.ndarray:
    """Measured view of x; predictors are measured in column order with independent noise."""
    if x.ndim != 2 or len(models) != x.shape[1]:
        raise DimensionMismatchError(
            f"need one measurement model per predictor, got {len(models)} for {x.shape}"
        )
    w = np.empty_like(x, dtype=float)
    for j, model in enumerate(models):
        w[:, j] = apply_vector(model, x[:, j], y, rng)
    return w


def sample_cohort(
    n: int,
    spec: PredictorSpec,
    outcome: OutcomeModel,
    models: Sequence[MeasurementModel],
    rng: np.random.Generator,
) -> Cohort:
    """Draw predictors, then outcomes, then measurements (so measurement can depend on y)."""
    if n < 1:
        raise InvalidParameterError(f"cohort size must be at least 1, got {n}")
    if spec.n_predictors != outcome.n_predictors or len(models) != spec.n_predictors:
        raise DimensionMismatchError(
            "predictor spec, outcome model and measurement models disagree on P",
            {
                "spec": spec.n_predictors,
                "outcome": outcome.n_predictors,
                "models": len(models),
            },
        )

    x = sample_predictors(n, spec, rng)
    y = (rng.random(n) < event_probabilities(x, outcome)).astype(np.int8)
    w = measure(x, y, models, rng)
    n_cases = int(y.sum())
    return Cohort(y=y, x=x, w=w, n_cases=n_cases, n_noncases=n - n_cases)


def population_event_rate(spec: PredictorSpec, outcome: OutcomeModel) -> float:
    """P(Y=1) integrated over the normal distribution of the linear predictor."""
    beta = np.asarray(outcome.beta, dtype=float)
    mean = outcome.alpha + float(beta @ spec.mean_array())
    sd = math.sqrt(float(beta @ spec.covariance_array() @ beta))
    if sd == 0.0:
        return float(special.expit(mean))

    def integrand(z: float) -> float:
        return float(special.expit(mean + sd * z) * math.exp(-0.5 * z * z))

    value, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-12)
    return value / math.sqrt(2.0 * math.pi)


def dump_cohort(cohort: Cohort, path: Path) -> Path:
    """Write a cohort as `y,x1..xP,w1..wP` for debugging and oracle cross-checks."""
    p = cohort.x.shape[1]
    frame = pd.DataFrame({"y": cohort.y.astype(int)})
    for j in range(p):
        frame[f"x{j + 1}"] = cohort.x[:, j]
    for j in range(p):
        frame[f"w{j + 1}"] = cohort.w[:, j]
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    logger.info(f"✅ Cohort dump written: {path} ({cohort.n} rows)")
    return path
