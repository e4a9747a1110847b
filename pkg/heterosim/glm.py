"""Maximum-likelihood binary logistic regression with offsets.

The solver is Newton-Raphson (equivalently IRLS) on the Bernoulli
log-likelihood with a logit link and an intercept that is always included.
Steps are halved while they decrease the likelihood.
"""
import logging
import warnings
from typing import Optional, Union

import numpy as np
import numpy.typing as npt
from scipy import linalg, special

from heterosim.exceptions import (
    DegenerateDesignError,
    DegenerateOutcomeError,
    DimensionMismatchError,
    InvalidParameterError,
)
from heterosim.models import FittedModel, LinearPredictor

logger = logging.getLogger(__name__)

SCORE_TOL = 1e-10
STEP_TOL = 1e-10
MAX_ITER = 50
MAX_HALVINGS = 10
SEPARATION_BOUND = 25.0
PROB_CLAMP = 1e-12

LinearPredictorLike = Union[LinearPredictor, npt.ArrayLike]


def _as_design(design: npt.ArrayLike, n: Optional[int] = None) -> np.ndarray:
    X = np.asarray(design, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DimensionMismatchError(f"design must be 2-D, got shape {X.shape}")
    if n is not None and X.shape[0] != n:
        raise DimensionMismatchError(f"design has {X.shape[0]} rows, expected {n}")
    return X


def _as_outcome(y: npt.ArrayLike) -> np.ndarray:
    y_arr = np.asarray(y, dtype=float).ravel()
    if not np.all((y_arr == 0.0) | (y_arr == 1.0)):
        raise InvalidParameterError("outcomes must be 0 or 1")
    if y_arr.size == 0 or y_arr.min() == y_arr.max():
        raise DegenerateOutcomeError(
            "outcome vector needs both classes", {"n": int(y_arr.size)}
        )
    return y_arr


def _as_offset(offset: Optional[npt.ArrayLike], n: int) -> np.ndarray:
    if offset is None:
        return np.zeros(n)
    off = np.asarray(offset, dtype=float).ravel()
    if off.shape[0] != n:
        raise DimensionMismatchError(f"offset has length {off.shape[0]}, expected {n}")
    return off


def _lp_values(lp: LinearPredictorLike) -> np.ndarray:
    if isinstance(lp, LinearPredictor):
        return lp.values
    return LinearPredictor(values=np.asarray(lp, dtype=float)).values


def _loglik(eta: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def fit(
    design: npt.ArrayLike,
    y: npt.ArrayLike,
    offset: Optional[npt.ArrayLike] = None,
) -> FittedModel:
    """Fit logit P(Y=1) = alpha + design @ beta + offset by maximum likelihood.

    Non-convergence and detected separation are reported on the result,
    never raised.
    """
    y_arr = _as_outcome(y)
    n = y_arr.shape[0]
    X0 = _as_design(design, n)
    p = X0.shape[1]
    if n <= p:
        raise InvalidParameterError(f"need more rows than predictors, got n={n}, P={p}")
    X = np.column_stack([np.ones(n), X0])
    off = _as_offset(offset, n)

    params = np.zeros(p + 1)
    params[0] = special.logit(y_arr.mean())
    eta = off + X @ params
    ll = _loglik(eta, y_arr)

    converged = False
    separated = False
    iterations = 0
    for _ in range(MAX_ITER):
        mu = special.expit(eta)
        score = X.T @ (y_arr - mu)
        if np.max(np.abs(score)) < SCORE_TOL:
            converged = True
            break

        weights = mu * (1.0 - mu)
        info = X.T @ (X * weights[:, None])
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", linalg.LinAlgWarning)
                step = linalg.solve(info, score, assume_a="pos", check_finite=False)
        except (linalg.LinAlgError, linalg.LinAlgWarning, ValueError) as e:
            logger.debug(f"Singular information matrix after {iterations} iterations: {e}")
            break

        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            candidate = params + t * step
            eta_c = off + X @ candidate
            ll_c = _loglik(eta_c, y_arr)
            if ll_c >= ll - 1e-12 * (1.0 + abs(ll)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            logger.debug(f"Step-halving exhausted at iteration {iterations}")
            break

        iterations += 1
        params, eta, ll = candidate, eta_c, ll_c
        if np.max(np.abs(t * step)) < STEP_TOL:
            converged = True
            break

    mu = special.expit(eta)
    score = X.T @ (y_arr - mu)
    max_abs_score = float(np.max(np.abs(score)))
    if p and not converged and np.max(np.abs(params[1:])) > SEPARATION_BOUND:
        # large coefficient whose score never vanished
        separated = True
    if p and np.max(np.abs(y_arr - mu)) < 1e-6:
        # every outcome reproduced: complete separation
        separated = True
    if separated:
        converged = False
        logger.debug(f"Separation detected (|beta| = {np.max(np.abs(params[1:])):.2f})")

    return FittedModel(
        alpha_hat=float(params[0]),
        beta_hat=tuple(float(b) for b in params[1:]),
        converged=converged,
        iterations=iterations,
        max_abs_score=max_abs_score,
        log_likelihood=ll,
        separated=separated,
    )


def linear_predictor(
    model: FittedModel,
    design: npt.ArrayLike,
    offset: Optional[npt.ArrayLike] = None,
) -> LinearPredictor:
    """alpha_hat + design @ beta_hat (+ offset)."""
    X = _as_design(design)
    beta = model.beta_array()
    if X.shape[1] != beta.shape[0]:
        raise DimensionMismatchError(
            f"design has {X.shape[1]} columns, model has {beta.shape[0]} coefficients"
        )
    values = model.alpha_hat + X @ beta + _as_offset(offset, X.shape[0])
    return LinearPredictor(values=values)


def predict_prob(
    model: FittedModel,
    design: npt.ArrayLike,
    offset: Optional[npt.ArrayLike] = None,
) -> np.ndarray:
    """Predicted event probabilities, clamped to [1e-12, 1 - 1e-12]."""
    lp = linear_predictor(model, design, offset)
    return np.clip(special.expit(lp.values), PROB_CLAMP, 1.0 - PROB_CLAMP)


def log_likelihood(
    model: FittedModel,
    design: npt.ArrayLike,
    y: npt.ArrayLike,
    offset: Optional[npt.ArrayLike] = None,
) -> float:
    y_arr = np.asarray(y, dtype=float).ravel()
    return _loglik(linear_predictor(model, design, offset).values, y_arr)


def recalibration_fit(lp: LinearPredictorLike, y: npt.ArrayLike) -> FittedModel:
    """Fit logit(y) = a + b * lp."""
    values = _lp_values(lp)
    if values.size == 0 or np.ptp(values) == 0.0:
        raise DegenerateDesignError("linear predictor is constant; slope is undefined")
    return fit(values.reshape(-1, 1), y)


def recalibrate(lp: LinearPredictorLike, y: npt.ArrayLike) -> tuple[float, float]:
    """Recalibration intercept a and calibration slope b."""
    result = recalibration_fit(lp, y)
    if not result.converged:
        logger.warning("⚠️ Recalibration fit did not converge")
    return result.alpha_hat, result.beta_hat[0]


def citl_fit(lp: LinearPredictorLike, y: npt.ArrayLike) -> FittedModel:
    """Intercept-only fit with lp as a fixed offset."""
    values = _lp_values(lp)
    return fit(np.empty((values.shape[0], 0)), y, offset=values)


def calibration_in_the_large(lp: LinearPredictorLike, y: npt.ArrayLike) -> float:
    """Recalibration intercept with the slope fixed at 1 (a | b = 1)."""
    result = citl_fit(lp, y)
    if not result.converged:
        logger.warning("⚠️ Calibration-in-the-large fit did not converge")
    return result.alpha_hat
