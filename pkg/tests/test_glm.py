import math

import numpy as np
import pytest
from scipy import optimize, special

from heterosim import glm
from heterosim.exceptions import (
    DegenerateDesignError,
    DegenerateOutcomeError,
    DimensionMismatchError,
)
from heterosim.models import FittedModel


def _neg_loglik(params: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    eta = params[0] + X @ params[1:]
    return float(np.sum(np.logaddexp(0.0, eta) - y * eta))


def _neg_score(params: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    resid = y - special.expit(params[0] + X @ params[1:])
    return -np.concatenate([[resid.sum()], X.T @ resid])


def test_intercept_only_fit():
    y = np.array([1] * 25 + [0] * 75)
    fit = glm.fit(np.empty((100, 0)), y)
    assert fit.converged
    assert fit.alpha_hat == pytest.approx(math.log(0.25 / 0.75), abs=1e-10)
    assert fit.beta_hat == ()


@pytest.mark.parametrize("seed", range(20))
def test_fit_matches_numerical_optimizer(logistic_data, seed):
    beta = (0.8,) if seed % 2 else (1.0, -0.5)
    X, y = logistic_data(n=200, beta=beta, alpha=0.3, seed=seed)
    fit = glm.fit(X, y)
    assert fit.converged

    oracle = optimize.minimize(
        _neg_loglik,
        np.zeros(X.shape[1] + 1),
        args=(X, y),
        jac=_neg_score,
        method="BFGS",
        options={"gtol": 1e-10, "maxiter": 10_000},
    )
    estimate = np.concatenate([[fit.alpha_hat], fit.beta_array()])
    np.testing.assert_allclose(estimate, oracle.x, atol=1e-6)


def test_score_equations_and_likelihood(logistic_data):
    X, y = logistic_data(n=1000, beta=(1.2, 0.4), seed=3)
    fit = glm.fit(X, y)
    resid = y - glm.predict_prob(fit, X)
    n = len(y)
    assert abs(resid.sum()) < 1e-8 * n
    assert np.all(np.abs(X.T @ resid) < 1e-8 * n)
    assert fit.max_abs_score < 1e-8 * n
    null = glm.fit(np.empty((n, 0)), y)
    assert fit.log_likelihood >= null.log_likelihood
    assert glm.log_likelihood(fit, X, y) == pytest.approx(fit.log_likelihood)


def test_separation_is_flagged():
    x = np.arange(6.0)
    y = np.array([0, 0, 0, 1, 1, 1])
    fit = glm.fit(x, y)
    assert not fit.converged
    assert fit.separated


def test_large_coefficient_is_not_separation(logistic_data):
    X, y = logistic_data(n=2000, beta=(1.0,), seed=40)
    unit = glm.fit(X, y)
    rescaled = glm.fit(X / 40, y)
    assert rescaled.converged
    assert not rescaled.separated
    assert abs(rescaled.beta_hat[0]) > glm.SEPARATION_BOUND
    assert rescaled.beta_hat[0] == pytest.approx(40 * unit.beta_hat[0], rel=1e-6)
    assert rescaled.alpha_hat == pytest.approx(unit.alpha_hat, abs=1e-6)


def test_steep_recalibration_slope(logistic_data, caplog):
    X, y = logistic_data(n=2000, beta=(1.0,), seed=41)
    lp = glm.linear_predictor(glm.fit(X, y), X).values
    with caplog.at_level("WARNING", logger="heterosim.glm"):
        a, b = glm.recalibrate(lp / 30, y)
    assert b == pytest.approx(30.0, rel=1e-6)
    assert a == pytest.approx(0.0, abs=1e-6)
    assert "did not converge" not in caplog.text


def test_single_class_outcome():
    with pytest.raises(DegenerateOutcomeError):
        glm.fit(np.arange(5.0), np.ones(5))


def test_predict_prob_contract():
    flat = FittedModel(
        alpha_hat=0.0,
        beta_hat=(0.0,),
        converged=True,
        iterations=0,
        max_abs_score=0.0,
        log_likelihood=0.0,
    )
    np.testing.assert_array_equal(glm.predict_prob(flat, np.arange(4.0)), np.full(4, 0.5))

    base = flat.model_copy(update={"alpha_hat": special.logit(0.25), "beta_hat": ()})
    np.testing.assert_allclose(glm.predict_prob(base, np.empty((3, 0))), 0.25)

    steep = flat.model_copy(update={"alpha_hat": 40.0})
    assert glm.predict_prob(steep, np.zeros(1))[0] == 1.0 - 1e-12

    with pytest.raises(DimensionMismatchError):
        glm.predict_prob(flat, np.zeros((3, 2)))


def test_in_sample_recalibration_identities(logistic_data):
    for seed in range(100):
        X, y = logistic_data(n=300, beta=(1.0,), seed=1000 + seed)
        fit = glm.fit(X, y)
        lp = glm.linear_predictor(fit, X)
        a, b = glm.recalibrate(lp, y)
        assert a == pytest.approx(0.0, abs=1e-8)
        assert b == pytest.approx(1.0, abs=1e-8)
        assert glm.calibration_in_the_large(lp, y) == pytest.approx(0.0, abs=1e-8)


def test_halved_lp_doubles_slope(logistic_data):
    X, y = logistic_data(n=500, beta=(1.3,), seed=11)
    lp = glm.linear_predictor(glm.fit(X, y), X).values
    a, b = glm.recalibrate(lp / 2, y)
    assert b == pytest.approx(2.0, abs=1e-8)


def test_citl_offset_identity(logistic_data):
    X, y = logistic_data(n=500, beta=(0.7,), seed=12)
    lp = glm.linear_predictor(glm.fit(X, y), X).values
    base = glm.calibration_in_the_large(lp, y)
    for c in (-1.5, 0.25, 2.0):
        assert glm.calibration_in_the_large(lp + c, y) == pytest.approx(base - c, abs=1e-8)


def test_constant_lp_is_degenerate():
    with pytest.raises(DegenerateDesignError):
        glm.recalibrate(np.zeros(10), np.array([0, 1] * 5))
