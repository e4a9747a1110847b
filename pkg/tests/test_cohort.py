import math

import numpy as np
import pandas as pd
import pytest
from scipy import special, stats

from heterosim.cohort import (
    large_sample_population,
    dump_cohort,
    event_probabilities,
    measure,
    population_event_rate,
    sample_cohort,
    standard_scenario_outcome,
)
from heterosim.exceptions import CovarianceError, DimensionMismatchError, InvalidParameterError
from heterosim.measurement import exact, make_random
from heterosim.metrics import concordance
from heterosim.models import OutcomeModel, PredictorSpec
from heterosim.utils.rng import make_rng


def population_auc(beta: float, sd: float) -> float:
    """c-statistic of logit(Y) = beta * X, X ~ N(0, sd^2), by integration on a fine grid."""
    x = np.linspace(-10 * sd, 10 * sd, 40001)
    dx = x[1] - x[0]
    f = stats.norm.pdf(x, scale=sd)
    p = special.expit(beta * x)
    g1, g0 = f * p, f * (1 - p)
    below0 = np.cumsum(g0) * dx - 0.5 * g0 * dx
    return float(np.sum(g1 * below0) * dx / (np.sum(g1) * dx * np.sum(g0) * dx))


def test_standard_outcomes():
    spec, outcome = standard_scenario_outcome("single")
    assert outcome.beta == pytest.approx((math.log(4),))
    assert spec.covariance == ((1.0,),)
    assert standard_scenario_outcome("two_pred", 0.9)[1].beta == (2.1, 2.1)
    assert standard_scenario_outcome("two_pred", 0.5)[1].beta == (2.3, 2.3)
    assert standard_scenario_outcome("two_pred", 0.0)[1].beta == (2.3, 2.3)


def test_unsupported_rho():
    with pytest.raises(InvalidParameterError):
        standard_scenario_outcome("two_pred", 0.3)


def test_event_fraction_is_one_half():
    spec, outcome = standard_scenario_outcome("single")
    cohort = sample_cohort(1_000_000, spec, outcome, [exact()], make_rng(1))
    assert abs(cohort.n_cases / cohort.n - 0.5) < 0.002
    assert cohort.n_cases + cohort.n_noncases == cohort.n


def test_predictor_correlation():
    spec, outcome = standard_scenario_outcome("two_pred", 0.9)
    cohort = sample_cohort(1_000_000, spec, outcome, [exact(), exact()], make_rng(2))
    assert abs(np.corrcoef(cohort.x.T)[0, 1] - 0.9) < 0.001
    np.testing.assert_allclose(np.cov(cohort.x.T), spec.covariance_array(), atol=0.005)


def test_identity_measurement_copies_x():
    spec, outcome = standard_scenario_outcome("two_pred", 0.5)
    cohort = sample_cohort(1000, spec, outcome, [exact(), exact()], make_rng(3))
    np.testing.assert_array_equal(cohort.w, cohort.x)


def test_true_model_discrimination():
    spec, outcome = standard_scenario_outcome("single")
    cohort = sample_cohort(1_000_000, spec, outcome, [exact()], make_rng(4))
    target = population_auc(math.log(4), 1.0)
    assert 0.78 < target < 0.82
    assert abs(concordance(cohort.x[:, 0], cohort.y) - target) < 0.003


def test_event_rate_matches_population_rate():
    spec = PredictorSpec(mean=(0.0,), covariance=((1.0,),))
    outcome = OutcomeModel(alpha=-1.0, beta=(0.8,))
    rate = population_event_rate(spec, outcome)
    cohort = sample_cohort(200_000, spec, outcome, [exact()], make_rng(5))
    se = math.sqrt(rate * (1 - rate) / cohort.n)
    assert abs(cohort.n_cases / cohort.n - rate) < 4 * se
    assert population_event_rate(*standard_scenario_outcome("single")) == pytest.approx(0.5)
    assert population_event_rate(*large_sample_population()) == pytest.approx(0.5)


def test_non_positive_definite_covariance():
    spec = PredictorSpec(mean=(0.0, 0.0), covariance=((1.0, 2.0), (2.0, 1.0)))
    outcome = OutcomeModel(beta=(1.0, 1.0))
    with pytest.raises(CovarianceError):
        sample_cohort(10, spec, outcome, [exact(), exact()], make_rng(0))


def test_invalid_sizes():
    spec, outcome = standard_scenario_outcome("single")
    with pytest.raises(InvalidParameterError):
        sample_cohort(0, spec, outcome, [exact()], make_rng(0))
    with pytest.raises(DimensionMismatchError):
        sample_cohort(10, spec, outcome, [exact(), exact()], make_rng(0))


def test_measure_draws_independent_errors():
    spec, outcome = large_sample_population()
    gen = make_rng(6)
    x = np.zeros((1000, 1))
    y = np.zeros(1000, dtype=np.int8)
    first = measure(x, y, [make_random(1.0)], gen)
    second = measure(x, y, [make_random(1.0)], gen)
    assert not np.array_equal(first, second)
    assert event_probabilities(x, outcome) == pytest.approx(np.full((1000,), 0.5))


def test_dump_cohort(tmp_path):
    spec, outcome = standard_scenario_outcome("two_pred", 0.0)
    cohort = sample_cohort(25, spec, outcome, [make_random(1.0), exact()], make_rng(9))
    path = dump_cohort(cohort, tmp_path / "cohort.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["y", "x1", "x2", "w1", "w2"]
    assert len(frame) == 25
    np.testing.assert_array_equal(frame["y"].to_numpy(), cohort.y)
