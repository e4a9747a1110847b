import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import special

from heterosim import glm
from heterosim.exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    UndefinedMetricError,
)
from heterosim.measurement import exact, make_differential, make_random
from heterosim.metrics import (
    binormal_auc,
    brier,
    concordance,
    delta_auc,
    expected_delta_bs,
    group_stats,
    loess_calibration_curve,
    normal_cdf,
    performance_report,
)
from heterosim.models import ClassParams, GroupStats
from heterosim.utils.rng import make_rng


def enumerate_pairs(scores, y) -> float:
    cases = [s for s, v in zip(scores, y) if v == 1]
    noncases = [s for s, v in zip(scores, y) if v == 0]
    pairs = itertools.product(cases, noncases)
    wins = sum(1.0 if c > n else 0.5 if c == n else 0.0 for c, n in pairs)
    return wins / (len(cases) * len(noncases))


def test_normal_cdf_reference_values():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.0) == pytest.approx(0.8413447460685429, abs=1e-12)
    assert normal_cdf(-1.96) == pytest.approx(0.024997895148220435, abs=1e-12)
    assert normal_cdf(0.8416) == pytest.approx(0.80, abs=1e-4)
    assert normal_cdf(-40.0) <= 1e-300


def test_concordance_examples():
    assert concordance([0.1, 0.4, 0.3, 0.8], [0, 0, 1, 1]) == 0.75
    assert concordance([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert concordance([0.5] * 6, [0, 1, 0, 1, 0, 1]) == 0.5


def test_concordance_single_class():
    with pytest.raises(UndefinedMetricError):
        concordance([0.1, 0.2], [1, 1])
    with pytest.raises(DimensionMismatchError):
        concordance([0.1, 0.2, 0.3], [1, 0])


@settings(max_examples=100)
@given(
    data=st.lists(
        st.tuples(st.integers(-5, 5), st.integers(0, 1)), min_size=2, max_size=200
    )
)
def test_concordance_equals_pair_enumeration(data):
    scores = [s for s, _ in data]
    y = [v for _, v in data]
    assume(0 < sum(y) < len(y))
    assert concordance(scores, y) == enumerate_pairs(scores, y)


@given(
    scores=st.lists(st.integers(-20, 20), min_size=4, max_size=100),
    seed=st.integers(0, 1000),
)
def test_concordance_invariant_to_monotone_transform(scores, seed):
    y = make_rng(seed).integers(0, 2, len(scores))
    assume(0 < y.sum() < len(y))
    s = np.asarray(scores, dtype=float)
    assert concordance(s, y) == concordance(s * 3.0 + 1.0, y)
    assert concordance(s, y) == concordance(np.exp(s / 4.0), y)


def test_binormal_auc_examples():
    stats = GroupStats(mean_case=1.0, mean_noncase=0.0, var_case=0.5, var_noncase=0.5)
    assert binormal_auc(stats) == pytest.approx(0.8413447460685429, abs=1e-12)
    same = stats.model_copy(update={"mean_case": 0.0})
    assert binormal_auc(same) == 0.5
    with pytest.raises(UndefinedMetricError):
        binormal_auc(GroupStats(mean_case=1, mean_noncase=0, var_case=0, var_noncase=0))


def test_binormal_auc_matches_concordance_on_binormal_data():
    gen = make_rng(21)
    n = 1_000_000
    y = (gen.random(n) < 0.5).astype(np.int8)
    x = gen.standard_normal(n) + 0.9 * y
    assert abs(binormal_auc(group_stats(x, y)) - concordance(x, y)) < 0.002


def test_group_stats():
    stats = group_stats([1.0, 3.0, 0.0, 2.0, 4.0], [1, 1, 0, 0, 0])
    assert stats == GroupStats(mean_case=2.0, mean_noncase=2.0, var_case=2.0, var_noncase=4.0)
    with pytest.raises(UndefinedMetricError):
        group_stats([1.0, 2.0, 3.0], [1, 0, 0])


def test_delta_auc_signs():
    stats = GroupStats(mean_case=0.8, mean_noncase=-0.2, var_case=0.9, var_noncase=0.9)
    assert delta_auc(stats, exact()) == 0.0
    assert delta_auc(stats, make_random(0.5)) < 0
    shifted = make_differential(ClassParams(), ClassParams(psi=0.5))
    assert delta_auc(stats, shifted) > 0


def test_brier_examples():
    d = brier([0.8, 0.4], [1, 0])
    assert d.total == pytest.approx(0.10)
    assert d.calibration_term == pytest.approx(-0.10)
    assert d.refinement_term == pytest.approx(0.20)

    half = brier([0.5] * 4, [1, 0, 1, 0])
    assert (half.total, half.calibration_term, half.refinement_term) == (0.25, 0.0, 0.25)

    perfect = brier(np.clip([1.0, 0.0, 1.0], 1e-12, 1 - 1e-12), [1, 0, 1])
    assert perfect.total == pytest.approx(0.0, abs=1e-20)


def test_brier_input_errors():
    with pytest.raises(DimensionMismatchError):
        brier([0.2, 0.3], [1])
    with pytest.raises(InvalidParameterError):
        brier([1.2], [1])


def test_brier_decomposition_identity():
    gen = make_rng(5)
    p = gen.uniform(1e-6, 1 - 1e-6, 100_000)
    y = (gen.random(100_000) < gen.random(100_000)).astype(np.int8)
    d = brier(p, y)
    assert abs(d.total - (d.calibration_term + d.refinement_term)) < 1e-12


def test_expected_delta_bs():
    p = np.array([0.1, 0.9, 0.3])
    assert expected_delta_bs(p, p) == 0.0
    assert expected_delta_bs([0.5, 0.5], [0.1, 0.9]) == pytest.approx(0.16)


@pytest.mark.slow
def test_in_sample_calibration_term_vanishes(logistic_data):
    X, y = logistic_data(n=1_000_000, beta=(1.386,), seed=31)
    fit = glm.fit(X, y)
    assert abs(brier(glm.predict_prob(fit, X), y).calibration_term) < 1e-3


def test_loess_on_calibrated_data():
    gen = make_rng(17)
    p = gen.uniform(0.05, 0.95, 100_000)
    y = (gen.random(100_000) < p).astype(np.int8)
    curve = loess_calibration_curve(p, y, grid=100)
    assert len(curve.predicted) == len(curve.observed) == 100
    assert curve.predicted[0] == p.min()
    assert curve.predicted[-1] == pytest.approx(p.max())
    interior = slice(5, -5)
    np.testing.assert_allclose(
        np.asarray(curve.observed)[interior], np.asarray(curve.predicted)[interior], atol=0.02
    )


def test_loess_constant_outcome():
    p = make_rng(3).uniform(0.1, 0.9, 200)
    curve = loess_calibration_curve(p, np.ones(200), grid=25, degree=2)
    np.testing.assert_allclose(curve.observed, 1.0, atol=1e-9)
    assert curve.degree == 2


def test_loess_needs_fifty_points():
    with pytest.raises(InvalidParameterError):
        loess_calibration_curve(np.linspace(0.1, 0.9, 49), np.ones(49))


def test_performance_report(logistic_data):
    X, y = logistic_data(n=2000, beta=(1.0,), seed=4)
    fit = glm.fit(X, y)
    lp = glm.linear_predictor(fit, X)
    report = performance_report(lp, y)
    assert report.converged
    assert report.calib_slope == pytest.approx(1.0, abs=1e-8)
    assert report.citl == pytest.approx(0.0, abs=1e-8)
    assert report.n == 2000
    assert report.n_events == int(y.sum())
    assert report.c_statistic == concordance(lp.values, y)
    probs = np.clip(special.expit(lp.values), 1e-12, 1 - 1e-12)
    assert report.brier == brier(probs, y)
