import numpy as np
import pandas as pd
import pytest

from heterosim.config import LoessSettings
from heterosim.exceptions import InvalidParameterError, ReportError
from heterosim.measurement import exact, make_random
from heterosim.models import FAMILIES, Scenario
from heterosim.simgrid import (
    brier_sweep,
    build_grid,
    differential_presets,
    pool_rows,
    replicates_frame,
    run_grid,
    run_large_sample,
    run_replicate,
    run_replicates,
    run_study,
    summarize_frame,
)
from heterosim.simgrid.grid import build_family, factor_levels
from heterosim.simgrid.presets import (
    DIFFERENTIAL_PRESET_IDS,
    PANELS,
    panel_models,
    sweep_direction,
    transport_models,
)


def small(scenario: Scenario, n: int = 300) -> Scenario:
    return scenario.model_copy(update={"n_deriv": n, "n_valid": n})


# Grid construction

def test_grid_sizes():
    assert len(list(factor_levels())) == 54
    sizes = {f: len(build_family(f)) for f in FAMILIES}  # type: ignore[arg-type]
    assert sizes == {
        "single": 54,
        "two_pred_one_consistent": 162,
        "two_pred_both": 162,
        "single_differential": 54,
    }
    grid = build_grid()
    assert len(grid) == 432
    assert len({s.id for s in grid}) == 432


def test_grid_order_and_first_scenario():
    grid = build_grid(["single"])
    first = grid[0]
    assert first.id == "single_vd0.5_psi0_th0.5_vv0.5"
    assert first.factors is not None
    assert (first.factors.var_eps_d, first.factors.psi_v) == (0.5, 0.0)
    assert (first.factors.theta_v, first.factors.var_eps_v) == (0.5, 0.5)
    assert [s.factors.var_eps_d for s in grid[:18]] == [0.5] * 18  # type: ignore[union-attr]


def test_derivation_measurement_is_random():
    for scenario in build_grid():
        assert all(m.is_random() for m in scenario.deriv_models)


def test_validation_measurement_follows_factors():
    scenario = next(
        s for s in build_grid(["single"]) if s.id == "single_vd1_psi0.25_th2_vv0.5"
    )
    params = scenario.valid_models[0].params_case
    assert (params.psi, params.theta, params.var_eps) == (0.25, 2.0, 0.5)
    assert scenario.deriv_models[0] == make_random(1.0)


def test_factor_scale_sd_squares_levels():
    scenario = build_grid(["single"], factor_scale="sd")[-1]
    assert scenario.id == "single_vd2_psi0.25_th2_vv2"
    assert scenario.deriv_models[0] == make_random(4.0)
    assert scenario.valid_models[0].params_noncase.var_eps == 4.0


def test_consistent_predictor():
    grid = build_grid(["two_pred_one_consistent"])
    scenario = next(s for s in grid if s.id.endswith("rho0.5_vd0.5_psi0.25_th2_vv2"))
    assert scenario.rho == 0.5
    assert scenario.deriv_models[1] == scenario.valid_models[1] == make_random(0.5)
    assert scenario.valid_models[0].is_systematic()

    flipped = build_grid(["two_pred_one_consistent"], consistent_predictor="validation")
    other = next(s for s in flipped if s.id == scenario.id)
    assert other.deriv_models[1] == other.valid_models[1] == make_random(2.0)


def test_differential_family():
    scenario = next(
        s
        for s in build_grid(["single_differential"])
        if s.id == "single_differential_vd1_psi0.25_th0.5_vv2"
    )
    valid = scenario.valid_models[0]
    assert valid.is_differential()
    assert valid.params_noncase == make_random(1.0).params_noncase
    assert (valid.params_case.psi, valid.params_case.theta) == (0.25, 0.5)
    assert valid.params_case.var_eps == 2.0


# Replicates

def test_replicate_is_deterministic(homogeneous_scenario):
    first = run_replicate(homogeneous_scenario, 3, 99)
    assert first == run_replicate(homogeneous_scenario, 3, 99)
    assert first != run_replicate(homogeneous_scenario, 4, 99)


def test_homogeneous_in_sample_identities(homogeneous_scenario):
    for rep in range(5):
        result = run_replicate(homogeneous_scenario, rep, 2024)
        assert not result.excluded
        assert result.in_sample is not None and result.out_of_sample is not None
        assert result.in_sample.calib_slope == pytest.approx(1.0, abs=1e-8)
        assert result.in_sample.citl == pytest.approx(0.0, abs=1e-8)
        assert 0.5 < result.out_of_sample.c_statistic < 1.0


def test_replicate_curve(homogeneous_scenario):
    loess = LoessSettings(grid_points=20)
    result = run_replicate(homogeneous_scenario, 0, 1, keep_curve=True, loess=loess)
    assert result.curve is not None
    assert len(result.curve.predicted) == 20


def test_tiny_sample_is_excluded():
    scenario = Scenario(
        id="tiny",
        family="single",
        deriv_models=(exact(),),
        valid_models=(exact(),),
        n_deriv=4,
        n_valid=4,
    )
    results = run_replicates([scenario], reps=20, master_seed=8)
    assert all(r.excluded or r.in_sample is not None for r in results)
    reasons = {r.exclusion_reason for r in results if r.excluded}
    assert reasons
    assert reasons <= {
        "separation",
        "non_convergence",
        "recalibration_non_convergence",
        "degenerate_outcome",
        "undefined_metric",
        "degenerate_design",
    }


def test_worker_count_does_not_change_results(homogeneous_scenario):
    scenarios = [
        small(homogeneous_scenario),
        small(homogeneous_scenario).model_copy(update={"id": "other"}),
    ]
    serial = run_replicates(scenarios, reps=6, master_seed=7, workers=1)
    parallel = run_replicates(scenarios, reps=6, master_seed=7, workers=2)
    assert serial == parallel
    assert [(r.scenario_id, r.rep_index) for r in serial] == sorted(
        (s.id, rep) for s in scenarios for rep in range(6)
    )


def test_run_study_single_rep_has_no_sd(homogeneous_scenario):
    result = run_study([small(homogeneous_scenario)], reps=1, master_seed=3)
    (summary,) = result.summaries
    assert summary.n_replicates + summary.n_excluded == 1
    assert summary.c_valid_sd is None
    assert summary.slope_sd is None


def test_run_replicates_rejects_zero_reps(homogeneous_scenario):
    with pytest.raises(InvalidParameterError):
        run_replicates([homogeneous_scenario], reps=0, master_seed=1)
    with pytest.raises(InvalidParameterError):
        run_study([], reps=1, master_seed=1)


def test_summaries_match_replicate_frame(homogeneous_scenario):
    scenario = small(homogeneous_scenario)
    result = run_study([scenario], reps=4, master_seed=11)
    frame = replicates_frame(result.replicates, result.scenarios)
    kept = frame[~frame["excluded"]]
    (summary,) = summarize_frame(frame)
    assert summary.c_valid_mean == pytest.approx(kept["c_valid"].mean())
    assert summary.slope_median == pytest.approx(kept["slope_valid"].median())
    assert summary.citl_sd == pytest.approx(kept["citl_valid"].std(ddof=1))


def test_event_counts_near_half():
    scenarios = build_grid()[::36]
    assert {s.family for s in scenarios} == set(FAMILIES)
    result = run_study(scenarios, reps=10, master_seed=21)
    frame = replicates_frame(result.replicates, result.scenarios)
    grouped = frame[~frame["excluded"]].groupby("scenario_id")[["events_deriv", "events_valid"]]
    for column in ("events_deriv", "events_valid"):
        fraction = grouped.mean()[column] / 2000
        assert fraction.between(0.45, 0.55).all(), column


# Pooling

def synthetic_frame() -> pd.DataFrame:
    cells = [
        ("a", 0.5, 1.0, [1.0, 2.0]),
        ("b", 1.0, 2.0, [3.0]),
        ("c", 1.0, 1.0, [0.9, 1.1]),
    ]
    rows = []
    for cell, vd, vv, slopes in cells:
        for rep, slope in enumerate(slopes):
            rows.append(
                {
                    "scenario_id": cell,
                    "family": "single",
                    "var_eps_d": vd,
                    "psi_v": 0.0,
                    "theta_v": 1.0,
                    "var_eps_v": vv,
                    "rep": rep,
                    "excluded": False,
                    "c_deriv": 0.7,
                    "c_valid": 0.65,
                    "slope_valid": slope,
                    "citl_valid": 0.0,
                    "brier_deriv": 0.2,
                    "brier_valid": 0.22,
                }
            )
    return pd.DataFrame(rows)


def test_pool_rows():
    rows = pool_rows(synthetic_frame())
    assert [r.sigma_order for r in rows] == ["lt", "eq"]
    lt, eq = rows
    assert lt.n_cells == 2
    assert lt.n_replicates == 3
    assert lt.slope_median == 2.0
    assert eq.n_cells == 1
    assert eq.slope_median == pytest.approx(1.0)
    assert eq.c_valid_sd == pytest.approx(0.0)


def test_pool_rows_without_grid_cells():
    with pytest.raises(ReportError):
        pool_rows(synthetic_frame(), family="two_pred_both")


# Presets

def test_differential_presets():
    presets = differential_presets()
    assert tuple(s.id for s in presets) == DIFFERENTIAL_PRESET_IDS
    deriv_case2 = presets[1]
    assert deriv_case2.deriv_models[0].params_case.var_eps == 2.0
    assert deriv_case2.deriv_models[0].params_noncase.var_eps == 1.0
    assert deriv_case2.valid_models[0] == make_random(1.0)
    valid_half = presets[2]
    assert valid_half.deriv_models[0] == make_random(1.0)
    assert valid_half.valid_models[0].params_case.var_eps == 0.5
    assert differential_presets("sd")[1].deriv_models[0].params_case.var_eps == 4.0


def test_all_panels_build():
    for panel in PANELS:
        deriv, valid = panel_models(panel)
        assert deriv is not None and valid is not None
    with pytest.raises(InvalidParameterError):
        panel_models("no_such_panel")


def test_transport_models():
    deriv, valid = transport_models("x_to_w", 200.0, 0.5)
    assert deriv == exact()
    assert valid == make_random(0.5)
    deriv, valid = transport_models("w_to_x", 50.0, 0.5)
    assert deriv == make_random(0.5)
    assert valid == exact()
    deriv, valid = transport_models("w_to_w", 200.0, 0.5)
    assert valid == make_random(1.5)
    assert sweep_direction(25.0) == "w_to_x"
    assert sweep_direction(100.0) == "x_to_x"
    assert sweep_direction(400.0) == "x_to_w"


@pytest.mark.parametrize(
    "direction, mv",
    [("x_to_w", 50.0), ("w_to_x", 150.0), ("w_to_w", 10.0), ("sideways", 100.0), ("x_to_w", 0.0)],
)
def test_transport_models_rejects_bad_ranges(direction, mv):
    with pytest.raises(InvalidParameterError):
        transport_models(direction, mv, 0.5)


def test_large_sample_reestimated_is_calibrated():
    result = run_large_sample("random_consistent", 5000, 17, loess=LoessSettings(grid_points=10))
    assert result.reestimated.calib_slope == pytest.approx(1.0, abs=1e-6)
    assert result.reestimated.citl == pytest.approx(0.0, abs=1e-6)
    assert result.derivation.calib_slope == pytest.approx(1.0, abs=1e-6)
    assert result.transported_curve is not None
    assert len(result.transported_curve.predicted) == 10
    again = run_large_sample("random_consistent", 5000, 17, curves=False)
    assert again.transported == result.transported
    assert again.transported_curve is None


def test_brier_sweep_small_sample():
    rows = brier_sweep((50.0, 100.0, 200.0), n=3000, master_seed=5)
    assert len(rows) == 6
    assert [(r.mv_percent, r.mode) for r in rows[:2]] == [
        (50.0, "reestimated"),
        (50.0, "transported"),
    ]
    at_100 = [r for r in rows if r.mv_percent == 100.0]
    assert at_100[0].direction == "x_to_x"
    assert at_100[0].total == at_100[1].total
    assert at_100[0].calibration_term == at_100[1].calibration_term
    for row in rows:
        assert row.total == pytest.approx(row.calibration_term + row.refinement_term, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        brier_sweep((-5.0,), n=100, master_seed=1)


def test_brier_sweep_is_seeded():
    a = brier_sweep((150.0,), n=1000, master_seed=3)
    b = brier_sweep((150.0,), n=1000, master_seed=3)
    assert a == b
    assert np.isfinite(a[0].total)


def test_run_grid_returns_study_summaries(homogeneous_scenario):
    scenarios = [small(homogeneous_scenario)]
    summaries = run_grid(scenarios, reps=3, master_seed=13)
    assert summaries == list(run_study(scenarios, reps=3, master_seed=13).summaries)
