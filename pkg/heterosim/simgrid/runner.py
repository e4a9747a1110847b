"""Derive, transport, validate: the replicate loop of the finite-sample study."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np
from scipy import special

from heterosim import glm
from heterosim.cohort import sample_cohort, standard_scenario_outcome
from heterosim.config import LoessSettings
from heterosim.exceptions import HeterosimError, InvalidParameterError
from heterosim.metrics import loess_calibration_curve, performance_report
from heterosim.models import (
    FittedModel,
    GridResult,
    GridSummary,
    OutcomeModel,
    PredictorSpec,
    ReplicateResult,
    Scenario,
)
from heterosim.simgrid.aggregate import replicates_frame, summarize_frame
from heterosim.utils.rng import task_streams

logger = logging.getLogger(__name__)

Population = tuple[PredictorSpec, OutcomeModel]


def scenario_population(scenario: Scenario) -> Population:
    """Data-generating population for a scenario family."""
    if scenario.n_predictors == 1:
        return standard_scenario_outcome("single")
    return standard_scenario_outcome("two_pred", scenario.rho)


def run_replicate(
    scenario: Scenario,
    rep_index: int,
    master_seed: int,
    population: Optional[Population] = None,
    keep_curve: bool = False,
    loess: Optional[LoessSettings] = None,
) -> ReplicateResult:
    """One replicate; a pure function of (master_seed, scenario.id, rep_index).

    Non-convergence, separation and degenerate samples exclude the replicate.
    """
    spec, outcome = population or scenario_population(scenario)
    rng_deriv, rng_valid = task_streams(master_seed, scenario.id, rep_index, n_streams=2)

    def excluded(reason: str, fit: Optional[FittedModel] = None) -> ReplicateResult:
        logger.debug(f"Replicate {scenario.id}#{rep_index} excluded: {reason}")
        return ReplicateResult(
            scenario_id=scenario.id,
            rep_index=rep_index,
            deriv_fit=fit,
            excluded=True,
            exclusion_reason=reason,
        )

    deriv = sample_cohort(scenario.n_deriv, spec, outcome, scenario.deriv_models, rng_deriv)
    try:
        fit = glm.fit(deriv.w, deriv.y)
    except HeterosimError as e:
        return excluded(e.error)
    if not fit.converged:
        return excluded("separation" if fit.separated else "non_convergence", fit)

    valid = sample_cohort(scenario.n_valid, spec, outcome, scenario.valid_models, rng_valid)
    try:
        in_sample = performance_report(glm.linear_predictor(fit, deriv.w), deriv.y)
        lp_valid = glm.linear_predictor(fit, valid.w)
        out_of_sample = performance_report(lp_valid, valid.y)
        curve = None
        if keep_curve:
            settings = loess or LoessSettings()
            probs = np.clip(special.expit(lp_valid.values), glm.PROB_CLAMP, 1 - glm.PROB_CLAMP)
            curve = loess_calibration_curve(
                probs, valid.y, settings.grid_points, settings.span, settings.degree
            )
    except HeterosimError as e:
        return excluded(e.error, fit)
    if not (in_sample.converged and out_of_sample.converged):
        return excluded("recalibration_non_convergence", fit)

    return ReplicateResult(
        scenario_id=scenario.id,
        rep_index=rep_index,
        in_sample=in_sample,
        out_of_sample=out_of_sample,
        deriv_fit=fit,
        curve=curve,
    )


def _run_batch(
    args: tuple[Scenario, Sequence[int], int, int, LoessSettings],
) -> list[ReplicateResult]:
    """Run a block of replicates of one scenario in a worker process.

    Module level so ProcessPoolExecutor can pickle it.
    """
    scenario, rep_indices, master_seed, curve_reps, loess = args
    population = scenario_population(scenario)
    return [
        run_replicate(scenario, r, master_seed, population, r < curve_reps, loess)
        for r in rep_indices
    ]


def run_replicates(
    scenarios: Sequence[Scenario],
    reps: int,
    master_seed: int,
    workers: int = 1,
    curve_reps: int = 0,
    loess: Optional[LoessSettings] = None,
) -> list[ReplicateResult]:
    """All (scenario, rep) tasks, sorted by (scenario id, rep index)."""
    if reps < 1:
        raise InvalidParameterError(f"reps must be at least 1, got {reps}")
    loess = loess or LoessSettings()

    # about four blocks per worker across all scenarios
    n_blocks = 1 if workers == 1 else min(reps, max(1, math.ceil(4 * workers / len(scenarios))))
    blocks = [
        (scenario, [int(r) for r in block], master_seed, curve_reps, loess)
        for scenario in scenarios
        for block in np.array_split(np.arange(reps), n_blocks)
        if block.size
    ]

    results: list[ReplicateResult] = []
    if workers == 1:
        for args in blocks:
            results.extend(_run_batch(args))
    else:
        logger.info(f"Distributing {len(blocks)} blocks across {workers} workers")
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for batch in executor.map(_run_batch, blocks):
                results.extend(batch)

    results.sort(key=lambda r: (r.scenario_id, r.rep_index))
    return results


def run_study(
    scenarios: Sequence[Scenario],
    reps: int,
    master_seed: int,
    workers: int = 1,
    curve_reps: int = 0,
    loess: Optional[LoessSettings] = None,
) -> GridResult:
    """Run every scenario and aggregate the replicates per scenario."""
    if not scenarios:
        raise InvalidParameterError("no scenarios to run")
    logger.info(
        f"🚀 Running {len(scenarios)} scenarios x {reps} replicates "
        f"(seed={master_seed}, workers={workers})"
    )
    replicates = run_replicates(scenarios, reps, master_seed, workers, curve_reps, loess)
    summaries = summarize_frame(replicates_frame(replicates, scenarios))

    for summary in summaries:
        if summary.n_excluded:
            logger.warning(
                f"⚠️ {summary.scenario_id}: {summary.n_excluded} of "
                f"{summary.n_excluded + summary.n_replicates} replicates excluded"
            )
    logger.info(f"✅ Completed {len(replicates)} replicates")
    return GridResult(
        scenarios=tuple(scenarios),
        replicates=tuple(replicates),
        summaries=tuple(summaries),
    )


def run_grid(
    scenarios: Sequence[Scenario],
    reps: int,
    master_seed: int,
    workers: int = 1,
) -> list[GridSummary]:
    """Per-scenario summaries; independent of worker count and scheduling."""
    return list(run_study(scenarios, reps, master_seed, workers).summaries)
