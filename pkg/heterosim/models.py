"""Pydantic models for measurement structures, cohorts, fits, metrics and scenarios."""
import math
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Enums and Constants
Family = Literal[
    "single", "two_pred_one_consistent", "two_pred_both", "single_differential"
]
FAMILIES: tuple[str, ...] = (
    "single",
    "two_pred_one_consistent",
    "two_pred_both",
    "single_differential",
)
FAMILY_PREDICTORS: dict[str, int] = {
    "single": 1,
    "two_pred_one_consistent": 2,
    "two_pred_both": 2,
    "single_differential": 1,
}
SigmaOrder = Literal["lt", "eq", "gt"]
SUPPORTED_RHO: tuple[float, ...] = (0.0, 0.5, 0.9)

FLAT_KEYS: tuple[str, ...] = ("psi0", "theta0", "var_eps0", "psi1", "theta1", "var_eps1")
SHORTHAND_KEYS: tuple[str, ...] = ("psi", "theta", "var_eps")


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


# Measurement structures
class ClassParams(BaseModel):
    """Measurement parameters for one outcome class: w = psi + theta * x + eps."""

    model_config = ConfigDict(frozen=True)

    psi: float = Field(default=0.0, description="Additive shift (predictor units)")
    theta: float = Field(default=1.0, description="Multiplicative association")
    var_eps: float = Field(default=0.0, ge=0.0, description="Random error variance")

    @field_validator("psi", "theta", "var_eps")
    @classmethod
    def check_finite(cls, v: float) -> float:
        return _finite(v)

    @property
    def sd_eps(self) -> float:
        return math.sqrt(self.var_eps)


class MeasurementModel(BaseModel):
    """Measurement error model conditioned on the outcome class."""

    model_config = ConfigDict(frozen=True)

    params_noncase: ClassParams = Field(..., description="Applies when y = 0")
    params_case: ClassParams = Field(..., description="Applies when y = 1")

    def for_class(self, y: int) -> ClassParams:
        return self.params_case if y == 1 else self.params_noncase

    def is_differential(self) -> bool:
        return self.params_case != self.params_noncase

    def is_random(self) -> bool:
        return (
            not self.is_differential()
            and self.params_noncase.psi == 0.0
            and self.params_noncase.theta == 1.0
        )

    def is_systematic(self) -> bool:
        p = self.params_noncase
        return not self.is_differential() and (p.psi != 0.0 or p.theta != 1.0)

    def is_exact(self) -> bool:
        """True when W is identically X."""
        return self.is_random() and self.params_noncase.var_eps == 0.0

    def to_flat(self) -> dict[str, float]:
        """Serialize to the psi0..var_eps1 key layout."""
        n, c = self.params_noncase, self.params_case
        return {
            "psi0": n.psi,
            "theta0": n.theta,
            "var_eps0": n.var_eps,
            "psi1": c.psi,
            "theta1": c.theta,
            "var_eps1": c.var_eps,
        }

    @classmethod
    def from_flat(cls, values: dict[str, Any]) -> "MeasurementModel":
        """Build from psi0..var_eps1 keys; psi/theta/var_eps apply to both classes.

        Class-specific keys override the shorthand.
        """
        unknown = set(values) - set(FLAT_KEYS) - set(SHORTHAND_KEYS)
        if unknown:
            raise ValueError(f"unknown measurement keys: {sorted(unknown)}")
        noncase: dict[str, float] = {}
        case: dict[str, float] = {}
        for key in SHORTHAND_KEYS:
            if key in values:
                noncase[key] = float(values[key])
                case[key] = float(values[key])
        for key in FLAT_KEYS:
            if key in values:
                target = noncase if key.endswith("0") else case
                target[key[:-1]] = float(values[key])
        return cls(params_noncase=ClassParams(**noncase), params_case=ClassParams(**case))


# Populations and cohorts
class OutcomeModel(BaseModel):
    """Logistic data-generating model: logit P(Y=1) = alpha + beta' x."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.0, description="Intercept on the log-odds scale")
    beta: tuple[float, ...] = Field(..., min_length=1, description="Log-odds per unit")

    @property
    def n_predictors(self) -> int:
        return len(self.beta)


class PredictorSpec(BaseModel):
    """Multivariate normal distribution of the exact predictors."""

    model_config = ConfigDict(frozen=True)

    mean: tuple[float, ...] = Field(..., min_length=1)
    covariance: tuple[tuple[float, ...], ...] = Field(...)

    @model_validator(mode="after")
    def check_shape(self) -> "PredictorSpec":
        p = len(self.mean)
        if len(self.covariance) != p or any(len(row) != p for row in self.covariance):
            raise ValueError(f"covariance must be {p}x{p} to match the mean")
        cov = np.asarray(self.covariance, dtype=float)
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        return self

    @property
    def n_predictors(self) -> int:
        return len(self.mean)

    def mean_array(self) -> np.ndarray:
        return np.asarray(self.mean, dtype=float)

    def covariance_array(self) -> np.ndarray:
        return np.asarray(self.covariance, dtype=float)


class Cohort(BaseModel):
    """One sample: outcomes, exact predictors and measured predictors."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    y: np.ndarray = Field(..., description="Binary outcomes, shape (n,)")
    x: np.ndarray = Field(..., description="Exact predictor values, shape (n, P)")
    w: np.ndarray = Field(..., description="Measured predictor values, shape (n, P)")
    n_cases: int = Field(..., ge=0)
    n_noncases: int = Field(..., ge=0)

    @model_validator(mode="after")
    def check_consistency(self) -> "Cohort":
        n = self.y.shape[0]
        if self.x.ndim != 2 or self.w.ndim != 2:
            raise ValueError("x and w must be 2-D")
        if self.x.shape[0] != n or self.w.shape != self.x.shape:
            raise ValueError("x, w and y must share their row count")
        if self.n_cases + self.n_noncases != n:
            raise ValueError("n_cases + n_noncases must equal n")
        return self

    @property
    def n(self) -> int:
        return int(self.y.shape[0])


# Fits
class FittedModel(BaseModel):
    """Maximum-likelihood logistic regression estimates."""

    model_config = ConfigDict(frozen=True)

    alpha_hat: float
    beta_hat: tuple[float, ...] = Field(default=())
    converged: bool
    iterations: int = Field(..., ge=0)
    max_abs_score: float = Field(..., description="Final score-vector infinity norm")
    log_likelihood: float
    separated: bool = Field(default=False, description="Separation was detected")

    def beta_array(self) -> np.ndarray:
        return np.asarray(self.beta_hat, dtype=float)


class LinearPredictor(BaseModel):
    """Log-odds values produced by a fitted model."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray

    @field_validator("values")
    @classmethod
    def check_finite(cls, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ValueError("linear predictor must be finite")
        return v


# Metrics
class GroupStats(BaseModel):
    """Case and non-case means and variances of a marker."""

    model_config = ConfigDict(frozen=True)

    mean_case: float
    mean_noncase: float
    var_case: float = Field(..., ge=0.0)
    var_noncase: float = Field(..., ge=0.0)


class BrierDecomposition(BaseModel):
    """Brier score with its calibration and refinement components."""

    model_config = ConfigDict(frozen=True)

    total: float
    calibration_term: float
    refinement_term: float = Field(..., ge=0.0, le=0.25)


class PerformanceReport(BaseModel):
    """Predictive performance of one set of predictions on one sample."""

    model_config = ConfigDict(frozen=True)

    c_statistic: float = Field(..., ge=0.0, le=1.0)
    brier: BrierDecomposition
    calib_slope: float
    citl: float
    n: int = Field(..., ge=1)
    n_events: int = Field(..., ge=0)
    converged: bool = Field(default=True, description="Both recalibration fits converged")

    @model_validator(mode="after")
    def check_events(self) -> "PerformanceReport":
        if self.n_events > self.n:
            raise ValueError("n_events cannot exceed n")
        return self


class CalibrationCurve(BaseModel):
    """Loess-smoothed observed risk against predicted risk."""

    model_config = ConfigDict(frozen=True)

    predicted: tuple[float, ...]
    observed: tuple[float, ...]
    span: float
    degree: int

    @model_validator(mode="after")
    def check_lengths(self) -> "CalibrationCurve":
        if len(self.predicted) != len(self.observed):
            raise ValueError("predicted and observed must have equal length")
        return self


# Scenarios and simulation results
class ScenarioFactors(BaseModel):
    """Grid factor values a scenario was built from (as written in the grid)."""

    model_config = ConfigDict(frozen=True)

    var_eps_d: float
    psi_v: float
    theta_v: float
    var_eps_v: float

    @property
    def sigma_order(self) -> SigmaOrder:
        if self.var_eps_d < self.var_eps_v:
            return "lt"
        if self.var_eps_d > self.var_eps_v:
            return "gt"
        return "eq"


class Scenario(BaseModel):
    """One derivation/validation measurement configuration."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    family: Family
    rho: float = Field(default=0.0)
    deriv_models: tuple[MeasurementModel, ...]
    valid_models: tuple[MeasurementModel, ...]
    n_deriv: int = Field(default=2000, ge=1)
    n_valid: int = Field(default=2000, ge=1)
    factors: Optional[ScenarioFactors] = None

    @field_validator("rho")
    @classmethod
    def check_rho(cls, v: float) -> float:
        if v not in SUPPORTED_RHO:
            raise ValueError(f"rho must be one of {', '.join(str(r) for r in SUPPORTED_RHO)}")
        return v

    @model_validator(mode="after")
    def check_models(self) -> "Scenario":
        expected = FAMILY_PREDICTORS[self.family]
        if len(self.deriv_models) != expected or len(self.valid_models) != expected:
            raise ValueError(
                f"family {self.family} needs {expected} measurement model(s) per setting"
            )
        return self

    @property
    def n_predictors(self) -> int:
        return FAMILY_PREDICTORS[self.family]


class ReplicateResult(BaseModel):
    """Outcome of one derive-transport-validate replicate."""

    model_config = ConfigDict(frozen=True)

    scenario_id: str
    rep_index: int = Field(..., ge=0)
    in_sample: Optional[PerformanceReport] = None
    out_of_sample: Optional[PerformanceReport] = None
    deriv_fit: Optional[FittedModel] = None
    excluded: bool = False
    exclusion_reason: Optional[str] = None
    curve: Optional[CalibrationCurve] = None

    @model_validator(mode="after")
    def check_exclusion(self) -> "ReplicateResult":
        if self.excluded and (self.in_sample is not None or self.out_of_sample is not None):
            raise ValueError("excluded replicates carry no performance reports")
        if not self.excluded and (self.in_sample is None or self.out_of_sample is None):
            raise ValueError("included replicates need both performance reports")
        return self


SUMMARY_COLUMNS: tuple[str, ...] = (
    "scenario_id",
    "c_deriv_mean",
    "c_deriv_sd",
    "c_valid_mean",
    "c_valid_sd",
    "slope_median",
    "slope_sd",
    "citl_mean",
    "citl_sd",
    "brier_deriv_mean",
    "brier_deriv_sd",
    "brier_valid_mean",
    "brier_valid_sd",
    "n_excluded",
)


class PerformanceStats(BaseModel):
    """Replicate-aggregated performance; sds are None with fewer than two values."""

    c_deriv_mean: Optional[float] = None
    c_deriv_sd: Optional[float] = None
    c_valid_mean: Optional[float] = None
    c_valid_sd: Optional[float] = None
    slope_median: Optional[float] = None
    slope_sd: Optional[float] = None
    citl_mean: Optional[float] = None
    citl_sd: Optional[float] = None
    brier_deriv_mean: Optional[float] = None
    brier_deriv_sd: Optional[float] = None
    brier_valid_mean: Optional[float] = None
    brier_valid_sd: Optional[float] = None
    n_excluded: int = Field(default=0, ge=0)
    n_replicates: int = Field(default=0, ge=0, description="Included replicates")


class GridSummary(PerformanceStats):
    """Aggregated performance for one scenario."""

    scenario_id: str


class PooledRow(PerformanceStats):
    """Table-style row pooling replicates over cells with the same layout keys."""

    family: Family
    sigma_order: SigmaOrder
    psi_v: float
    theta_v: float
    n_cells: int = Field(..., ge=1)


class LargeSampleResult(BaseModel):
    """One large-sample panel: derivation, transported and re-estimated evaluation."""

    panel: str
    n: int
    deriv_fit: FittedModel
    derivation: PerformanceReport
    transported: PerformanceReport
    reestimated: PerformanceReport
    transported_curve: Optional[CalibrationCurve] = None
    reestimated_curve: Optional[CalibrationCurve] = None


class BrierSweepRow(BaseModel):
    """Decomposed Brier score at one relative measurement variance."""

    mv_percent: float
    mode: Literal["reestimated", "transported"]
    direction: Literal["w_to_x", "x_to_x", "x_to_w"]
    total: float
    calibration_term: float
    refinement_term: float


class GridResult(BaseModel):
    """Scenarios of one run with their replicate results and per-scenario summaries."""

    scenarios: tuple[Scenario, ...]
    replicates: tuple[ReplicateResult, ...]
    summaries: tuple[GridSummary, ...]

    def scenario(self, scenario_id: str) -> Scenario:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        raise KeyError(scenario_id)
