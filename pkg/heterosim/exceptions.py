"""Error hierarchy shared by the engine, the simulation runner and the CLI."""
from typing import Any, Optional


class HeterosimError(Exception):
    """Base error with a machine-readable code, a message and optional details."""

    error: str = "heterosim_error"

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        """Error payload in the same shape as the CLI diagnostics."""
        return {"error": self.error, "message": self.message, "details": self.details}


class InvalidParameterError(HeterosimError, ValueError):
    """A parameter is outside its documented domain."""

    error = "invalid_parameter"


class DimensionMismatchError(HeterosimError, ValueError):
    """Vector or matrix shapes disagree."""

    error = "dimension_mismatch"


class DegenerateOutcomeError(HeterosimError):
    """The outcome vector contains a single class."""

    error = "degenerate_outcome"


class DegenerateDesignError(HeterosimError):
    """The design carries no information (e.g. a constant linear predictor)."""

    error = "degenerate_design"


class UndefinedMetricError(HeterosimError):
    """The requested metric is undefined for the given inputs."""

    error = "undefined_metric"


class CovarianceError(HeterosimError):
    """Covariance matrix could not be factorized."""

    error = "covariance_not_positive_definite"


class ConfigError(HeterosimError):
    """Malformed or invalid run configuration."""

    error = "config_invalid"

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        key: Optional[str] = None,
        details: Optional[dict[str, Any]] = None,
    ):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if key is not None:
            location.append(f"key '{key}'")
        full = f"{', '.join(location)}: {message}" if location else message
        super().__init__(full, details)
        self.line = line
        self.key = key


class ReportError(HeterosimError):
    """Reports could not be produced."""

    error = "report_failed"
