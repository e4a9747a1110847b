"""Configuration: environment settings and validated run configurations."""
from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from heterosim.models import FAMILIES, Family, Scenario

Command = Literal["grid", "differential", "large-sample", "brier-sweep", "scenario", "report"]
COMMANDS: tuple[str, ...] = (
    "grid",
    "differential",
    "large-sample",
    "brier-sweep",
    "scenario",
    "report",
)

DEFAULT_MV_PERCENTS: tuple[float, ...] = (25.0, 50.0, 75.0, 100.0, 150.0, 200.0, 300.0, 400.0)


class Settings(BaseSettings):
    """Environment-backed settings. Only the default output directory lives here."""

    model_config = SettingsConfigDict(
        env_prefix="HETEROSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    output_dir: Path = Field(default=Path("./results"), description="Default report directory")


@lru_cache()
def get_settings() -> Settings:
    """Get cached environment settings."""
    return Settings()


class LoessSettings(BaseModel):
    """Calibration-curve smoother parameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    span: float = Field(default=0.75, gt=0.0, le=1.0)
    degree: int = Field(default=1, ge=1, le=2, description="Local polynomial degree")
    grid_points: int = Field(default=100, ge=2)


class LargeSampleSettings(BaseModel):
    """Single large-sample panel run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    panel: str = Field(default="random_less_precise")
    n: int = Field(default=1_000_000, ge=50)
    mv_percent: float = Field(default=200.0, gt=0.0, description="Transport panels only")


class SweepSettings(BaseModel):
    """Decomposed-Brier sweep over relative measurement variance."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mv_percents: tuple[float, ...] = Field(default=DEFAULT_MV_PERCENTS, min_length=1)
    n: int = Field(default=1_000_000, ge=50)

    @field_validator("mv_percents")
    @classmethod
    def positive_percents(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(p <= 0 for p in v):
            raise ValueError("relative measurement variances must be positive")
        return v


class RunConfig(BaseModel):
    """Validated parameters of one CLI invocation."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    seed: Optional[int] = Field(
        default=None, ge=0, description="Master seed; there is no wall-clock default"
    )
    families: tuple[Family, ...] = Field(default=("single",), min_length=1)
    reps: int = Field(default=10_000, ge=1)
    n_deriv: int = Field(default=2000, ge=1)
    n_valid: int = Field(default=2000, ge=1)
    workers: int = Field(default=1, ge=1)
    outdir: Optional[Path] = Field(default=None, description="Defaults to HETEROSIM_OUTPUT_DIR")
    factor_scale: Literal["variance", "sd"] = Field(default="variance")
    consistent_predictor: Literal["derivation", "validation"] = Field(default="derivation")
    curve_reps: int = Field(default=20, ge=0)
    svg: bool = Field(default=False)
    replicates_path: Optional[Path] = Field(default=None, description="Input of `report`")
    loess: LoessSettings = Field(default_factory=LoessSettings)
    large_sample: LargeSampleSettings = Field(default_factory=LargeSampleSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    scenarios: tuple[Scenario, ...] = Field(default=())

    @field_validator("families")
    @classmethod
    def unique_families(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        # keep grid order regardless of how the families were listed
        return tuple(f for f in FAMILIES if f in set(v))

    @model_validator(mode="after")
    def check_inputs(self) -> "RunConfig":
        if self.command != "report" and self.seed is None:
            raise ValueError(f"a seed is required for {self.command}")
        if self.command == "report" and self.replicates_path is None:
            raise ValueError("report needs replicates_path")
        return self

    @property
    def master_seed(self) -> int:
        if self.seed is None:
            raise ValueError("no seed configured")
        return self.seed

    def resolved_outdir(self) -> Path:
        return self.outdir if self.outdir is not None else get_settings().output_dir
