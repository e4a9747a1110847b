"""Line-oriented run configuration files.

    # comment
    [run]
    command = grid
    seed = 42
    families = single, two_pred_both

    [loess]
    span = 0.75

    [scenario.my_case]
    family = single_differential
    [scenario.my_case.deriv.1]
    var_eps = 1.0
    [scenario.my_case.valid.1]
    psi1 = 0.5

Sections: run, loess, large_sample, sweep, scenario.<id> and the per-predictor
measurement blocks scenario.<id>.deriv.<k> / scenario.<id>.valid.<k>.
"""
import logging
import re
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from heterosim.config import RunConfig
from heterosim.exceptions import ConfigError
from heterosim.models import (
    FAMILY_PREDICTORS,
    FLAT_KEYS,
    SHORTHAND_KEYS,
    MeasurementModel,
)

logger = logging.getLogger(__name__)

SECTION_RE = re.compile(r"^\[([^\[\]]+)\]$")
MEASUREMENT_RE = re.compile(r"^scenario\.(.+)\.(deriv|valid)\.(\d+)$")
SCENARIO_RE = re.compile(r"^scenario\.(.+)$")

FLAT_SECTIONS = ("run", "loess", "large_sample", "sweep")
LIST_KEYS = {("run", "families"), ("sweep", "mv_percents")}
FACTOR_KEYS = ("var_eps_d", "psi_v", "theta_v", "var_eps_v")
SCENARIO_KEYS = {"family", "rho", "n_deriv", "n_valid", *FACTOR_KEYS}


class _Entry:
    """A raw value and the line it came from."""

    __slots__ = ("value", "line")

    def __init__(self, value: str, line: int):
        self.value = value
        self.line = line


class _Document:
    """Sections of a parsed file, in order of appearance."""

    def __init__(self) -> None:
        self.sections: dict[str, dict[str, _Entry]] = {}
        self.headers: dict[str, int] = {}

    def line_of(self, section: str, key: Optional[str] = None) -> Optional[int]:
        entries = self.sections.get(section, {})
        if key is not None and key in entries:
            return entries[key].line
        return self.headers.get(section)


def _tokenize(text: str) -> _Document:
    doc = _Document()
    current: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = SECTION_RE.match(line)
        if header:
            current = header.group(1).strip()
            if not (
                current in FLAT_SECTIONS
                or SCENARIO_RE.match(current)
                or MEASUREMENT_RE.match(current)
            ):
                raise ConfigError(f"unknown section [{current}]", line=lineno)
            if current in doc.sections:
                raise ConfigError(f"duplicate section [{current}]", line=lineno)
            doc.sections[current] = {}
            doc.headers[current] = lineno
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if current is None:
            raise ConfigError("key outside of any section", line=lineno, key=key)
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in doc.sections[current]:
            raise ConfigError("duplicate key", line=lineno, key=key)
        doc.sections[current][key] = _Entry(value, lineno)
    return doc


def _float(entry: _Entry, key: str) -> float:
    try:
        return float(entry.value)
    except ValueError:
        raise ConfigError(
            f"expected a number, got '{entry.value}'", line=entry.line, key=key
        ) from None


def _measurement(doc: _Document, section: str) -> MeasurementModel:
    values = {}
    for key, entry in doc.sections[section].items():
        if key not in FLAT_KEYS and key not in SHORTHAND_KEYS:
            raise ConfigError("unknown measurement key", line=entry.line, key=key)
        values[key] = _float(entry, key)
    try:
        return MeasurementModel.from_flat(values)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"invalid measurement model: {e}", line=doc.line_of(section)) from e


def _scenarios(doc: _Document, n_deriv: Any, n_valid: Any) -> list[dict[str, Any]]:
    scenarios = []
    for section in doc.sections:
        match = SCENARIO_RE.match(section)
        if not match or MEASUREMENT_RE.match(section):
            continue
        scenario_id = match.group(1)
        entries = doc.sections[section]
        for key, entry in entries.items():
            if key not in SCENARIO_KEYS:
                raise ConfigError("unknown scenario key", line=entry.line, key=key)
        if "family" not in entries:
            raise ConfigError("scenario needs a family", line=doc.line_of(section), key="family")
        family = entries["family"].value
        if family not in FAMILY_PREDICTORS:
            raise ConfigError(
                f"unknown family '{family}'", line=entries["family"].line, key="family"
            )

        models: dict[str, list[MeasurementModel]] = {"deriv": [], "valid": []}
        for setting in models:
            for k in range(1, FAMILY_PREDICTORS[family] + 1):
                block = f"{section}.{setting}.{k}"
                if block not in doc.sections:
                    raise ConfigError(
                        f"missing measurement block [{block}]", line=doc.line_of(section)
                    )
                models[setting].append(_measurement(doc, block))

        data: dict[str, Any] = {
            "id": scenario_id,
            "family": family,
            "deriv_models": tuple(models["deriv"]),
            "valid_models": tuple(models["valid"]),
            "n_deriv": entries["n_deriv"].value if "n_deriv" in entries else n_deriv,
            "n_valid": entries["n_valid"].value if "n_valid" in entries else n_valid,
        }
        if "rho" in entries:
            data["rho"] = entries["rho"].value
        present = [k for k in FACTOR_KEYS if k in entries]
        if present:
            if len(present) != len(FACTOR_KEYS):
                raise ConfigError(
                    f"factor keys must be given together: {', '.join(FACTOR_KEYS)}",
                    line=doc.line_of(section),
                )
            data["factors"] = {k: _float(entries[k], k) for k in FACTOR_KEYS}
        scenarios.append(data)

    for section in doc.sections:
        match = MEASUREMENT_RE.match(section)
        if match and f"scenario.{match.group(1)}" not in doc.sections:
            raise ConfigError(
                f"measurement block for undefined scenario '{match.group(1)}'",
                line=doc.line_of(section),
            )
    return scenarios


def _raw_values(doc: _Document) -> dict[str, Any]:
    data: dict[str, Any] = {}
    for section in FLAT_SECTIONS:
        if section not in doc.sections:
            continue
        values: dict[str, Any] = {}
        for key, entry in doc.sections[section].items():
            if (section, key) in LIST_KEYS:
                values[key] = tuple(v.strip() for v in entry.value.split(",") if v.strip())
            else:
                values[key] = entry.value
        if section == "run":
            data.update(values)
        else:
            data[section] = values
    return data


def _locate(
    doc: _Document, loc: tuple[Any, ...], scenario_ids: list[str]
) -> tuple[Optional[int], Optional[str]]:
    """Line and key of a pydantic error location."""
    if not loc:
        return None, None
    head = str(loc[0])
    if head in ("loess", "large_sample", "sweep") and len(loc) > 1:
        return doc.line_of(head, str(loc[1])), str(loc[1])
    if head == "scenarios" and len(loc) > 1 and isinstance(loc[1], int):
        section = f"scenario.{scenario_ids[loc[1]]}"
        key = str(loc[2]) if len(loc) > 2 else None
        return doc.line_of(section, key), key
    return doc.line_of("run", head), head


def validate_config(
    doc_values: dict[str, Any],
    doc: Optional[_Document] = None,
    scenario_ids: Optional[list[str]] = None,
) -> RunConfig:
    try:
        return RunConfig.model_validate(doc_values)
    except ValidationError as e:
        first = e.errors()[0]
        line, key = (None, None)
        if doc is not None:
            line, key = _locate(doc, tuple(first["loc"]), scenario_ids or [])
        else:
            key = ".".join(str(p) for p in first["loc"]) or None
        raise ConfigError(
            first["msg"], line=line, key=key, details={"errors": len(e.errors())}
        ) from e


def parse_config_values(text: str) -> tuple[dict[str, Any], _Document, list[str]]:
    """Raw (unvalidated) field values of a config file."""
    doc = _tokenize(text)
    data = _raw_values(doc)
    run = doc.sections.get("run", {})
    scenarios = _scenarios(
        doc,
        run["n_deriv"].value if "n_deriv" in run else 2000,
        run["n_valid"].value if "n_valid" in run else 2000,
    )
    if scenarios:
        data["scenarios"] = scenarios
    return data, doc, [s["id"] for s in scenarios]


def merge_values(data: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Overlay overrides on data; nested sections merge key by key."""
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return data


def parse_config_text(text: str, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    """Validated RunConfig from config text; overrides win over file values."""
    data, doc, ids = parse_config_values(text)
    merge_values(data, overrides or {})
    return validate_config(data, doc, ids)


def load_config_file(path: Path, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    config = parse_config_text(text, overrides)
    logger.debug(f"Loaded config from {path}")
    return config


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_format(v) for v in value)
    return str(value)


def _measurement_lines(model: MeasurementModel) -> list[str]:
    return [f"{k} = {_format(v)}" for k, v in model.to_flat().items()]


def serialize_config(config: RunConfig) -> str:
    """Config text that parses back to an equal RunConfig."""
    lines = ["[run]"]
    for name in RunConfig.model_fields:
        if name in ("loess", "large_sample", "sweep", "scenarios"):
            continue
        value = getattr(config, name)
        if value is None:
            continue
        lines.append(f"{name} = {_format(value)}")

    for section in ("loess", "large_sample", "sweep"):
        lines.extend(["", f"[{section}]"])
        for name, value in getattr(config, section).model_dump().items():
            lines.append(f"{name} = {_format(value)}")

    for scenario in config.scenarios:
        section = f"scenario.{scenario.id}"
        lines.extend(
            [
                "",
                f"[{section}]",
                f"family = {scenario.family}",
                f"rho = {_format(scenario.rho)}",
                f"n_deriv = {scenario.n_deriv}",
                f"n_valid = {scenario.n_valid}",
            ]
        )
        if scenario.factors is not None:
            for name in FACTOR_KEYS:
                lines.append(f"{name} = {_format(getattr(scenario.factors, name))}")
        for setting, models in (("deriv", scenario.deriv_models), ("valid", scenario.valid_models)):
            for k, model in enumerate(models, start=1):
                lines.extend(["", f"[{section}.{setting}.{k}]", *_measurement_lines(model)])
    return "\n".join(lines) + "\n"

