"""Reading, validating and writing scenario config files.

Config files are TOML with four sections whose keys are exactly the model
field names::

    [system]   SystemConfig scalars (num_users, rates, queues, seed, ...)
    [costs]    Weights (w_a, w_b, phi) + CostParams
    [rl]       RLParams
    [sweep]    SweepParams

Unknown sections or keys are hard errors.  ``dump_config`` is canonical:
``dump_config(parse_config(dump_config(c))) == dump_config(c)``.
"""

from __future__ import annotations

import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Mapping

import tomli_w
from pydantic import ValidationError

from .errors import ConfigError, ConfigIssue
from .schemas import SystemConfig, Weights

logger = logging.getLogger("shared.loader")

SECTIONS: tuple[str, ...] = ("system", "costs", "rl", "sweep")
_NESTED = ("weights", "costs", "rl", "sweep")
_WEIGHT_KEYS = tuple(Weights.model_fields)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _issues_from(exc: ValidationError) -> list[ConfigIssue]:
    issues: list[ConfigIssue] = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "config"
        msg = str(err["msg"]).removeprefix("Value error, ")
        issues.append(ConfigIssue(field=loc, message=msg))
    return issues


def _unflatten(raw: Mapping[str, Any]) -> tuple[dict[str, Any], list[ConfigIssue]]:
    """Turn the sectioned file layout into the nested model layout."""
    issues = [
        ConfigIssue(field=name, message="unknown section")
        for name in raw
        if name not in SECTIONS
    ]
    data: dict[str, Any] = dict(raw.get("system", {}))
    costs = dict(raw.get("costs", {}))
    weights = {k: costs.pop(k) for k in _WEIGHT_KEYS if k in costs}
    if weights:
        data["weights"] = weights
    if costs:
        data["costs"] = costs
    for name in ("rl", "sweep"):
        if name in raw:
            data[name] = dict(raw[name])
    for key in _NESTED:
        if key in raw.get("system", {}):
            issues.append(ConfigIssue(field=f"system.{key}", message="not a [system] key"))
    return data, issues


def validate_config(raw: SystemConfig | Mapping[str, Any]) -> SystemConfig:
    """Validate a sectioned mapping (or re-validate a model) into a SystemConfig.

    Absent keys take their documented defaults.  Raises ``ConfigError``
    listing every violated invariant.
    """
    if isinstance(raw, SystemConfig):
        raw = to_sections(raw)
    data, issues = _unflatten(raw)
    try:
        config = SystemConfig.model_validate(data)
    except ValidationError as exc:
        issues.extend(_issues_from(exc))
        raise ConfigError(issues) from exc
    if issues:
        raise ConfigError(issues)
    return config


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------

def to_sections(config: SystemConfig) -> dict[str, dict[str, Any]]:
    """Sectioned plain-data view of a config (``None`` values omitted)."""
    dumped = config.model_dump(mode="json", exclude_none=True)
    system = {k: v for k, v in dumped.items() if k not in _NESTED}
    costs = {**dumped["weights"], **dumped["costs"]}
    return {"system": system, "costs": costs, "rl": dumped["rl"], "sweep": dumped["sweep"]}


def dump_config(config: SystemConfig) -> str:
    return tomli_w.dumps(to_sections(config))


def parse_config(text: str) -> SystemConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([ConfigIssue(field="config", message=f"TOML syntax: {exc}")]) from exc
    return validate_config(raw)


def load_config(path: str | Path) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([ConfigIssue(field="config", message=f"cannot read {path}: {exc}")]) from exc
    config = parse_config(text)
    logger.info("Loaded config %s (users=%d, servers=%d)", path, config.num_users, config.num_servers)
    return config


def save_config(config: SystemConfig, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dump_config(config), encoding="utf-8")
    return path


def apply_overrides(config: SystemConfig, **overrides: Any) -> SystemConfig:
    """Re-validate ``config`` with CLI overrides applied.

    Recognised keys: ``seed``, ``num_users``, ``node_counts``, ``policies``,
    ``use_modified``, ``workers``, ``monte_carlo_runs``, ``episodes``.
    ``None`` values are ignored.
    """
    sections = to_sections(config)
    placement = {
        "seed": "system",
        "num_users": "system",
        "node_counts": "sweep",
        "policies": "sweep",
        "workers": "sweep",
        "use_modified": "rl",
        "monte_carlo_runs": "rl",
        "episodes": "rl",
    }
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in placement:
            raise ConfigError([ConfigIssue(field=key, message="not an overridable key")])
        sections[placement[key]][key] = value
    return validate_config(sections)
