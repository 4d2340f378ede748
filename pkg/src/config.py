"""
Run configuration for the verification battery.

Values are layered: model defaults, then an optional JSON file, then
DELTASTONE_* environment variables, then explicit command-line overrides.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from exact_algebra import AlgebraError, validate_prime

logger = logging.getLogger(__name__)

ENV_PREFIX = "DELTASTONE_"

SUITES = (
    "witt",
    "delta",
    "stone",
    "duality",
    "flatness",
    "sites",
    "adjunction",
    "profinite",
    "condensed",
    "report",
)

MUTATIONS = (
    "delta-shift",
    "broken-restriction",
    "non-surjective-cover",
    "non-surjective-transition",
)

LIST_FIELDS = ("suites", "mutations")


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


class RunConfig(BaseModel):
    """Bounds, seed and output options for one verification run."""

    p: int = Field(2, description="Prime for the duality, flatness and site checks.")
    max_level_size: int = Field(3, description="Largest level set enumerated.")
    depth: int = Field(3, description="Tower truncation depth N.")
    precision: int = Field(3, description="Working precision m (Z/p^m).")
    seed: int = Field(0, description="Seed for sampled checks, 0 <= seed < 2^64.")
    witt_max_len: int = Field(4, description="Longest Witt vectors checked.")
    samples: int = Field(1000, description="Pairs drawn where exhaustion is too big.")
    lift_depth: int = Field(6, description="Depth of the replete lifting checks.")
    max_cover_members: int = Field(3, description="Largest cover family.")
    suites: List[str] = Field(default_factory=lambda: list(SUITES))
    mutations: List[str] = Field(default_factory=list)
    workers: int = Field(1, description="Threads used to run checks.")
    include_timings: bool = False
    output: Optional[Path] = None
    format: Literal["json", "text"] = "json"
    log_level: str = "WARNING"

    model_config = {"extra": "forbid"}

    @field_validator("p")
    def p_should_be_prime(cls, v):
        try:
            return validate_prime(v)
        except AlgebraError as e:
            raise ValueError(str(e)) from e

    @field_validator(
        "max_level_size",
        "depth",
        "precision",
        "witt_max_len",
        "samples",
        "lift_depth",
        "max_cover_members",
        "workers",
    )
    def bounds_should_be_positive(cls, v):
        if v < 1:
            raise ValueError("bounds must be >= 1")
        return v

    @field_validator("seed")
    def seed_should_fit_64_bits(cls, v):
        if not 0 <= v < 2**64:
            raise ValueError("seed must satisfy 0 <= seed < 2^64")
        return v

    @field_validator("suites")
    def suites_should_be_known(cls, v):
        unknown = sorted(set(v) - set(SUITES))
        if unknown:
            raise ValueError(f"unknown suites {unknown}; choose from {list(SUITES)}")
        return [s for s in SUITES if s in v]

    @field_validator("mutations")
    def mutations_should_be_known(cls, v):
        unknown = sorted(set(v) - set(MUTATIONS))
        if unknown:
            raise ValueError(
                f"unknown mutations {unknown}; choose from {list(MUTATIONS)}"
            )
        return [m for m in MUTATIONS if m in v]

    @field_validator("log_level")
    def log_level_should_exist(cls, v):
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {v!r}")
        return level

    def echo(self) -> Dict[str, Any]:
        """The configuration as written into reports (output path excluded)."""
        return self.model_dump(mode="json", exclude={"output", "log_level"})


def _read_config_file(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(
            f"Configuration file not found: {path}\n"
            f"Pass an existing JSON file to --config or omit the flag."
        )
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"Configuration file {path} is not valid JSON.\n"
            f"Parser error: {e}"
        ) from e
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration file {path} must hold a JSON object")
    return data


def _env_overrides(environ: Mapping[str, str]) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for key, value in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX) :].lower()
        if name not in RunConfig.model_fields:
            logger.warning("Ignoring unknown environment setting %s", key)
            continue
        if name in LIST_FIELDS:
            items = value.split(",")
            overrides[name] = [item.strip() for item in items if item.strip()]
        else:
            overrides[name] = value
    return overrides


def load_config(
    path: Optional[Path] = None,
    environ: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Merge the configuration layers and validate the result."""
    data: Dict[str, Any] = {}
    if path is not None:
        data.update(_read_config_file(Path(path)))
    data.update(_env_overrides(os.environ if environ is None else environ))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        config = RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration:\n{e}") from e
    logger.debug("Loaded configuration %s", config.echo())
    return config
