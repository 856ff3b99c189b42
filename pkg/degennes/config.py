"""Global configuration and settings for degennes.

This module defines the discretization controls of the half-line
eigenproblem and the runtime settings shared by the pipeline and the CLI.
Settings come from built-in defaults, an optional key-value file and
explicit overrides, in increasing order of precedence.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, Mapping, Optional, Tuple
import logging
import os

from dotenv import dotenv_values

from degennes.errors import ConfigInvalid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscretizationConfig:
    """Truncation, resolution and convergence controls for one fiber solve.

    Instances are hashable so they can key the solve cache.
    """

    domain_length: float = 12.0
    grid_points: int = 1000
    refinement_levels: int = 3
    target_tol: float = 1e-9

    def validate(self) -> "DiscretizationConfig":
        if not self.domain_length > 0:
            raise ConfigInvalid(f"domain_length must be positive, got {self.domain_length}")
        if self.grid_points < 16:
            raise ConfigInvalid(f"grid_points must be at least 16, got {self.grid_points}")
        if self.refinement_levels < 1:
            raise ConfigInvalid(f"refinement_levels must be at least 1, got {self.refinement_levels}")
        if not self.target_tol > 0:
            raise ConfigInvalid(f"target_tol must be positive, got {self.target_tol}")
        return self

    def with_overrides(self, **changes: Any) -> "DiscretizationConfig":
        return replace(self, **changes).validate()


@dataclass(frozen=True)
class RuntimeSettings:
    discretization: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    workers: int = 1
    log_level: str = "INFO"
    seed: int = 0

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def settings_as_dict(settings: RuntimeSettings) -> Dict[str, Any]:
    """Effective configuration echoed into reports.

    Worker count and log level are left out: they never change computed values.
    """

    return {"discretization": asdict(settings.discretization), "seed": settings.seed}


# Environment-style keys accepted in the optional configuration file.
_FILE_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    "DEGENNES_DOMAIN_LENGTH": ("domain_length", float),
    "DEGENNES_GRID_POINTS": ("grid_points", int),
    "DEGENNES_REFINEMENT_LEVELS": ("refinement_levels", int),
    "DEGENNES_TARGET_TOL": ("target_tol", float),
    "DEGENNES_WORKERS": ("workers", int),
    "DEGENNES_LOG_LEVEL": ("log_level", str),
    "DEGENNES_SEED": ("seed", int),
}

_DISCRETIZATION_FIELDS = {"domain_length", "grid_points", "refinement_levels", "target_tol"}
_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def _read_config_file(config_file: str) -> Dict[str, Any]:
    if not os.path.isfile(config_file):
        raise ConfigInvalid(f"Configuration file not found: {config_file}")

    values: Dict[str, Any] = {}
    for key, raw in dotenv_values(config_file).items():
        if key not in _FILE_KEYS:
            logger.warning("Ignoring unknown configuration key %s in %s", key, config_file)
            continue
        if raw is None or raw == "":
            continue
        name, parse = _FILE_KEYS[key]
        try:
            values[name] = parse(raw)
        except ValueError as exc:
            raise ConfigInvalid(f"Cannot parse {key}={raw!r}: {exc}") from exc
    return values


def load_settings(
    config_file: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RuntimeSettings:
    """Build the effective settings.

    Precedence: explicit overrides (CLI flags) > configuration file > defaults.
    Overrides whose value is None are ignored so unset flags fall through.
    """

    merged: Dict[str, Any] = {}
    if config_file:
        merged.update(_read_config_file(config_file))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    unknown = set(merged) - _DISCRETIZATION_FIELDS - {"workers", "log_level", "seed"}
    if unknown:
        raise ConfigInvalid(f"Unknown settings: {sorted(unknown)}")

    discretization = DiscretizationConfig(
        **{k: v for k, v in merged.items() if k in _DISCRETIZATION_FIELDS}
    ).validate()

    workers = int(merged.get("workers", 1))
    if workers < 1:
        raise ConfigInvalid(f"workers must be at least 1, got {workers}")

    log_level = str(merged.get("log_level", "INFO")).upper()
    if log_level not in _LOG_LEVELS:
        raise ConfigInvalid(f"Unknown log level: {log_level}")

    return RuntimeSettings(
        discretization=discretization,
        workers=workers,
        log_level=log_level,
        seed=int(merged.get("seed", 0)),
    )
