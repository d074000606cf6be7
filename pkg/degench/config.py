from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values

from degench.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = "out"


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters of the nonlinear radial solver.

    ``theta``, ``delta`` and ``stabilization_s`` may be left as ``None``; they
    are resolved against the interface width by :meth:`resolve`.
    """

    dt: float = 1e-3
    theta: Optional[float] = None
    stabilization_s: Optional[float] = None
    n_points: int = 400
    r_min: float = 1e-10
    delta: Optional[float] = None
    t_end: float = 1.0
    mobility_splitting: bool = True
    record_every: int = 100

    def validate(self) -> "SolverConfig":
        if not self.dt > 0:
            raise ConfigError("dt", f"must be positive, got {self.dt}")
        if self.theta is not None and not self.theta > 0:
            raise ConfigError("theta", f"must be positive, got {self.theta}")
        if self.stabilization_s is not None and self.stabilization_s < 0:
            raise ConfigError("stabilization_s", f"must be non-negative, got {self.stabilization_s}")
        if self.n_points < 8:
            raise ConfigError("n_points", f"must be at least 8, got {self.n_points}")
        if not 0 < self.r_min < 1:
            raise ConfigError("r_min", f"must lie in (0, 1), got {self.r_min}")
        if self.delta is not None and not self.delta > 0:
            raise ConfigError("delta", f"must be positive, got {self.delta}")
        if self.t_end < 0:
            raise ConfigError("t_end", f"must be non-negative, got {self.t_end}")
        if self.record_every < 1:
            raise ConfigError("record_every", f"must be at least 1, got {self.record_every}")
        return self

    def resolve(self, epsilon: float) -> "SolverConfig":
        """Fill in the epsilon-dependent defaults (theta = 0.01 eps, delta = 10 eps)."""
        self.validate()
        return replace(
            self,
            theta=0.01 * epsilon if self.theta is None else self.theta,
            delta=10.0 * epsilon if self.delta is None else self.delta,
        )


@dataclass(frozen=True)
class StabilityConfig:
    m: int = 2
    r0: float = 0.5
    support_half_width: Optional[float] = None
    dt: float = 1e-3
    n_points: int = 400
    r_min: float = 1e-10
    t_end: Optional[float] = None
    record_every: int = 100
    floor: float = 1e-12
    growth_limit: float = 1e6
    base_state: str = "dynamic"
    initial_amplitude: float = 1.0
    base_dt: float = 1e-3
    base_tolerance: float = 1e-4

    def validate(self) -> "StabilityConfig":
        if self.m < 0:
            raise ConfigError("m", f"must be a non-negative integer, got {self.m}")
        if not 0 < self.r0 < 1:
            raise ConfigError("r0", f"must lie in (0, 1), got {self.r0}")
        if self.support_half_width is not None and not self.support_half_width > 0:
            raise ConfigError("support_half_width", "must be positive")
        if not self.dt > 0:
            raise ConfigError("dt", f"must be positive, got {self.dt}")
        if not self.base_dt > 0:
            raise ConfigError("base_dt", f"must be positive, got {self.base_dt}")
        if self.n_points < 8:
            raise ConfigError("n_points", f"must be at least 8, got {self.n_points}")
        if self.t_end is not None and not self.t_end > 0:
            raise ConfigError("t_end", f"must be positive, got {self.t_end}")
        if self.base_state not in ("dynamic", "shooting"):
            raise ConfigError("base_state", f"must be 'dynamic' or 'shooting', got {self.base_state!r}")
        if not self.initial_amplitude > 0:
            raise ConfigError("initial_amplitude", "must be positive")
        return self

    def horizon(self, epsilon: float) -> float:
        return 1.0 / epsilon**2 if self.t_end is None else self.t_end

    def half_width(self, epsilon: float) -> float:
        return 3.0 * epsilon if self.support_half_width is None else self.support_half_width


def parse_value(text: str) -> Any:
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null", ""):
        return None
    return text


def load_config_file(path: str | os.PathLike) -> dict[str, Any]:
    """Read a flat ``key = value`` file in dotenv syntax; values are coerced with parse_value."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config", f"file not found: {p}")
    values: dict[str, Any] = {}
    for key, raw in dotenv_values(p, interpolate=False).items():
        if raw is None:
            raise ConfigError("config", f"{p}: {key!r} has no value; expected 'key = value'")
        values[key.strip().lower().replace("-", "_")] = parse_value(raw)
    logger.debug("Loaded %d keys from %s", len(values), p)
    return values


def merge_settings(file_values: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    """Flags win over file values; ``None`` overrides mean 'not given'."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def build(cls, settings: dict[str, Any]):
    """Instantiate a config dataclass from the matching keys of ``settings``."""
    names = {f.name for f in fields(cls)}
    kwargs = {k: v for k, v in settings.items() if k in names}
    try:
        return cls(**kwargs).validate()
    except TypeError as exc:
        raise ConfigError(cls.__name__, str(exc)) from exc


def as_dict(config) -> dict[str, Any]:
    return asdict(config)


def output_dir(explicit: str | None = None) -> Path:
    return Path(explicit or os.environ.get("DEGENCH_OUT") or DEFAULT_OUT_DIR)


def database_url(out: Path) -> str:
    return os.environ.get("DEGENCH_DB") or f"sqlite:///{out / 'manifests.db'}"
