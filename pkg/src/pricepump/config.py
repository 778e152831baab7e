"""Run configuration: defaults, validation, and JSON round-tripping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .market import Fixed, PsychoParams, SelectionMode, UniformRandom, validate_mode


@dataclass(frozen=True)
class ModelConfig:
    """Everything needed to reproduce a simulation run.

    ``master_seed`` plus a path index fully determine each trajectory; two
    runs with equal configs are bitwise identical. Defaults reproduce the
    reference setup: 500 traders, 10 active per day, optimism 1.2 and
    pessimism 0.96, 20 years of 360 trading days.
    """

    n_agents: int = 500
    selection: SelectionMode = Fixed(10)
    psycho: PsychoParams = field(default_factory=PsychoParams)
    horizon_years: float = 20.0
    trades_per_day: int = 1
    days_per_year: int = 360
    init_epsilon: float = 0.01
    master_seed: int = 0
    q_threshold: float = 0.1
    r_threshold: float = 0.6
    n_paths: int = 1000
    burn_in_years: float = 2.0

    @property
    def n_days(self) -> int:
        return int(round(self.horizon_years * self.days_per_year))

    @property
    def burn_in_days(self) -> int:
        return int(round(self.burn_in_years * self.days_per_year))

    def validate(self) -> None:
        if self.n_agents < 1:
            raise ConfigError(f"n_agents must be >= 1, got {self.n_agents}")
        validate_mode(self.selection, self.n_agents)
        self.psycho.validate()
        if not self.horizon_years > 0:
            raise ConfigError(f"horizon_years must be positive, got {self.horizon_years}")
        if self.trades_per_day < 1:
            raise ConfigError(f"trades_per_day must be >= 1, got {self.trades_per_day}")
        if self.days_per_year < 1:
            raise ConfigError(f"days_per_year must be >= 1, got {self.days_per_year}")
        if not 0 <= self.init_epsilon < 1:
            raise ConfigError(f"init_epsilon must lie in [0, 1), got {self.init_epsilon}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        for name in ("q_threshold", "r_threshold"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")
        if self.n_paths < 1:
            raise ConfigError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.burn_in_years < 0:
            raise ConfigError(f"burn_in_years must be >= 0, got {self.burn_in_years}")

    def to_dict(self) -> dict[str, Any]:
        if isinstance(self.selection, Fixed):
            selection: dict[str, Any] = {"mode": "fixed", "m": self.selection.m}
        else:
            selection = {
                "mode": "uniform",
                "m_min": self.selection.m_min,
                "m_max": self.selection.m_max,
            }
        return {
            "n_agents": self.n_agents,
            "selection": selection,
            "alpha": self.psycho.alpha,
            "beta": self.psycho.beta,
            "horizon_years": self.horizon_years,
            "trades_per_day": self.trades_per_day,
            "days_per_year": self.days_per_year,
            "init_epsilon": self.init_epsilon,
            "master_seed": self.master_seed,
            "q_threshold": self.q_threshold,
            "r_threshold": self.r_threshold,
            "n_paths": self.n_paths,
            "burn_in_years": self.burn_in_years,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelConfig":
        data = dict(data)
        known = {
            "n_agents", "selection", "alpha", "beta", "horizon_years",
            "trades_per_day", "days_per_year", "init_epsilon", "master_seed",
            "q_threshold", "r_threshold", "n_paths", "burn_in_years",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        if "selection" in data:
            kwargs["selection"] = _selection_from_dict(data.pop("selection"))
        psycho_kwargs = {}
        for name in ("alpha", "beta"):
            if name in data:
                psycho_kwargs[name] = float(data.pop(name))
        if psycho_kwargs:
            kwargs["psycho"] = PsychoParams(**{**_default_psycho(), **psycho_kwargs})
        for name, caster in (
            ("n_agents", int), ("horizon_years", float), ("trades_per_day", int),
            ("days_per_year", int), ("init_epsilon", float), ("master_seed", int),
            ("q_threshold", float), ("r_threshold", float), ("n_paths", int),
            ("burn_in_years", float),
        ):
            if name in data:
                kwargs[name] = caster(data.pop(name))
        config = cls(**kwargs)
        config.validate()
        return config


def _default_psycho() -> dict[str, float]:
    p = PsychoParams()
    return {"alpha": p.alpha, "beta": p.beta}


def _selection_from_dict(data: dict[str, Any]) -> SelectionMode:
    try:
        mode = data["mode"]
        if mode == "fixed":
            return Fixed(int(data["m"]))
        if mode == "uniform":
            return UniformRandom(int(data["m_min"]), int(data["m_max"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed selection entry {data!r}") from exc
    raise ConfigError(f"unknown selection mode {mode!r}")


def load_config(path: str | Path) -> ModelConfig:
    """Read a JSON config file, validating every field."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return ModelConfig.from_dict(data)


def save_config(config: ModelConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")


def selection_from_flags(active: int | None, active_range: str | None) -> SelectionMode | None:
    """Translate --active / --active-range flag values; None if neither given."""
    if active is not None and active_range is not None:
        raise ConfigError("--active and --active-range are mutually exclusive")
    if active is not None:
        return Fixed(active)
    if active_range is not None:
        parts = active_range.split(",")
        if len(parts) != 2:
            raise ConfigError(f"--active-range expects MIN,MAX, got {active_range!r}")
        try:
            lo, hi = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ConfigError(f"--active-range expects integers, got {active_range!r}") from exc
        return UniformRandom(lo, hi)
    return None
