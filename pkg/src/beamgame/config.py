"""
Experiment configuration: a single JSON document with one section per module.

Every section and every field must be present so that a config file fully
describes an experiment; use ``beamgame dump-config`` to get a complete
default document to edit.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .channel import AntennaPattern, PathLossParams, RadioParams
from .classical_game import TIE_BREAKS
from .geometry import TWO_PI, TopologyConfig
from .quantum_game import QGameConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelConfig:
    a_los: float = 32.5
    n_los: float = 2.0
    a_nlos: float = 45.5
    n_nlos: float = 2.5
    shadow_sigma: float = 1.7
    carrier_freq: float = 60.0
    beamwidth: float = TWO_PI / 3
    main_gain_db: float = 10.0
    side_gain_db: float = -10.0
    tx_power: float = 0.1
    bandwidth_hz: float = 2.16e9
    noise_figure_db: float = 6.0
    # explicit noise power in watts; None derives it from bandwidth and noise figure
    noise_power: float | None = None

    def path_loss(self) -> PathLossParams:
        return PathLossParams(self.a_los, self.n_los, self.a_nlos, self.n_nlos,
                              self.shadow_sigma, self.carrier_freq)

    def pattern(self) -> AntennaPattern:
        return AntennaPattern.from_db(self.beamwidth, self.main_gain_db, self.side_gain_db)

    def radio(self, tx_power: float | None = None) -> RadioParams:
        p = self.tx_power if tx_power is None else tx_power
        if self.noise_power is not None:
            return RadioParams(p, self.noise_power)
        return RadioParams.thermal(p, self.bandwidth_hz, self.noise_figure_db)


@dataclass(frozen=True)
class ClassicalConfig:
    tie_break: str = "lowest"
    # budget of single-player updates; dominance means N updates always suffice
    timer: int = 100
    uniform_low: float = 0.0
    uniform_high: float = TWO_PI

    def __post_init__(self):
        if self.tie_break not in TIE_BREAKS:
            raise ConfigError(f"classical_game.tie_break must be one of {TIE_BREAKS}")
        if self.timer < 1:
            raise ConfigError("classical_game.timer must be >= 1")
        if not self.uniform_high > self.uniform_low:
            raise ConfigError("classical_game.uniform_high must exceed uniform_low")


def _default_powers() -> list[float]:
    return [10.0 ** (-4 + 0.5 * k) for k in range(11)]


def _default_gammas() -> list[float]:
    return [k * math.pi / 8 for k in range(5)]


@dataclass(frozen=True)
class HarnessConfig:
    replications: int = 200
    seed: int = 0
    gammas: list[float] = field(default_factory=_default_gammas)
    powers: list[float] = field(default_factory=_default_powers)
    timers: list[int] = field(default_factory=lambda: list(range(1, 11)))
    output: str | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("harness.replications must be >= 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("harness.seed must be an unsigned 64-bit integer")
        for name in ("gammas", "powers", "timers"):
            vals = getattr(self, name)
            if not vals:
                raise ConfigError(f"harness.{name} must not be empty")
            if list(vals) != sorted(vals):
                raise ConfigError(f"harness.{name} must be sorted ascending")
        if any(p <= 0 for p in self.powers):
            raise ConfigError("harness.powers must be positive")
        if any(g < 0 or g > math.pi / 2 + 1e-12 for g in self.gammas):
            raise ConfigError("harness.gammas must lie in [0, pi/2]")
        if any(t < 1 for t in self.timers):
            raise ConfigError("harness.timers must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: TopologyConfig = field(default_factory=TopologyConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    classical_game: ClassicalConfig = field(default_factory=ClassicalConfig)
    quantum_game: QGameConfig = field(default_factory=QGameConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            section = dataclasses.asdict(getattr(self, f.name))
            out[f.name] = {k: list(v) if isinstance(v, tuple) else v for k, v in section.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def replace(self, **sections: Any) -> ExperimentConfig:
        """Copy with some fields of some sections replaced, e.g. ``harness={"seed": 3}``."""
        new = {}
        for name, changes in sections.items():
            new[name] = dataclasses.replace(getattr(self, name), **changes)
        return dataclasses.replace(self, **new)


def _build_section(cls, name: str, data: Any):
    if not isinstance(data, dict):
        raise ConfigError(f"section '{name}' must be a JSON object")
    names = [f.name for f in dataclasses.fields(cls)]
    for key in data:
        if key not in names:
            raise ConfigError(f"unknown field '{name}.{key}'")
    for key in names:
        if key not in data:
            raise ConfigError(f"missing config field '{name}.{key}'")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section '{name}': {exc}") from exc


def config_from_dict(data: Any) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    sections = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    for key in data:
        if key not in sections:
            raise ConfigError(f"unknown config section '{key}'")
    built = {}
    for name, f in sections.items():
        if name not in data:
            raise ConfigError(f"missing config section '{name}'")
        cls = type(f.default_factory())
        built[name] = _build_section(cls, name, data[name])
    return ExperimentConfig(**built)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
