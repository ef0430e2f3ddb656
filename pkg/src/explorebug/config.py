"""Scenario configuration, JSON loading and validation."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .allocator import HEURISTICS
from .errors import ConfigError


@dataclass(frozen=True)
class ScenarioConfig:
    # world
    size: float = 20.0
    density: float = 0.05
    obstacle_radius: float = 0.15
    # None -> 2 * (safety_obstacles + drone_radius)
    obstacle_clearance: float | None = None
    seed: int = 0
    # swarm
    n_drones: int = 1
    # None -> evenly spaced along the bottom edge; else [[x, y], ...] or [[x, y, psi], ...]
    start_poses: tuple | None = None
    start_inset: float = 1.0
    drone_radius: float = 0.05
    # mapping / sensing
    map_resolution: float = 0.1
    sensor_range: float = 4.0
    range_noise_std: float = 0.0
    l_hit: float = 0.85
    l_miss: float = -0.4
    l_min: float = -2.0
    l_max: float = 3.5
    p_occ: float = 0.65
    p_free: float = 0.35
    # navigation and avoidance
    safety_obstacles: float = 0.4
    safety_drones: float = 2.0
    avoidance_hysteresis: float = 0.2
    nav_speed: float = 0.75
    reached_threshold: float = 0.2
    goal_search_radius: float = 1.5
    spin_speed: float = 0.15
    yaw_threshold: float = 0.15
    takeoff_time: float = 2.0
    landing_time: float = 2.0
    # frontiers and allocation
    frontier_min: float = 1.5
    frontier_max: float = 3.5
    heuristic: str = "explorebug"
    distance_weight: float = 2.0
    # clock
    tick_rate: float = 20.0
    max_sim_time: float = 5000.0

    def __post_init__(self):
        if self.start_poses is not None:
            poses = tuple(tuple(float(v) for v in p) for p in self.start_poses)
            object.__setattr__(self, "start_poses", poses)
        self.validate()

    # -- derived ------------------------------------------------------------
    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    @property
    def clearance(self) -> float:
        if self.obstacle_clearance is not None:
            return self.obstacle_clearance
        return 2.0 * (self.safety_obstacles + self.drone_radius)

    @property
    def inflation(self) -> float:
        """Planner clearance from obstacle and unknown cells (body edge at the safety distance)."""
        return self.safety_obstacles + self.drone_radius

    @property
    def max_ticks(self) -> int:
        return int(round(self.max_sim_time * self.tick_rate))

    # -- validation -----------------------------------------------------------
    def validate(self):
        positive = (
            "size", "obstacle_radius", "map_resolution", "sensor_range", "safety_obstacles",
            "safety_drones", "nav_speed", "reached_threshold", "spin_speed", "yaw_threshold",
            "frontier_min", "frontier_max", "tick_rate", "max_sim_time", "goal_search_radius",
            "drone_radius",
        )
        for name in positive:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be a positive number, got {v!r}", name)
        non_negative = ("density", "range_noise_std", "avoidance_hysteresis", "takeoff_time",
                        "landing_time", "start_inset", "distance_weight")
        for name in non_negative:
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be a non-negative number, got {v!r}", name)
        if not isinstance(self.n_drones, int) or isinstance(self.n_drones, bool) or self.n_drones < 1:
            raise ConfigError(f"n_drones must be an integer >= 1, got {self.n_drones!r}", "n_drones")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}", "seed")
        if self.heuristic not in HEURISTICS:
            raise ConfigError(f"heuristic must be one of {HEURISTICS}, got {self.heuristic!r}", "heuristic")
        if self.frontier_min > self.frontier_max:
            raise ConfigError("frontier_min must not exceed frontier_max", "frontier_min")
        if self.yaw_threshold >= 0.5 * math.pi:
            raise ConfigError("yaw_threshold must be below pi/2", "yaw_threshold")
        if self.start_poses is not None:
            if len(self.start_poses) != self.n_drones:
                raise ConfigError(
                    f"start_poses has {len(self.start_poses)} entries for {self.n_drones} drones",
                    "start_poses",
                )
            for p in self.start_poses:
                if len(p) not in (2, 3) or not all(0 < v < self.size for v in p[:2]):
                    raise ConfigError(f"start pose {p} must be [x, y(, psi)] inside the arena", "start_poses")
        for name in ("obstacle_clearance",):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, (int, float)) or v < 0):
                raise ConfigError(f"{name} must be null or a non-negative number", name)

    # -- presets ------------------------------------------------------------------
    @classmethod
    def simulation(cls, **overrides) -> "ScenarioConfig":
        """Simulation parameter set (map 0.1, range 4, safety 0.4 / 2.0, spin 0.15)."""
        return cls(**overrides)

    @classmethod
    def real_world(cls, **overrides) -> "ScenarioConfig":
        """Flight-arena parameter set: 8 m arena, range 2, safety 0.25 / 1.0, spin 0.1."""
        base = dict(size=8.0, density=0.05, sensor_range=2.0, safety_obstacles=0.25,
                    safety_drones=1.0, spin_speed=0.1, start_inset=0.8)
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["start_poses"] is not None:
            d["start_poses"] = [list(p) for p in d["start_poses"]]
        return d


CONFIG_KEYS = tuple(f.name for f in fields(ScenarioConfig))
_INT_KEYS = {"seed", "n_drones"}


def config_from_dict(data: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    out = {}
    for key, value in data.items():
        if key == "sweep":
            continue
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}", key)
        if key in _INT_KEYS and isinstance(value, float) and value.is_integer():
            value = int(value)
        out[key] = value
    try:
        if base is not None:
            return dataclasses.replace(base, **out)
        return ScenarioConfig(**out)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:  # pragma: no cover - defensive
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ScenarioConfig:
    return config_from_dict(read_config_document(path))


def read_config_document(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def config_schema() -> dict:
    """JSON Schema describing the scenario config document."""
    props = {}
    for f in fields(ScenarioConfig):
        if f.name in _INT_KEYS:
            t = {"type": "integer", "minimum": 0 if f.name == "seed" else 1}
        elif f.name == "heuristic":
            t = {"type": "string", "enum": list(HEURISTICS)}
        elif f.name == "start_poses":
            t = {"type": ["array", "null"],
                 "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 3}}
        elif f.name == "obstacle_clearance":
            t = {"type": ["number", "null"], "minimum": 0}
        else:
            t = {"type": "number"}
        default = f.default if f.default is not dataclasses.MISSING else None
        t["default"] = default
        props[f.name] = t
    props["sweep"] = {
        "type": "object",
        "description": "optional lists of values to sweep: density, n_drones, heuristic",
        "properties": {
            "density": {"type": "array", "items": {"type": "number", "minimum": 0}},
            "n_drones": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "heuristic": {"type": "array", "items": {"type": "string", "enum": list(HEURISTICS)}},
        },
        "additionalProperties": False,
    }
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "ExploreBug scenario config",
        "description": "All distances in metres, times in seconds, angles in radians.",
        "type": "object",
        "properties": props,
        "additionalProperties": False,
    }
