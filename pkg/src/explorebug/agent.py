"""Per-drone state machine, sense spin, path following and pairwise avoidance."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

HALF_PI = 0.5 * math.pi
BEAM_OFFSETS = (0.0, HALF_PI, math.pi, 3.0 * HALF_PI)


class FSM(str, enum.Enum):
    INIT = "Init"
    SENSE = "Sense"
    NAVIGATE = "NavigateToFrontier"
    AVOID = "DroneAvoidance"
    END = "End"


class Layer(str, enum.Enum):
    NOMINAL = "nominal"
    AVOIDANCE = "avoidance"


class Event(enum.Enum):
    NONE = 0
    SENSE_STARTED = 1
    SPIN_COMPLETE = 2
    IDLE = 3
    REACHED = 4
    ENDED = 5


def wrap_angle(a: float) -> float:
    """Normalize to (-pi, pi]."""
    r = math.remainder(a, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


@dataclass(frozen=True)
class AgentParams:
    nav_speed: float = 0.75
    spin_speed: float = 0.15
    yaw_threshold: float = 0.15
    reached_threshold: float = 0.2
    takeoff_time: float = 2.0


@dataclass
class AgentState:
    id: int
    x: float
    y: float
    psi: float = 0.0
    fsm: FSM = FSM.INIT
    altitude_layer: Layer = Layer.NOMINAL
    spin_start_yaw: float = 0.0
    spin_done: bool = False
    goal: tuple[float, float] | None = None
    # centroid of the frontier the goal was resolved from
    target: tuple[float, float] | None = None
    target_cells: frozenset = frozenset()
    path: list[tuple[float, float]] | None = None
    path_index: int = 0
    traveled: float = 0.0
    sensed: np.ndarray | None = field(default=None, repr=False)
    timer: float = 0.0
    end_time: float | None = None

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def spin_goal_yaw(self) -> float:
        return wrap_angle(self.spin_start_yaw + HALF_PI)

    @property
    def active(self) -> bool:
        return self.fsm is not FSM.END

    @property
    def stationary(self) -> bool:
        return self.fsm in (FSM.INIT, FSM.SENSE)

    @property
    def d_front(self) -> float:
        if self.fsm in (FSM.NAVIGATE, FSM.AVOID) and self.goal is not None:
            return math.hypot(self.goal[0] - self.x, self.goal[1] - self.y)
        return 0.0

    def begin_sense(self):
        self.fsm = FSM.SENSE
        self.spin_start_yaw = self.psi
        self.spin_done = False
        self.goal = self.target = self.path = None
        self.target_cells = frozenset()
        self.path_index = 0

    def begin_navigation(self, goal, path, target=None, target_cells=frozenset()):
        self.fsm = FSM.AVOID if self.altitude_layer is Layer.AVOIDANCE else FSM.NAVIGATE
        self.goal = (float(goal[0]), float(goal[1]))
        self.target = self.goal if target is None else (float(target[0]), float(target[1]))
        self.target_cells = frozenset(target_cells)
        self.path = [tuple(map(float, p)) for p in path]
        self.path_index = 0
        self.spin_done = False

    def end(self, t: float | None = None):
        self.fsm = FSM.END
        self.altitude_layer = Layer.NOMINAL
        self.goal = self.target = self.path = None
        self.target_cells = frozenset()
        self.end_time = t


def beam_angles(agent: AgentState) -> list[float]:
    """Front, left, back and right beam bearings at the current yaw."""
    return [wrap_angle(agent.psi + off) for off in BEAM_OFFSETS]


def sense_spin(agent: AgentState, dt: float, spin_speed: float, yaw_threshold: float) -> bool:
    """Advance the yaw toward ``spin_start_yaw + pi/2``; True once within ``yaw_threshold``."""
    remaining = wrap_angle(agent.spin_goal_yaw - agent.psi)
    if remaining < 0:
        # overshoot past the goal only happens through external yaw edits
        remaining = 0.0
    step = min(spin_speed * dt, remaining)
    agent.psi = wrap_angle(agent.psi + step)
    return abs(wrap_angle(agent.spin_goal_yaw - agent.psi)) < yaw_threshold


def spin_step_bound(spin_speed: float, dt: float, yaw_threshold: float) -> int:
    return math.ceil((HALF_PI - yaw_threshold) / (spin_speed * dt)) + 1


def follow_path(agent: AgentState, dt: float, speed: float) -> float:
    """Move along the remaining polyline by ``speed * dt``; returns the distance moved."""
    if not agent.path:
        return 0.0
    budget = speed * dt
    moved = 0.0
    path = agent.path
    while budget > 0 and agent.path_index < len(path):
        tx, ty = path[agent.path_index]
        d = math.hypot(tx - agent.x, ty - agent.y)
        if d <= budget:
            agent.x, agent.y = tx, ty
            budget -= d
            moved += d
            agent.path_index += 1
        else:
            f = budget / d
            agent.x += (tx - agent.x) * f
            agent.y += (ty - agent.y) * f
            moved += budget
            budget = 0.0
    agent.traveled += moved
    return moved


def step_fsm(agent: AgentState, dt: float, params: AgentParams,
             frontiers_available: bool = True, t: float | None = None) -> Event:
    """Advance one agent by one tick.

    Allocation is the caller's job: on ``SPIN_COMPLETE`` or ``IDLE`` the
    caller either hands the agent a goal via :meth:`AgentState.begin_navigation`
    or leaves it hovering. ``frontiers_available=False`` ends the agent from
    any state.
    """
    if agent.fsm is FSM.END:
        return Event.NONE
    if not frontiers_available:
        agent.end(t)
        return Event.ENDED
    if agent.fsm is FSM.INIT:
        agent.timer -= dt
        if agent.timer <= 1e-12:
            agent.begin_sense()
            return Event.SENSE_STARTED
        return Event.NONE
    if agent.fsm is FSM.SENSE:
        if agent.spin_done:
            return Event.IDLE
        if sense_spin(agent, dt, params.spin_speed, params.yaw_threshold):
            agent.spin_done = True
            return Event.SPIN_COMPLETE
        return Event.NONE
    if agent.fsm is FSM.NAVIGATE:
        follow_path(agent, dt, params.nav_speed)
        if agent.d_front < params.reached_threshold:
            agent.begin_sense()
            return Event.REACHED
        return Event.NONE
    return Event.NONE  # DroneAvoidance: hover


def _set_avoiding(agent: AgentState, on: bool):
    if on:
        agent.altitude_layer = Layer.AVOIDANCE
        if agent.fsm is FSM.NAVIGATE:
            agent.fsm = FSM.AVOID
    else:
        agent.altitude_layer = Layer.NOMINAL
        if agent.fsm is FSM.AVOID:
            agent.fsm = FSM.NAVIGATE


def check_avoidance(agents, r_coll: float, hysteresis: float = 0.2) -> set[int]:
    """Update altitude layers in place and return the ids now in the avoidance layer.

    Any nominal pair closer than ``r_coll`` sends the member nearer its goal
    (stationary drones count as distance 0, ties to the smaller id) to the
    avoidance layer. An avoiding drone returns once every nominal drone is at
    least ``r_coll + hysteresis`` away. A paused navigator whose only nearby
    nominal drones are stationary swaps layers with them, so a hovering
    drone never waits on a parked one.
    """
    active = sorted((a for a in agents if a.active), key=lambda a: a.id)
    release = r_coll + hysteresis

    def dist(a, b):
        return math.hypot(a.x - b.x, a.y - b.y)

    for a in active:
        if a.fsm is not FSM.AVOID:
            continue
        near = [b for b in active if b is not a and b.altitude_layer is Layer.NOMINAL
                and dist(a, b) < release]
        if near and all(b.stationary for b in near):
            for b in near:
                _set_avoiding(b, True)
            _set_avoiding(a, False)

    for a in active:
        if a.altitude_layer is not Layer.AVOIDANCE:
            continue
        if all(dist(a, b) >= release for b in active
               if b is not a and b.altitude_layer is Layer.NOMINAL):
            _set_avoiding(a, False)

    for i, a in enumerate(active):
        for b in active[i + 1:]:
            if a.altitude_layer is not Layer.NOMINAL:
                break
            if b.altitude_layer is not Layer.NOMINAL or dist(a, b) >= r_coll:
                continue
            da, db = a.d_front, b.d_front
            _set_avoiding(a if da <= db else b, True)

    return {a.id for a in active if a.altitude_layer is Layer.AVOIDANCE}
