"""Fixed-step simulation loop wiring mapping, frontiers, allocation, navigation and avoidance."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import agent as ag
from .agent import FSM, AgentParams, AgentState, Event, Layer
from .allocator import AllocationContext, rank
from .config import ScenarioConfig
from .errors import InvalidArgument, PathNotFound
from .frontier import Frontier, generate_frontiers
from .grid_map import GridMasks, MapParams, classify, integrate_beam, known_ratio, new_grid
from .metrics import CoverageLedger, overlap_pct
from .planner import PlanningSnapshot
from .seeding import stream
from .world import World, generate_world, raycast

log = logging.getLogger(__name__)

COMPLETE, EXHAUSTED, TIMEOUT = "complete", "exhausted", "timeout"


def default_starts(config: ScenarioConfig) -> list[tuple[float, float, float]]:
    """Drones in a row along the bottom edge, ``R_coll + hysteresis`` apart, facing +y."""
    n = config.n_drones
    spacing = config.safety_drones + config.avoidance_hysteresis
    span = spacing * (n - 1)
    lo = config.start_inset
    if span > config.size - 2 * lo:
        raise InvalidArgument(f"{n} drones spaced {spacing} m do not fit a {config.size} m edge")
    res = config.map_resolution
    x0 = 0.5 * config.size - 0.5 * span
    out = []
    for i in range(n):
        # snap to cell centers so plans start exactly on the agent
        x = (math.floor((x0 + i * spacing) / res) + 0.5) * res
        y = (math.floor(lo / res) + 0.5) * res
        out.append((x, y, 0.5 * math.pi))
    return out


def start_poses(config: ScenarioConfig) -> list[tuple[float, float, float]]:
    if config.start_poses is None:
        return default_starts(config)
    return [(p[0], p[1], p[2] if len(p) > 2 else 0.0) for p in config.start_poses]


@dataclass
class FrontierPass:
    pass_id: int
    tick: int
    frontiers: list[Frontier]
    masks: GridMasks
    planning: PlanningSnapshot


@dataclass
class AllocationOutcome:
    frontier: Frontier | None = None
    goal: tuple[float, float] | None = None
    path: list | None = None
    n_frontiers: int = 0
    excluded: int = 0
    unreachable: int = 0
    dead: int = 0
    escaped: bool = False


@dataclass
class RunReport:
    status: str
    sim_time: float
    area_pct: float
    path_lengths: list[float]
    overlap_pct: float | None
    series: list[tuple[float, float]]
    sensed_fractions: list[float]
    density: float = 0.0
    n_drones: int = 1
    heuristic: str = "explorebug"
    seed: int = 0
    ticks: int = 0
    # safety audit over the whole run
    min_nominal_separation: float = math.inf
    min_obstacle_clearance: float = math.inf
    off_plan_poses: int = 0
    frontier_passes: int = 0

    @property
    def path_len_total(self) -> float:
        return float(sum(self.path_lengths))

    def summary_row(self) -> list:
        return [
            self.density, self.n_drones, self.heuristic, self.seed, self.status,
            _fmt(self.sim_time), _fmt(self.area_pct), _fmt(self.path_len_total),
            "" if self.overlap_pct is None else _fmt(self.overlap_pct),
        ]

    def to_csv(self) -> str:
        """Run report as CSV text: the aggregate columns plus per-agent extras."""
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(REPORT_COLUMNS + ["path_per_agent_m", "sensed_fraction_per_agent", "ticks",
                                       "min_nominal_separation_m", "min_obstacle_clearance_m",
                                       "off_plan_poses", "frontier_passes"])
        wr.writerow(self.summary_row() + [
            ";".join(_fmt(v) for v in self.path_lengths),
            ";".join(_fmt(v) for v in self.sensed_fractions),
            self.ticks, _fmt(self.min_nominal_separation), _fmt(self.min_obstacle_clearance),
            self.off_plan_poses, self.frontier_passes,
        ])
        return buf.getvalue()

    def series_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t_s", "area_pct"])
        wr.writerows([_fmt(t), _fmt(a)] for t, a in self.series)
        return buf.getvalue()


REPORT_COLUMNS = ["density", "n_drones", "heuristic", "seed", "status", "time_s", "area_pct",
                  "path_len_m", "overlap_pct"]
TRAJECTORY_COLUMNS = ["t", "agent_id", "x", "y", "psi", "fsm_state", "altitude_layer", "d_front"]


def _fmt(v: float) -> str:
    return "inf" if v == math.inf else f"{v:.6f}"


class Simulation:
    """One deterministic run. Call :meth:`step` until :attr:`status` is set."""

    def __init__(self, config: ScenarioConfig, world: World | None = None,
                 record_frontiers: bool = False):
        self.config = config
        poses = start_poses(config)
        if world is None:
            world = generate_world(
                config.size, config.density, config.obstacle_radius, config.clearance,
                seed=config.seed, starts=[p[:2] for p in poses],
                resolution=config.map_resolution, inflate=config.inflation,
            )
        self.world = world
        for x, y, _ in poses:
            if world.inside_obstacle(x, y):
                raise InvalidArgument(f"start ({x}, {y}) is inside an obstacle")
        self.grid = new_grid(world.bounds, config.map_resolution, MapParams(
            config.l_hit, config.l_miss, config.l_min, config.l_max, config.p_occ, config.p_free))
        self.params = AgentParams(config.nav_speed, config.spin_speed, config.yaw_threshold,
                                  config.reached_threshold, config.takeoff_time)
        self.agents = [
            AgentState(id=i, x=x, y=y, psi=ag.wrap_angle(psi), timer=config.takeoff_time,
                       sensed=np.zeros(self.grid.shape, dtype=bool))
            for i, (x, y, psi) in enumerate(poses)
        ]
        self.dt = config.dt
        self.tick = 0
        self.status: str | None = None
        self.sim_time = 0.0
        self.noise = stream(config.seed, "sensor") if config.range_noise_std > 0 else None

        h, w = self.grid.shape
        res = self.grid.resolution
        cx = (np.arange(w) + 0.5) * res
        cy = (np.arange(h) + 0.5) * res
        self._inside = ((cy <= world.size)[:, None] & (cx <= world.size)[None, :])
        self._inside_count = int(np.count_nonzero(self._inside))

        # bumped on every completed spin or End; idle agents retry only on change
        self.epoch = 0
        self._last_attempt: dict[int, tuple[int, AllocationOutcome]] = {}
        self._pass: FrontierPass | None = None
        self._pass_count = 0
        self.frontier_log: list[tuple[int, list[Frontier]]] | None = [] if record_frontiers else None
        # cells within the reached threshold of any completed spin
        self._spun = np.zeros(self.grid.shape, dtype=bool)
        self._plan_trav: dict[int, np.ndarray] = {}
        self._escaping: set[int] = set()

        self.series: list[tuple[float, float]] = []
        self.trajectory: list[tuple] = []
        self.min_nominal_sep = math.inf
        self.min_clearance = math.inf
        self.off_plan_poses = 0
        self._record(0.0)
        self.series.append((0.0, self.area_pct()))

    # -- measurement ------------------------------------------------------------
    def area_pct(self) -> float:
        return 100.0 * np.count_nonzero(self.grid.state.astype(bool) & self._inside) / self._inside_count

    def masks(self) -> GridMasks:
        return classify(self.grid)

    # -- frontier pass ------------------------------------------------------------
    def frontier_pass(self) -> FrontierPass:
        """Frontiers for the current map; reused within a tick since beams land in phase 1."""
        if self._pass is None or self._pass.tick != self.tick:
            masks = classify(self.grid)
            fr = generate_frontiers(masks, self.config.frontier_min, self.config.frontier_max)
            self._pass = FrontierPass(self._pass_count, self.tick, fr, masks,
                                      PlanningSnapshot(masks, self.config.inflation))
            self._pass_count += 1
            if self.frontier_log is not None:
                self.frontier_log.append((self._pass.pass_id, fr))
        return self._pass

    def _peer_points(self, me: AgentState):
        out = []
        for a in self.agents:
            if a is me or not a.active:
                continue
            out.append((a.id, a.target if a.target is not None else a.position))
        return out

    def allocate_for(self, me: AgentState) -> AllocationOutcome:
        cfg = self.config
        fp = self.frontier_pass()
        outcome = AllocationOutcome(n_frontiers=len(fp.frontiers))
        # a regenerated frontier is "the same" as a peer's if they share a cell
        held = set()
        for a in self.agents:
            if a is not me and a.active and a.target_cells:
                held |= a.target_cells
        cands = []
        for f in fp.frontiers:
            if held and not held.isdisjoint(f.cells):
                outcome.excluded += 1
            else:
                cands.append(f)
        if not cands:
            return outcome
        ctx = AllocationContext(me.position, me.id, cands, self._peer_points(me), cfg.distance_weight)
        snap = fp.planning
        start_cell = snap.cell_of(me.position)
        label = snap.component(start_cell)
        start = me.position
        prefix: list = []
        if label == 0:
            # parked inside the margin after new evidence: step out to the nearest safe cell
            esc = self._nearest_safe(snap, me.position)
            if esc is None:
                outcome.unreachable = len(cands)
                return outcome
            start = snap.masks.cell_center(*esc)
            label = snap.component(esc)
            prefix = [me.position]
            outcome.escaped = True
        for f in rank(ctx, cfg.heuristic):
            goal_cell = snap.resolve_goal(f.centroid, cfg.goal_search_radius, label)
            if goal_cell is None:
                outcome.unreachable += 1
                continue
            if self._spun[goal_cell[1], goal_cell[0]]:
                outcome.dead += 1
                continue
            try:
                path = snap.plan(start, snap.masks.cell_center(*goal_cell), 0.0)
            except PathNotFound:  # pragma: no cover - same component
                outcome.unreachable += 1
                continue
            outcome.frontier = f
            outcome.goal = path[-1]
            outcome.path = prefix + path
            return outcome
        return outcome

    def _nearest_safe(self, snap: PlanningSnapshot, point):
        best = None
        cx, cy = snap.cell_of(point)
        r = int(math.ceil(self.config.goal_search_radius / snap.masks.resolution))
        h, w = snap.masks.shape
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                x, y = cx + dx, cy + dy
                if 0 <= x < w and 0 <= y < h and snap.labels[y, x]:
                    key = (dx * dx + dy * dy, y, x)
                    if best is None or key < best[0]:
                        best = (key, (x, y))
        return None if best is None else best[1]

    def _mark_spun(self, a: AgentState):
        res = self.grid.resolution
        r = self.config.reached_threshold
        cx, cy = self.grid.world_to_cell(a.x, a.y)
        k = int(math.ceil(r / res))
        h, w = self.grid.shape
        for dy in range(-k, k + 1):
            for dx in range(-k, k + 1):
                x, y = cx + dx, cy + dy
                if 0 <= x < w and 0 <= y < h:
                    px, py = self.grid.cell_center(x, y)
                    if math.hypot(px - a.x, py - a.y) <= r + 1e-9:
                        self._spun[y, x] = True

    def _try_allocate(self, a: AgentState):
        out = self.allocate_for(a)
        self._last_attempt[a.id] = (self.epoch, out)
        if out.frontier is not None:
            a.begin_navigation(out.goal, out.path, target=out.frontier.centroid,
                               target_cells=frozenset(out.frontier.cells))
            self._plan_trav[a.id] = self._pass.planning.traversable
            if out.escaped:
                self._escaping.add(a.id)
            else:
                self._escaping.discard(a.id)
            log.debug("t=%.2f agent %d -> frontier %d goal %s", self.tick * self.dt, a.id,
                      out.frontier.id, out.goal)
        return out

    # -- main loop ----------------------------------------------------------------
    def step(self):
        if self.status is not None:
            return
        cfg = self.config
        R = cfg.sensor_range
        # (1) sensing
        for a in self.agents:
            if a.fsm is FSM.SENSE and not a.spin_done:
                for ang in ag.beam_angles(a):
                    d = raycast(self.world, a.position, ang, R)
                    if self.noise is not None and d < R:
                        d = float(np.clip(d + self.noise.normal(0.0, cfg.range_noise_std), 0.0, R))
                    integrate_beam(self.grid, a.position, ang, d, R, touched=a.sensed)
        # (2) avoidance
        ag.check_avoidance(self.agents, cfg.safety_drones, cfg.avoidance_hysteresis)
        # (3) state machines, in id order
        t_next = (self.tick + 1) * self.dt
        for a in self.agents:
            ev = ag.step_fsm(a, self.dt, self.params, t=t_next)
            if ev is Event.SPIN_COMPLETE:
                self._mark_spun(a)
                self.epoch += 1
                self._try_allocate(a)
            elif ev is Event.IDLE:
                last = self._last_attempt.get(a.id)
                if last is None or last[0] != self.epoch:
                    self._try_allocate(a)
        self._settle_idle(t_next)
        self.tick += 1
        t = self.tick * self.dt
        self._record(t)
        if self.tick % int(round(cfg.tick_rate)) == 0:
            self.series.append((t, self.area_pct()))
        self._check_done(t)

    def _idle(self, a: AgentState) -> bool:
        return a.fsm is FSM.SENSE and a.spin_done

    def _settle_idle(self, t: float):
        """End idle drones that saw no live frontiers once no peer can still add evidence."""
        busy = any(a.fsm is FSM.INIT or (a.fsm is FSM.SENSE and not a.spin_done) for a in self.agents)
        if busy:
            return
        for a in self.agents:
            if not self._idle(a):
                continue
            epoch, out = self._last_attempt.get(a.id, (None, None))
            if out is None or epoch != self.epoch:
                continue
            if out.excluded == 0 and out.unreachable == 0:
                a.end(t)
                a.altitude_layer = Layer.NOMINAL
                self.epoch += 1
                # everyone else re-checks against the same map next tick
        return

    def _check_done(self, t: float):
        cfg = self.config
        active = [a for a in self.agents if a.active]
        if not active:
            last = max(a.end_time for a in self.agents)
            self._finish(COMPLETE, min(last + cfg.landing_time, cfg.max_sim_time))
            return
        stuck = all(
            self._idle(a) and self._last_attempt.get(a.id, (None,))[0] == self.epoch for a in active
        )
        if stuck:
            # nothing can change: every remaining frontier is unreachable or peer-held by idlers
            self._finish(EXHAUSTED, min(t + cfg.landing_time, cfg.max_sim_time))
            return
        if self.tick >= cfg.max_ticks:
            self._finish(TIMEOUT, cfg.max_sim_time)

    def _finish(self, status: str, sim_time: float):
        self.status = status
        self.sim_time = sim_time
        if not self.series or self.series[-1][0] != self.tick * self.dt:
            self.series.append((self.tick * self.dt, self.area_pct()))

    def _record(self, t: float):
        cfg = self.config
        nominal = []
        for a in self.agents:
            self.trajectory.append((t, a.id, a.x, a.y, a.psi, a.fsm.value, a.altitude_layer.value, a.d_front))
            if not a.active:
                continue
            if a.altitude_layer is Layer.NOMINAL:
                nominal.append(a)
            if a.fsm in (FSM.NAVIGATE, FSM.AVOID):
                c = self.world.clearance(a.x, a.y) - cfg.drone_radius
                if c < self.min_clearance:
                    self.min_clearance = c
                trav = self._plan_trav.get(a.id)
                if trav is not None and a.id not in self._escaping:
                    ix, iy = self.grid.world_to_cell(a.x, a.y)
                    if not trav[iy, ix]:
                        self.off_plan_poses += 1
        for i, a in enumerate(nominal):
            for b in nominal[i + 1:]:
                d = math.hypot(a.x - b.x, a.y - b.y)
                if d < self.min_nominal_sep:
                    self.min_nominal_sep = d

    # -- reporting ------------------------------------------------------------------
    def run(self) -> RunReport:
        while self.status is None:
            self.step()
        return self.report()

    def ledger(self) -> CoverageLedger:
        masks = self.masks()
        known = masks.free | masks.obstacle
        return CoverageLedger([a.sensed & known for a in self.agents], masks)

    def report(self) -> RunReport:
        cfg = self.config
        led = self.ledger()
        area = 100.0 * known_ratio(led.masks, self.world)
        return RunReport(
            status=self.status or TIMEOUT,
            sim_time=self.sim_time,
            area_pct=area,
            path_lengths=[a.traveled for a in self.agents],
            overlap_pct=overlap_pct(led) if len(self.agents) > 1 else None,
            series=list(self.series),
            sensed_fractions=[float(np.count_nonzero(s)) / self._inside_count for s in led.sensed],
            density=cfg.density,
            n_drones=cfg.n_drones,
            heuristic=cfg.heuristic,
            seed=cfg.seed,
            ticks=self.tick,
            min_nominal_separation=self.min_nominal_sep,
            min_obstacle_clearance=self.min_clearance,
            off_plan_poses=self.off_plan_poses,
            frontier_passes=self._pass_count,
        )


def run(config: ScenarioConfig, world: World | None = None) -> RunReport:
    """Simulate ``config`` to completion, exhaustion or timeout."""
    return Simulation(config, world).run()


def trajectory_csv(sim: Simulation) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(TRAJECTORY_COLUMNS)
    for t, aid, x, y, psi, fsm, layer, d in sim.trajectory:
        wr.writerow([_fmt(t), aid, _fmt(x), _fmt(y), _fmt(psi), fsm, layer, _fmt(d)])
    return buf.getvalue()


# -- batches -------------------------------------------------------------------------

SWEEP_KEYS = ("density", "n_drones", "heuristic")


def expand_sweep(base: ScenarioConfig, sweep: dict | None) -> list[ScenarioConfig]:
    """Cartesian product of the sweep lists over ``base`` (density, drones, heuristic order)."""
    sweep = dict(sweep or {})
    unknown = set(sweep) - set(SWEEP_KEYS)
    if unknown:
        raise InvalidArgument(f"unknown sweep keys {sorted(unknown)}")
    axes = [sweep.get(k, [getattr(base, k)]) for k in SWEEP_KEYS]
    if any(len(a) == 0 for a in axes):
        raise InvalidArgument("empty sweep axis")
    out = []
    for d in axes[0]:
        for n in axes[1]:
            for h in axes[2]:
                out.append(base.replace(density=float(d), n_drones=int(n), heuristic=h))
    return out


@dataclass
class BatchRow:
    config: ScenarioConfig
    report: RunReport | None = None
    error: str | None = None

    @property
    def group(self):
        return (self.config.density, self.config.n_drones, self.config.heuristic)


def _run_one(config: ScenarioConfig) -> BatchRow:
    try:
        return BatchRow(config, run(config))
    except Exception as exc:  # recorded per row; the batch keeps going
        return BatchRow(config, error=f"{type(exc).__name__}: {exc}")


def batch(configs, seeds, workers: int = 1) -> list[BatchRow]:
    """Run every config under every seed. Rows come back in (config, seed) order."""
    configs = list(configs)
    seeds = list(seeds)
    if not configs or not seeds:
        raise InvalidArgument("batch needs at least one config and one seed")
    jobs = [c.replace(seed=int(s)) for c in configs for s in seeds]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(c) for c in jobs]


def _pm(values) -> str:
    v = np.asarray(values, dtype=np.float64)
    return f"{v.mean():.6f} ± {v.std(ddof=0):.6f}"


def aggregate_csv(rows: list[BatchRow]) -> str:
    """Per-run rows, then one ``mean ± std`` row per (density, n_drones, heuristic)."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(REPORT_COLUMNS)
    groups: dict[tuple, list[RunReport]] = {}
    for r in rows:
        groups.setdefault(r.group, [])
        if r.report is not None:
            wr.writerow(r.report.summary_row())
            groups[r.group].append(r.report)
        else:
            c = r.config
            wr.writerow([c.density, c.n_drones, c.heuristic, c.seed, f"error: {r.error}", "", "", "", ""])
    for (d, n, h), reps in groups.items():
        if not reps:
            wr.writerow([d, n, h, "mean", "no runs", "", "", "", ""])
            continue
        statuses = ";".join(f"{s}:{sum(r.status == s for r in reps)}"
                            for s in (COMPLETE, EXHAUSTED, TIMEOUT) if any(r.status == s for r in reps))
        ov = [r.overlap_pct for r in reps if r.overlap_pct is not None]
        wr.writerow([d, n, h, "mean", statuses,
                     _pm([r.sim_time for r in reps]), _pm([r.area_pct for r in reps]),
                     _pm([r.path_len_total for r in reps]), _pm(ov) if ov else ""])
    return buf.getvalue()
