"""Command-line front end: ``explorebug run | sweep | ablate | replay``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import engine
from .allocator import HEURISTICS
from .config import ScenarioConfig, config_from_dict, read_config_document
from .engine import COMPLETE, EXHAUSTED, TIMEOUT, Simulation
from .errors import ConfigError, ExploreBugError
from .frontier import write_frontier_csv
from .grid_map import write_pgm
from .world import load_world, save_world

log = logging.getLogger("explorebug")

EXIT_CODES = {COMPLETE: 0, EXHAUSTED: 2, TIMEOUT: 3}
EXIT_CONFIG = 1
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def parse_seeds(text: str) -> list[int]:
    """``"3"``, ``"1..5"`` (inclusive) or ``"1,4,9"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            seeds = list(range(int(lo), int(hi) + 1))
        else:
            seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad seed list {text!r}", "seeds") from None
    if not seeds:
        raise ConfigError(f"empty seed list {text!r}", "seeds")
    return seeds


def _configure_logging():
    name = os.environ.get("EXPLORE_LOG_LEVEL", "error").strip().lower()
    level = LOG_LEVELS.get(name, logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def _load(args) -> tuple[ScenarioConfig, dict]:
    doc = read_config_document(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "heuristic", None) is not None:
        overrides["heuristic"] = args.heuristic
    if getattr(args, "drones", None) is not None:
        overrides["n_drones"] = args.drones
    if getattr(args, "density", None) is not None:
        overrides["density"] = args.density
    cfg = config_from_dict(doc)
    if overrides:
        cfg = config_from_dict(overrides, base=cfg)
    return cfg, doc.get("sweep") or {}


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_run_outputs(sim: Simulation, out: Path) -> engine.RunReport:
    report = sim.report()
    (out / "run_report.csv").write_text(report.to_csv())
    (out / "rate_series.csv").write_text(report.series_csv())
    (out / "trajectories.csv").write_text(engine.trajectory_csv(sim))
    write_pgm(sim.masks(), out / "map.pgm")
    save_world(sim.world, out / "world.txt")
    (out / "config.json").write_text(json.dumps(sim.config.to_dict(), indent=2) + "\n")
    return report


def _simulate(cfg: ScenarioConfig, out: Path, snapshot_every: float, world=None) -> engine.RunReport:
    sim = Simulation(cfg, world, record_frontiers=snapshot_every > 0)
    if snapshot_every > 0:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        every = max(1, int(round(snapshot_every * cfg.tick_rate)))
        write_pgm(sim.masks(), snap_dir / f"map_{0:07d}.pgm")
        while sim.status is None:
            sim.step()
            if sim.tick % every == 0:
                write_pgm(sim.masks(), snap_dir / f"map_{sim.tick:07d}.pgm")
        write_frontier_csv(out / "frontiers.csv", sim.frontier_log)
    else:
        sim.run()
    report = write_run_outputs(sim, out)
    log.info("%s after %.1f s, area %.2f %%", report.status, report.sim_time, report.area_pct)
    return report


def cmd_run(args) -> int:
    cfg, _ = _load(args)
    out = _out_dir(args.out)
    report = _simulate(cfg, out, args.snapshot_every)
    print(f"{report.status} t={report.sim_time:.1f}s area={report.area_pct:.2f}% "
          f"path={report.path_len_total:.1f}m -> {out}")
    return EXIT_CODES[report.status]


def cmd_replay(args) -> int:
    cfg, _ = _load(args)
    world = load_world(args.world)
    out = _out_dir(args.out)
    report = _simulate(cfg, out, args.snapshot_every, world=world)
    print(f"{report.status} t={report.sim_time:.1f}s area={report.area_pct:.2f}% -> {out}")
    return EXIT_CODES[report.status]


def _write_batch(rows, out: Path, name: str):
    for r in rows:
        if r.report is None:
            continue
        c = r.config
        sub = out / "runs" / f"d{c.density:g}_n{c.n_drones}_{c.heuristic}_s{c.seed}"
        sub.mkdir(parents=True, exist_ok=True)
        (sub / "run_report.csv").write_text(r.report.to_csv())
        (sub / "rate_series.csv").write_text(r.report.series_csv())
    path = out / name
    path.write_text(engine.aggregate_csv(rows))
    failed = [r for r in rows if r.report is None]
    for r in failed:
        log.error("run %s failed: %s", r.group + (r.config.seed,), r.error)
    print(f"{len(rows)} runs ({len(failed)} failed) -> {path}")


def _seed_list(args, cfg: ScenarioConfig) -> list[int]:
    if args.seeds is not None:
        return parse_seeds(args.seeds)
    return [cfg.seed]


def cmd_sweep(args) -> int:
    cfg, sweep = _load(args)
    # command-line overrides pin the corresponding axis
    sweep = {k: v for k, v in sweep.items()
             if not (k == "n_drones" and args.drones is not None)
             and not (k == "density" and args.density is not None)
             and not (k == "heuristic" and args.heuristic is not None)}
    try:
        configs = engine.expand_sweep(cfg, sweep)
    except ExploreBugError as exc:
        raise ConfigError(str(exc), "sweep") from exc
    rows = engine.batch(configs, _seed_list(args, cfg), workers=args.workers)
    _write_batch(rows, _out_dir(args.out), "aggregate.csv")
    return 0 if all(r.report is not None for r in rows) else EXIT_CONFIG


def cmd_ablate(args) -> int:
    cfg, _ = _load(args)
    configs = [cfg.replace(heuristic=h) for h in HEURISTICS]
    rows = engine.batch(configs, _seed_list(args, cfg), workers=args.workers)
    _write_batch(rows, _out_dir(args.out), "ablation.csv")
    return 0 if all(r.report is not None for r in rows) else EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="explorebug", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeds: bool):
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", default="out", help="output directory (created if absent)")
        sp.add_argument("--heuristic", choices=HEURISTICS)
        sp.add_argument("--drones", type=int, help="override n_drones")
        sp.add_argument("--density", type=float, help="override obstacle density (1/m^2)")
        if seeds:
            sp.add_argument("--seeds", help="N..M inclusive, or a comma list")
            sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        else:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--snapshot-every", type=float, default=0.0, metavar="SECONDS",
                            help="write map PGMs and frontiers.csv every SECONDS of sim time")

    sp = sub.add_parser("run", help="simulate one scenario")
    common(sp, seeds=False)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("replay", help="rerun a saved world file under a config")
    common(sp, seeds=False)
    sp.add_argument("--world", required=True, help="world file written by run")
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("sweep", help="run the config's sweep grid over several seeds")
    common(sp, seeds=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("ablate", help="compare the three allocation heuristics")
    common(sp, seeds=True)
    sp.set_defaults(func=cmd_ablate)
    return p


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExploreBugError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
