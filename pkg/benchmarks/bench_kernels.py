"""Time the numba kernels against their numpy/Python fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Both variants are called directly, so the EXPLOREBUG_NO_NUMBA flag does not
matter here. Numba timings exclude the first (compiling) call.
"""
import argparse
import math
import time

import numpy as np

from explorebug import grid_map, planner, world
from explorebug.grid_map import GridMasks
from explorebug.seeding import stream


def best_of(fn, repeat):
    fn()  # warm-up / JIT compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_raycast(n_rays=2000):
    w = world.generate_world(20.0, 0.1, seed=3)
    rng = stream(0, "bench", 0)
    pts = []
    while len(pts) < n_rays:
        x, y = rng.uniform(0.5, 19.5, 2)
        if not w.inside_obstacle(x, y):
            pts.append((x, y, rng.uniform(-math.pi, math.pi)))

    def make(kernel):
        return lambda: [kernel(w.obstacles, 20.0, x, y, a, 4.0) for x, y, a in pts]
    return n_rays, make(world._raycast_kernel), make(world._raycast_numpy)


def bench_integrate(n_beams=2000):
    g = grid_map.new_grid((0, 0, 20, 20), 0.1)
    rng = stream(0, "bench", 1)
    ends = rng.integers(0, 200, size=(n_beams, 4))
    p = g.params
    mark = np.zeros(g.shape, dtype=bool)

    def make(kernel):
        def go():
            lo = g.log_odds.copy()
            st = g.state.copy()
            for x0, y0, x1, y1 in ends:
                kernel(lo, st, mark, int(x0), int(y0), int(x1), int(y1), True,
                       p.l_hit, p.l_miss, p.l_min, p.l_max, p.logit_occ, p.logit_free)
        return go
    return n_beams, make(grid_map._integrate_kernel), make(grid_map._integrate_numpy)


def bench_astar(n_queries=20):
    rng = stream(0, "bench", 2)
    state = np.where(rng.random((200, 200)) < 0.2, 2, 1).astype(np.int8)
    trav = planner.traversable_mask(GridMasks.from_state(state), 0.0)
    free = np.argwhere(trav)
    pairs = [(tuple(free[i][::-1]), tuple(free[j][::-1]))
             for i, j in rng.integers(0, len(free), size=(n_queries, 2))]

    def make(kernel):
        return lambda: [kernel(trav, s[0], s[1], g[0], g[1]) for s, g in pairs]
    return n_queries, make(planner._astar_kernel), make(planner._astar_python)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<12}{'calls':>8}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, bench in (("raycast", bench_raycast), ("integrate", bench_integrate), ("astar", bench_astar)):
        n, fast, slow = bench()
        tf = best_of(fast, args.repeat)
        ts = best_of(slow, args.repeat)
        print(f"{name:<12}{n:>8}{tf * 1e3:>12.2f}{ts * 1e3:>12.2f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
