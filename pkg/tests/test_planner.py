import math

import numpy as np
import pytest
from scipy.sparse import lil_matrix
from scipy.sparse.csgraph import dijkstra

from explorebug import planner as pl
from explorebug.errors import PathNotFound
from explorebug.grid_map import FREE, OBSTACLE, UNKNOWN

from conftest import masks_of


def dijkstra_cost(trav, start, goal):
    """Shortest 8-connected cost without corner cutting, via a sparse graph."""
    h, w = trav.shape
    g = lil_matrix((h * w, h * w))
    for y in range(h):
        for x in range(w):
            if not trav[y, x]:
                continue
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nx, ny = x + dx, y + dy
                    if (dx or dy) and 0 <= nx < w and 0 <= ny < h and trav[ny, nx]:
                        if dx and dy and not (trav[y, nx] and trav[ny, x]):
                            continue
                        g[y * w + x, ny * w + nx] = math.sqrt(2) if dx and dy else 1.0
    d = dijkstra(g.tocsr(), indices=start[1] * w + start[0])
    return d[goal[1] * w + goal[0]]


def test_astar_cost_matches_dijkstra(rng):
    for _ in range(25):
        trav = rng.random((18, 22)) > 0.3
        free = np.argwhere(trav)
        (sy, sx), (gy, gx) = free[rng.integers(0, len(free), 2)]
        path = pl.astar(trav, (sx, sy), (gx, gy))
        want = dijkstra_cost(trav, (sx, sy), (gx, gy))
        if math.isinf(want):
            assert path == []
            continue
        assert path[0] == (sx, sy) and path[-1] == (gx, gy)
        assert pl.path_cost(path) == pytest.approx(want)
        for (x0, y0), (x1, y1) in zip(path, path[1:]):
            assert trav[y1, x1]
            if x0 != x1 and y0 != y1:
                assert trav[y0, x1] and trav[y1, x0]


def test_reachability_equals_label(rng):
    for _ in range(10):
        state = np.where(rng.random((20, 20)) < 0.25, OBSTACLE, FREE)
        snap = pl.PlanningSnapshot(masks_of(state), 0.0)
        free = np.argwhere(snap.traversable)
        for _ in range(10):
            (sy, sx), (gy, gx) = free[rng.integers(0, len(free), 2)]
            same = snap.labels[sy, sx] == snap.labels[gy, gx]
            assert bool(pl.astar(snap.traversable, (sx, sy), (gx, gy))) == same


def test_traversable_mask_brute_force(rng):
    state = np.where(rng.random((15, 15)) < 0.1, OBSTACLE, FREE)
    state[rng.random((15, 15)) < 0.1] = UNKNOWN
    masks = masks_of(state, resolution=0.1)
    trav = pl.traversable_mask(masks, 0.25)
    blocked = [(x, y) for y in range(-1, 16) for x in range(-1, 16)
               if not (0 <= x < 15 and 0 <= y < 15) or state[y, x] != FREE]
    for y in range(15):
        for x in range(15):
            d = min(math.hypot(x - bx, y - by) for bx, by in blocked) * 0.1
            assert trav[y, x] == (state[y, x] == FREE and d >= 0.25 - 1e-9)


def test_plan_path_and_goal_resolution():
    state = np.full((30, 30), FREE, dtype=np.int8)
    state[:, 15] = OBSTACLE
    state[25:, 15] = FREE
    masks = masks_of(state, resolution=0.1)
    path = pl.plan_path(masks, (0.55, 0.55), (2.55, 0.55), safety=0.15, goal_radius=0.0)
    assert path[0] == pytest.approx((0.55, 0.55))
    assert path[-1] == pytest.approx((2.55, 0.55))
    assert pl.polyline_length(path) > 4.0  # detour over the wall gap
    # goal on the wall resolves to the nearest reachable cell
    end = pl.plan_path(masks, (0.55, 0.55), (1.55, 0.55), safety=0.15, goal_radius=0.5)[-1]
    assert end == pytest.approx((1.35, 0.55))  # two cells off the wall
    with pytest.raises(PathNotFound):
        pl.plan_path(masks, (0.55, 0.55), (1.55, 0.55), safety=0.15, goal_radius=0.1)


def test_unknown_is_not_traversable():
    state = np.full((10, 10), FREE, dtype=np.int8)
    state[:, 5] = UNKNOWN
    with pytest.raises(PathNotFound):
        pl.plan_path(masks_of(state), (1.5, 1.5), (8.5, 1.5), safety=0.0)


def test_simplify_keeps_corners():
    cells = [(0, 0), (1, 0), (2, 0), (3, 1), (4, 2), (4, 3)]
    assert pl.simplify(cells) == [(0, 0), (2, 0), (4, 2), (4, 3)]
