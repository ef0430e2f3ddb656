"""Grid path planning over inflated known-free space (8-connected A*)."""
from __future__ import annotations

import heapq
import math

import numpy as np
from scipy import ndimage

from . import _accel
from .errors import PathNotFound
from .grid_map import GridMasks

SQRT2 = math.sqrt(2.0)


def traversable_mask(masks: GridMasks, safety: float) -> np.ndarray:
    """Free cells whose center is at least ``safety`` metres from any non-free cell.

    Cells outside the raster count as blocked.
    """
    h, w = masks.shape
    open_ = np.zeros((h + 2, w + 2), dtype=bool)
    open_[1:-1, 1:-1] = masks.free
    dist = ndimage.distance_transform_edt(open_)[1:-1, 1:-1]
    return masks.free & (dist * masks.resolution >= safety - 1e-9)


@_accel.njit
def _astar_kernel(trav, sx, sy, gx, gy):
    h, w = trav.shape
    n = h * w
    g = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=np.bool_)
    start = sy * w + sx
    goal = gy * w + gx
    g[start] = 0.0
    heap = [(0.0, 0, start)]
    counter = 1
    found = False
    while len(heap) > 0:
        _, _, cur = heapq.heappop(heap)
        if closed[cur]:
            continue
        closed[cur] = True
        if cur == goal:
            found = True
            break
        cy = cur // w
        cx = cur - cy * w
        for dx in range(-1, 2):
            for dy in range(-1, 2):
                if dx == 0 and dy == 0:
                    continue
                nx = cx + dx
                ny = cy + dy
                if nx < 0 or ny < 0 or nx >= w or ny >= h or not trav[ny, nx]:
                    continue
                if dx != 0 and dy != 0:
                    # no corner cutting
                    if not trav[cy, nx] or not trav[ny, cx]:
                        continue
                    step = 1.4142135623730951
                else:
                    step = 1.0
                nb = ny * w + nx
                if closed[nb]:
                    continue
                ng = g[cur] + step
                if ng < g[nb]:
                    g[nb] = ng
                    parent[nb] = cur
                    ax = abs(gx - nx)
                    ay = abs(gy - ny)
                    hh = (ax + ay) + (1.4142135623730951 - 2.0) * min(ax, ay)
                    heapq.heappush(heap, (ng + hh, counter, nb))
                    counter += 1
    if not found:
        return np.zeros(0, dtype=np.int64)
    m = 0
    k = goal
    while k != -1:
        m += 1
        k = parent[k]
    out = np.empty(m, dtype=np.int64)
    k = goal
    for i in range(m - 1, -1, -1):
        out[i] = k
        k = parent[k]
    return out


_astar_python = _astar_kernel.py_func if hasattr(_astar_kernel, "py_func") else _astar_kernel


def astar(trav: np.ndarray, start: tuple[int, int], goal: tuple[int, int]) -> list[tuple[int, int]]:
    """Shortest 8-connected cell path (unit / sqrt2 costs) or ``[]`` if unreachable."""
    kernel = _astar_kernel if _accel.USE_NUMBA else _astar_python
    flat = kernel(trav, int(start[0]), int(start[1]), int(goal[0]), int(goal[1]))
    w = trav.shape[1]
    return [(int(i % w), int(i // w)) for i in flat]


def path_cost(cells) -> float:
    """Length of a cell path in cell units."""
    total = 0.0
    for (x0, y0), (x1, y1) in zip(cells, cells[1:]):
        total += SQRT2 if (x0 != x1 and y0 != y1) else 1.0
    return total


def simplify(cells) -> list[tuple[int, int]]:
    """Drop interior cells of straight runs."""
    if len(cells) <= 2:
        return list(cells)
    out = [cells[0]]
    for prev, cur, nxt in zip(cells, cells[1:], cells[2:]):
        if (cur[0] - prev[0], cur[1] - prev[1]) != (nxt[0] - cur[0], nxt[1] - cur[1]):
            out.append(cur)
    out.append(cells[-1])
    return out


class PlanningSnapshot:
    """Traversability and reachability precomputed once per map snapshot."""

    def __init__(self, masks: GridMasks, safety: float):
        self.masks = masks
        self.safety = safety
        self.traversable = traversable_mask(masks, safety)
        # with corner cutting forbidden, 8-move reachability equals 4-connectivity
        self.labels, _ = ndimage.label(self.traversable)

    def cell_of(self, point) -> tuple[int, int]:
        return self.masks.world_to_cell(point[0], point[1])

    def in_bounds(self, cell) -> bool:
        h, w = self.masks.shape
        return 0 <= cell[0] < w and 0 <= cell[1] < h

    def component(self, cell) -> int:
        return int(self.labels[cell[1], cell[0]]) if self.in_bounds(cell) else 0

    def resolve_goal(self, point, radius: float, label: int) -> tuple[int, int] | None:
        """Nearest cell of component ``label`` to ``point`` within ``radius`` metres."""
        if label == 0:
            return None
        res = self.masks.resolution
        cx, cy = self.cell_of(point)
        if self.in_bounds((cx, cy)) and self.labels[cy, cx] == label:
            return (cx, cy)
        r = int(math.ceil(radius / res)) + 1
        h, w = self.masks.shape
        x0, x1 = max(cx - r, 0), min(cx + r + 1, w)
        y0, y1 = max(cy - r, 0), min(cy + r + 1, h)
        if x0 >= x1 or y0 >= y1:
            return None
        win = self.labels[y0:y1, x0:x1] == label
        if not win.any():
            return None
        iy, ix = np.nonzero(win)
        ix = ix + x0
        iy = iy + y0
        px = self.masks.origin[0] + (ix + 0.5) * res
        py = self.masks.origin[1] + (iy + 0.5) * res
        d = np.hypot(px - point[0], py - point[1])
        ok = d <= radius + 1e-9
        if not ok.any():
            return None
        order = np.lexsort((ix[ok], iy[ok], d[ok]))
        k = order[0]
        return (int(ix[ok][k]), int(iy[ok][k]))

    def plan(self, start, goal, goal_radius: float) -> list[tuple[float, float]]:
        start_cell = self.cell_of(start)
        label = self.component(start_cell)
        if label == 0:
            raise PathNotFound(f"start {tuple(start)} is not in inflated free space")
        goal_cell = self.resolve_goal(goal, goal_radius, label)
        if goal_cell is None:
            raise PathNotFound(f"no reachable cell within {goal_radius} m of {tuple(goal)}")
        cells = astar(self.traversable, start_cell, goal_cell)
        if not cells:  # pragma: no cover - same component implies a path exists
            raise PathNotFound(f"A* found no path to {goal_cell}")
        return [self.masks.cell_center(x, y) for x, y in simplify(cells)]


def plan_path(masks: GridMasks, start, goal, safety: float, goal_radius: float = 0.2):
    """Waypoints from ``start`` to ``goal`` through inflated known-free cells.

    When the goal cell itself is not reachable, the nearest reachable cell
    within ``goal_radius`` metres stands in for it. Raises
    :class:`PathNotFound` otherwise.
    """
    return PlanningSnapshot(masks, safety).plan(start, goal, goal_radius)


def polyline_length(points) -> float:
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(points, points[1:]))
