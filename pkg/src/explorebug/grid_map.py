"""Shared occupancy grid: log-odds storage, beam integration and classification.

Cells are addressed as ``(ix, iy)`` with ``ix`` along +x. Arrays are stored
row-major as ``[iy, ix]``. Cell ``(0, 0)`` has its lower-left corner at
``origin``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _accel
from .errors import InvalidArgument

UNKNOWN, FREE, OBSTACLE = 0, 1, 2


@dataclass(frozen=True)
class MapParams:
    l_hit: float = 0.85
    l_miss: float = -0.4
    l_min: float = -2.0
    l_max: float = 3.5
    p_occ: float = 0.65
    p_free: float = 0.35

    def __post_init__(self):
        if not (self.l_hit > 0 and self.l_miss < 0):
            raise InvalidArgument("need l_hit > 0 and l_miss < 0")
        if not self.l_min < 0 < self.l_max:
            raise InvalidArgument("clamp bounds must straddle 0")
        if not 0 < self.p_free < self.p_occ < 1:
            raise InvalidArgument("need 0 < p_free < p_occ < 1")

    @property
    def logit_occ(self) -> float:
        return math.log(self.p_occ / (1 - self.p_occ))

    @property
    def logit_free(self) -> float:
        return math.log(self.p_free / (1 - self.p_free))


@dataclass
class OccupancyGrid:
    resolution: float
    origin: tuple[float, float]
    width: int
    height: int
    params: MapParams = field(default_factory=MapParams)
    log_odds: np.ndarray = field(default=None, repr=False)
    # latched ternary class; a known cell never returns to UNKNOWN
    state: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.log_odds is None:
            self.log_odds = np.zeros((self.height, self.width), dtype=np.float64)
        if self.state is None:
            self.state = np.zeros((self.height, self.width), dtype=np.int8)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) / self.resolution)),
            int(math.floor((y - self.origin[1]) / self.resolution)),
        )

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def contains(self, x: float, y: float) -> bool:
        ix, iy = self.world_to_cell(x, y)
        return 0 <= ix < self.width and 0 <= iy < self.height

    def known_count(self) -> int:
        return int(np.count_nonzero(self.state))

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(
            self.resolution, self.origin, self.width, self.height, self.params,
            self.log_odds.copy(), self.state.copy(),
        )


@dataclass(frozen=True)
class GridMasks:
    free: np.ndarray
    obstacle: np.ndarray
    unknown: np.ndarray
    resolution: float = 1.0
    origin: tuple[float, float] = (0.0, 0.0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.free.shape

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) / self.resolution)),
            int(math.floor((y - self.origin[1]) / self.resolution)),
        )

    @classmethod
    def from_state(cls, state: np.ndarray, resolution: float = 1.0,
                   origin: tuple[float, float] = (0.0, 0.0)) -> "GridMasks":
        return cls(state == FREE, state == OBSTACLE, state == UNKNOWN, resolution, origin)


def _cells_for_extent(extent: float, resolution: float) -> int:
    # guard against 50 / 0.1 landing a hair above an integer
    return max(1, int(math.ceil(extent / resolution - 1e-9)))


def new_grid(bounds, resolution: float, params: MapParams | None = None) -> OccupancyGrid:
    """Create an all-unknown grid covering ``bounds = (xmin, ymin, xmax, ymax)``."""
    if not resolution > 0:
        raise InvalidArgument(f"resolution must be positive, got {resolution}")
    xmin, ymin, xmax, ymax = (float(b) for b in bounds)
    if not (xmax > xmin and ymax > ymin):
        raise InvalidArgument(f"degenerate bounds {bounds}")
    return OccupancyGrid(
        resolution=float(resolution),
        origin=(xmin, ymin),
        width=_cells_for_extent(xmax - xmin, resolution),
        height=_cells_for_extent(ymax - ymin, resolution),
        params=params or MapParams(),
    )


# -- ray traversal kernels -------------------------------------------------

@_accel.njit
def _integrate_kernel(log_odds, state, touched, x0, y0, x1, y1, hit,
                      l_hit, l_miss, l_min, l_max, t_occ, t_free):
    """Bresenham walk from (x0, y0) to (x1, y1); miss before the end cell, hit on it."""
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x1 > x0 else -1
    sy = 1 if y1 > y0 else -1
    mark = touched.shape[0] > 0
    x = x0
    y = y0
    if dx >= dy:
        err = 2 * dy - dx
        n = dx
    else:
        err = 2 * dx - dy
        n = dy
    for i in range(n + 1):
        if i < n:
            v = log_odds[y, x] + l_miss
        elif hit:
            v = log_odds[y, x] + l_hit
        else:
            break
        if v < l_min:
            v = l_min
        elif v > l_max:
            v = l_max
        log_odds[y, x] = v
        if v >= t_occ:
            state[y, x] = 2
        elif v <= t_free:
            state[y, x] = 1
        if mark:
            touched[y, x] = True
        if dx >= dy:
            if err >= 0:
                y += sy
                err -= 2 * dx
            x += sx
            err += 2 * dy
        else:
            if err >= 0:
                x += sx
                err -= 2 * dy
            y += sy
            err += 2 * dx


def line_cells_numpy(x0: int, y0: int, x1: int, y1: int) -> np.ndarray:
    """Closed-form Bresenham line, endpoints included, as an ``(n, 2)`` array of (ix, iy)."""
    dx, dy = abs(x1 - x0), abs(y1 - y0)
    sx = 1 if x1 > x0 else -1
    sy = 1 if y1 > y0 else -1
    if dx >= dy:
        i = np.arange(dx + 1)
        off = (2 * i * dy + dx) // (2 * dx) if dx else np.zeros_like(i)
        return np.stack([x0 + sx * i, y0 + sy * off], axis=1)
    i = np.arange(dy + 1)
    off = (2 * i * dx + dy) // (2 * dy)
    return np.stack([x0 + sx * off, y0 + sy * i], axis=1)


def _integrate_numpy(log_odds, state, touched, x0, y0, x1, y1, hit,
                     l_hit, l_miss, l_min, l_max, t_occ, t_free):
    cells = line_cells_numpy(x0, y0, x1, y1)
    if not hit:
        cells = cells[:-1]
    if len(cells) == 0:
        return
    ix, iy = cells[:, 0], cells[:, 1]
    inc = np.full(len(cells), l_miss)
    if hit:
        inc[-1] = l_hit
    # a Bresenham line never revisits a cell, so fancy-index updates are safe
    v = np.clip(log_odds[iy, ix] + inc, l_min, l_max)
    log_odds[iy, ix] = v
    s = state[iy, ix]
    s = np.where(v >= t_occ, 2, np.where(v <= t_free, 1, s))
    state[iy, ix] = s
    if touched.shape[0] > 0:
        touched[iy, ix] = True


_NO_MARK = np.zeros((0, 0), dtype=np.bool_)


def beam_endpoint_cells(grid: OccupancyGrid, origin, angle: float, measured: float):
    x, y = float(origin[0]), float(origin[1])
    c0 = grid.world_to_cell(x, y)
    ex = x + measured * math.cos(angle)
    ey = y + measured * math.sin(angle)
    c1 = grid.world_to_cell(ex, ey)
    # wall hits land exactly on the outer edge; keep them on the border cells
    c1 = (min(max(c1[0], 0), grid.width - 1), min(max(c1[1], 0), grid.height - 1))
    return c0, c1


def integrate_beam(grid: OccupancyGrid, origin, angle: float, measured: float,
                   max_range: float, touched: np.ndarray | None = None) -> OccupancyGrid:
    """Apply one range reading to ``grid`` in place and return it.

    Cells strictly before the endpoint cell get a miss update. The endpoint
    cell gets a hit unless ``measured == max_range``. ``touched``, if given,
    is a boolean raster that records every updated cell.
    """
    if not grid.contains(origin[0], origin[1]):
        raise InvalidArgument(f"beam origin {tuple(origin)} outside grid")
    if measured < 0 or measured > max_range:
        raise InvalidArgument(f"measured range {measured} not in [0, {max_range}]")
    (x0, y0), (x1, y1) = beam_endpoint_cells(grid, origin, angle, measured)
    p = grid.params
    kernel = _integrate_kernel if _accel.USE_NUMBA else _integrate_numpy
    kernel(grid.log_odds, grid.state, _NO_MARK if touched is None else touched,
           x0, y0, x1, y1, measured < max_range,
           p.l_hit, p.l_miss, p.l_min, p.l_max, p.logit_occ, p.logit_free)
    return grid


def traversed_cells(grid: OccupancyGrid, origin, angle: float, measured: float,
                    max_range: float) -> list[tuple[int, int]]:
    """Ordered cells an ``integrate_beam`` call would update (hit cell last if any)."""
    (x0, y0), (x1, y1) = beam_endpoint_cells(grid, origin, angle, measured)
    cells = [tuple(int(v) for v in c) for c in line_cells_numpy(x0, y0, x1, y1)]
    return cells if measured < max_range else cells[:-1]


def classify(grid: OccupancyGrid) -> GridMasks:
    """Free / obstacle / unknown masks from log-odds, honoring the no-reversion latch."""
    p = grid.params
    lo = grid.log_odds
    cls = np.where(lo >= p.logit_occ, OBSTACLE, np.where(lo <= p.logit_free, FREE, grid.state))
    return GridMasks.from_state(cls, grid.resolution, grid.origin)


def known_ratio(masks: GridMasks, world) -> float:
    """Fraction of in-bounds cells that are free or obstacle."""
    xmin, ymin, xmax, ymax = world.bounds
    res = masks.resolution
    expected = (_cells_for_extent(ymax - ymin, res), _cells_for_extent(xmax - xmin, res))
    if masks.shape != expected or tuple(masks.origin) != (xmin, ymin):
        raise InvalidArgument(f"mask shape {masks.shape} does not match world grid {expected}")
    h, w = masks.shape
    cx = masks.origin[0] + (np.arange(w) + 0.5) * res
    cy = masks.origin[1] + (np.arange(h) + 0.5) * res
    inside = ((cy >= ymin) & (cy <= ymax))[:, None] & ((cx >= xmin) & (cx <= xmax))[None, :]
    known = (masks.free | masks.obstacle) & inside
    return float(np.count_nonzero(known)) / float(np.count_nonzero(inside))


# -- snapshot export ---------------------------------------------------------

def write_pgm(masks: GridMasks, path) -> Path:
    """Binary PGM (P5): 255 free, 0 obstacle, 128 unknown; first row is max-y.

    A sidecar ``<stem>.yaml`` carries origin and resolution.
    """
    path = Path(path)
    img = np.full(masks.shape, 128, dtype=np.uint8)
    img[masks.free] = 255
    img[masks.obstacle] = 0
    img = img[::-1]
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(img.tobytes())
    side = path.with_suffix(".yaml")
    side.write_text(
        f"image: {path.name}\nresolution: {masks.resolution!r}\n"
        f"origin: [{masks.origin[0]!r}, {masks.origin[1]!r}]\n"
        f"width: {w}\nheight: {h}\n"
        "free_value: 255\noccupied_value: 0\nunknown_value: 128\n"
    )
    return path


def read_pgm(path) -> np.ndarray:
    """Read a P5 file written by :func:`write_pgm`; rows come back in image order."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise InvalidArgument(f"{path}: not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8, count=w * h).reshape(h, w)
