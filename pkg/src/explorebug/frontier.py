"""Frontier extraction, clustering, size filtering/splitting and descriptors."""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import InvalidArgument
from .grid_map import GridMasks

# (dx, dy) in lexicographic order; fixes BFS and descriptor iteration order
NEIGHBORS_8 = tuple((dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0))
_EPS = 1e-9


@dataclass(frozen=True)
class Frontier:
    id: int
    cells: tuple[tuple[int, int], ...]
    centroid: tuple[float, float]
    orientation: float
    area: float
    # set on pieces produced by splitting that fall below the lower threshold
    remainder: bool = False

    @property
    def cell_count(self) -> int:
        return len(self.cells)


def _shift_any(mask: np.ndarray) -> np.ndarray:
    """True where any 8-neighbor of the cell is True (outside the raster counts as False)."""
    h, w = mask.shape
    p = np.zeros((h + 2, w + 2), dtype=bool)
    p[1:-1, 1:-1] = mask
    out = np.zeros((h, w), dtype=bool)
    for dx, dy in NEIGHBORS_8:
        out |= p[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx]
    return out


def frontier_mask(masks: GridMasks) -> np.ndarray:
    return masks.free & _shift_any(masks.unknown)


def extract_frontier_cells(masks: GridMasks) -> set[tuple[int, int]]:
    """Free cells with at least one unknown 8-neighbor, as ``(ix, iy)`` tuples."""
    iy, ix = np.nonzero(frontier_mask(masks))
    return set(zip(ix.tolist(), iy.tolist()))


def cluster(cells) -> list[list[tuple[int, int]]]:
    """Maximal 8-connected components.

    Components are returned ordered by their lexicographically smallest cell;
    each component's cells are in breadth-first order from that cell.
    """
    cells = set(cells)
    if not cells:
        return []
    xs = np.fromiter((c[0] for c in cells), dtype=np.int64, count=len(cells))
    ys = np.fromiter((c[1] for c in cells), dtype=np.int64, count=len(cells))
    x0, y0 = xs.min(), ys.min()
    raster = np.zeros((ys.max() - y0 + 1, xs.max() - x0 + 1), dtype=bool)
    raster[ys - y0, xs - x0] = True
    labels, n = ndimage.label(raster, structure=np.ones((3, 3), dtype=bool))
    seeds: dict[int, tuple[int, int]] = {}
    for x, y in sorted(cells):
        lab = labels[y - y0, x - x0]
        if lab not in seeds:
            seeds[lab] = (x, y)
            if len(seeds) == n:
                break
    return [_bfs_order(seed, cells) for seed in sorted(seeds.values())]


def _bfs_order(seed, cells) -> list[tuple[int, int]]:
    seen = {seed}
    order = [seed]
    q = deque([seed])
    while q:
        x, y = q.popleft()
        for dx, dy in NEIGHBORS_8:
            n = (x + dx, y + dy)
            if n in cells and n not in seen:
                seen.add(n)
                order.append(n)
                q.append(n)
    return order


def _centroid(cells, resolution, origin) -> tuple[float, float]:
    a = np.asarray(cells, dtype=np.float64)
    c = (a + 0.5) * resolution + np.asarray(origin, dtype=np.float64)
    return float(c[:, 0].mean()), float(c[:, 1].mean())


def _orientation(cells, unknown: np.ndarray) -> float:
    """atan2 of the mean unit vector pointing from frontier cells to unknown neighbors."""
    h, w = unknown.shape
    sx = sy = 0.0
    for x, y in cells:
        for dx, dy in NEIGHBORS_8:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and unknown[ny, nx]:
                inv = 1.0 / math.hypot(dx, dy)
                sx += dx * inv
                sy += dy * inv
    if sx == 0.0 and sy == 0.0:
        return 0.0
    return math.atan2(sy, sx)


def describe(component, masks: GridMasks, resolution: float | None = None,
             frontier_id: int = 0, remainder: bool = False) -> Frontier:
    """Build the {centroid, orientation, area} descriptor of one component."""
    cells = tuple(tuple(int(v) for v in c) for c in component)
    if not cells:
        raise InvalidArgument("cannot describe an empty component")
    res = masks.resolution if resolution is None else resolution
    return Frontier(
        id=frontier_id,
        cells=cells,
        centroid=_centroid(cells, res, masks.origin),
        orientation=_orientation(cells, masks.unknown),
        area=len(cells) * res,
        remainder=remainder,
    )


def _split_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + 1 if i < extra else base for i in range(k)]


def filter_split(components, lower: float, upper: float, resolution: float,
                 masks: GridMasks | None = None, first_id: int = 0) -> list[Frontier]:
    """Drop components shorter than ``lower`` metres, split those longer than ``upper``.

    A long component is cut into ``ceil(area / upper)`` consecutive slices of
    its breadth-first ordering, sizes differing by at most one cell.
    """
    if not 0 < lower <= upper:
        raise InvalidArgument(f"need 0 < lower <= upper, got {lower}, {upper}")
    if masks is None:
        empty = np.zeros((0, 0), dtype=bool)
        masks = GridMasks(empty, empty, empty, resolution)
    out: list[Frontier] = []
    fid = first_id
    for comp in components:
        comp = list(comp)
        area = len(comp) * resolution
        if area < lower - _EPS:
            continue
        if area <= upper + _EPS:
            pieces = [comp]
        else:
            k = math.ceil(area / upper - _EPS)
            pieces, start = [], 0
            for size in _split_sizes(len(comp), k):
                pieces.append(comp[start:start + size])
                start += size
        split = len(pieces) > 1
        for piece in pieces:
            small = split and len(piece) * resolution < lower - _EPS
            out.append(describe(piece, masks, resolution, fid, remainder=small))
            fid += 1
    return out


def generate_frontiers(masks: GridMasks, lower: float, upper: float) -> list[Frontier]:
    """Full pass: extract, cluster, filter/split and describe. Ids start at 0."""
    comps = cluster(extract_frontier_cells(masks))
    return filter_split(comps, lower, upper, masks.resolution, masks)


FRONTIER_CSV_COLUMNS = ["pass_id", "frontier_id", "centroid_x", "centroid_y", "psi", "area_m", "cell_count"]


def frontier_rows(pass_id: int, frontiers) -> list[list]:
    return [
        [pass_id, f.id, f.centroid[0], f.centroid[1], f.orientation, f.area, f.cell_count]
        for f in frontiers
    ]


def write_frontier_csv(path, passes) -> Path:
    """``passes`` is an iterable of ``(pass_id, frontiers)``."""
    path = Path(path)
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(FRONTIER_CSV_COLUMNS)
        for pass_id, frontiers in passes:
            wr.writerows(frontier_rows(pass_id, frontiers))
    return path
