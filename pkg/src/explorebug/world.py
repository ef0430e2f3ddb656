"""Ground-truth arena: circular poles inside a walled rectangle, and exact ray casting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import _accel
from .errors import GenerationInfeasible, InvalidArgument, InvalidState
from .seeding import stream


@dataclass(frozen=True)
class World:
    size: float
    # (n, 3) array of x, y, radius
    obstacles: np.ndarray = field(repr=False)
    seed: int = 0
    density: float = 0.0

    def __post_init__(self):
        obs = np.asarray(self.obstacles, dtype=np.float64).reshape(-1, 3)
        obs.setflags(write=False)
        object.__setattr__(self, "obstacles", obs)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (0.0, 0.0, float(self.size), float(self.size))

    def inside_obstacle(self, x: float, y: float) -> bool:
        o = self.obstacles
        if len(o) == 0:
            return False
        return bool(np.any(np.hypot(o[:, 0] - x, o[:, 1] - y) < o[:, 2]))

    def clearance(self, x: float, y: float) -> float:
        """Distance from a point to the nearest obstacle surface or wall."""
        wall = min(x, y, self.size - x, self.size - y)
        o = self.obstacles
        if len(o) == 0:
            return wall
        return min(wall, float(np.min(np.hypot(o[:, 0] - x, o[:, 1] - y) - o[:, 2])))


# -- ray casting -------------------------------------------------------------

@_accel.njit
def _raycast_kernel(obstacles, size, ox, oy, angle, max_range):
    dx = math.cos(angle)
    dy = math.sin(angle)
    best = max_range
    # walls at x = 0, x = size, y = 0, y = size
    if dx > 0.0:
        t = (size - ox) / dx
        if t < best:
            best = t
    elif dx < 0.0:
        t = -ox / dx
        if t < best:
            best = t
    if dy > 0.0:
        t = (size - oy) / dy
        if t < best:
            best = t
    elif dy < 0.0:
        t = -oy / dy
        if t < best:
            best = t
    for k in range(obstacles.shape[0]):
        fx = ox - obstacles[k, 0]
        fy = oy - obstacles[k, 1]
        r = obstacles[k, 2]
        b = fx * dx + fy * dy
        c = fx * fx + fy * fy - r * r
        disc = b * b - c
        if disc < 0.0:
            continue
        t = -b - math.sqrt(disc)
        if t > 0.0 and t < best:
            best = t
    if best < 0.0:
        best = 0.0
    return best


def _raycast_numpy(obstacles, size, ox, oy, angle, max_range):
    d = np.array([math.cos(angle), math.sin(angle)])
    o = np.array([ox, oy])
    with np.errstate(divide="ignore", invalid="ignore"):
        walls = np.concatenate([(size - o) / d, -o / d])
    walls = walls[np.isfinite(walls) & (walls >= 0)]
    best = min(max_range, float(walls.min()) if len(walls) else max_range)
    if len(obstacles):
        f = o[None, :] - obstacles[:, :2]
        b = f @ d
        c = np.einsum("ij,ij->i", f, f) - obstacles[:, 2] ** 2
        disc = b * b - c
        ok = disc >= 0
        t = -b[ok] - np.sqrt(disc[ok])
        t = t[t > 0]
        if len(t):
            best = min(best, float(t.min()))
    return max(best, 0.0)


def raycast(world: World, origin, angle: float, max_range: float) -> float:
    """Distance to the first wall or pole along the ray, capped at ``max_range``."""
    x, y = float(origin[0]), float(origin[1])
    if not (0.0 <= x <= world.size and 0.0 <= y <= world.size):
        raise InvalidArgument(f"ray origin {(x, y)} outside world bounds")
    if world.inside_obstacle(x, y):
        raise InvalidState(f"ray origin {(x, y)} inside an obstacle")
    kernel = _raycast_kernel if _accel.USE_NUMBA else _raycast_numpy
    return float(kernel(world.obstacles, float(world.size), x, y, float(angle), float(max_range)))


def raycast_march(world: World, origin, angle: float, max_range: float, step: float = 1e-3) -> float:
    """Brute-force marching reference for :func:`raycast` (slow; tests only)."""
    t = np.arange(0.0, max_range + step, step)
    xs = origin[0] + t * math.cos(angle)
    ys = origin[1] + t * math.sin(angle)
    blocked = (xs <= 0) | (ys <= 0) | (xs >= world.size) | (ys >= world.size)
    o = world.obstacles
    if len(o):
        d2 = (xs[:, None] - o[None, :, 0]) ** 2 + (ys[:, None] - o[None, :, 1]) ** 2
        blocked |= np.any(d2 <= o[None, :, 2] ** 2, axis=1)
    idx = np.flatnonzero(blocked)
    return float(min(t[idx[0]], max_range)) if len(idx) else float(max_range)


# -- generation ----------------------------------------------------------------

def _reachable_fraction(world: World, starts, resolution: float, inflate: float) -> float:
    n = int(math.ceil(world.size / resolution - 1e-9))
    c = (np.arange(n) + 0.5) * resolution
    gx, gy = np.meshgrid(c, c)
    occ = np.zeros((n, n), dtype=bool)
    for x, y, r in world.obstacles:
        occ |= (gx - x) ** 2 + (gy - y) ** 2 <= (r + inflate) ** 2
    wall = inflate
    occ |= (gx < wall) | (gy < wall) | (gx > world.size - wall) | (gy > world.size - wall)
    free = ~occ
    total = np.count_nonzero(free)
    if total == 0:
        return 0.0
    labels, _ = ndimage.label(free)
    worst = 1.0
    for sx, sy in starts:
        ix = min(int(sx / resolution), n - 1)
        iy = min(int(sy / resolution), n - 1)
        lab = labels[iy, ix]
        frac = np.count_nonzero(labels == lab) / total if lab else 0.0
        worst = min(worst, frac)
    return worst


def generate_world(size: float, density: float, obstacle_radius: float = 0.15,
                   clearance: float = 0.9, seed: int = 0, starts=(),
                   max_attempts_per_obstacle: int = 2000, resolution: float = 0.1,
                   inflate: float = 0.45, min_reachable: float = 0.95,
                   max_regenerations: int = 20) -> World:
    """Seeded rejection sampling of ``round(density * size**2)`` poles.

    Every pole keeps ``clearance`` (edge to edge) from prior poles, from the
    walls and from each start position. Worlds whose inflated free space is
    not at least ``min_reachable`` connected to every start are redrawn from
    a new sub-stream, keeping the obstacle count exact.
    """
    if not size > 0:
        raise InvalidArgument(f"size must be positive, got {size}")
    if density < 0:
        raise InvalidArgument(f"density must be non-negative, got {density}")
    if not obstacle_radius > 0:
        raise InvalidArgument("obstacle_radius must be positive")
    n = int(round(density * size * size))
    starts = [tuple(map(float, s)) for s in starts]
    lo = obstacle_radius + clearance
    hi = size - lo
    if n and hi <= lo:
        raise GenerationInfeasible(f"arena {size} m too small for clearance {clearance} m")
    for attempt in range(max_regenerations):
        rng = stream(seed, "world", attempt)
        placed: list[tuple[float, float]] = []
        budget = max_attempts_per_obstacle * max(n, 1)
        tries = 0
        while len(placed) < n:
            if tries >= budget:
                raise GenerationInfeasible(
                    f"placed {len(placed)}/{n} obstacles after {tries} draws"
                )
            tries += 1
            x, y = rng.uniform(lo, hi, size=2)
            ok = all(
                math.hypot(x - px, y - py) - 2 * obstacle_radius >= clearance
                for px, py in placed
            ) and all(
                math.hypot(x - sx, y - sy) - obstacle_radius >= clearance for sx, sy in starts
            )
            if ok:
                placed.append((float(x), float(y)))
        obs = np.array([(x, y, obstacle_radius) for x, y in placed], dtype=np.float64).reshape(-1, 3)
        world = World(float(size), obs, seed=int(seed), density=float(density))
        if not starts or _reachable_fraction(world, starts, resolution, inflate) >= min_reachable:
            return world
    raise GenerationInfeasible(f"no connected world after {max_regenerations} redraws")


# -- world file ------------------------------------------------------------------

def save_world(world: World, path) -> Path:
    """Header ``size seed density`` then one ``x y r`` line per pole, exact reprs."""
    path = Path(path)
    lines = [f"{float(world.size)!r} {int(world.seed)} {float(world.density)!r}"]
    lines += [f"{float(x)!r} {float(y)!r} {float(r)!r}" for x, y, r in world.obstacles]
    path.write_text("\n".join(lines) + "\n")
    return path


def load_world(path) -> World:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 3:
        raise InvalidArgument(f"{path}: bad world header")
    size, seed, density = float(rows[0][0]), int(rows[0][1]), float(rows[0][2])
    obs = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64).reshape(-1, 3)
    return World(size, obs, seed=seed, density=density)
