"""On-demand frontier allocation: the cooperative score and two ablation heuristics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidArgument, NoFrontier
from .frontier import Frontier

HEURISTICS = ("explorebug", "nearest", "maxdist")


@dataclass
class AllocationContext:
    requester_position: tuple[float, float]
    requester_id: int
    candidates: list[Frontier]
    # (agent_id, point) for every other active agent
    peer_goals: list[tuple[int, tuple[float, float]]] = field(default_factory=list)
    distance_weight: float = 2.0

    def __post_init__(self):
        if any(aid == self.requester_id for aid, _ in self.peer_goals):
            raise InvalidArgument("requester listed among its own peers")


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def dispersion(candidate: Frontier, ctx: AllocationContext) -> float:
    """Mean distance from the candidate to the peers' goals (0 with no peers)."""
    if not ctx.peer_goals:
        return 0.0
    return sum(_dist(candidate.centroid, g) for _, g in ctx.peer_goals) / len(ctx.peer_goals)


def score(candidate: Frontier, ctx: AllocationContext) -> float:
    return dispersion(candidate, ctx) - ctx.distance_weight * _dist(candidate.centroid, ctx.requester_position)


def _argbest(ctx: AllocationContext, key) -> Frontier:
    """Maximize ``key``; ties go to the nearer candidate, then the smaller id."""
    if not ctx.candidates:
        raise NoFrontier("no frontier candidates")
    best = None
    best_key = None
    for f in ctx.candidates:
        k = (key(f), -_dist(f.centroid, ctx.requester_position), -f.id)
        if best is None or k > best_key:
            best, best_key = f, k
    return best


def allocate(ctx: AllocationContext) -> Frontier:
    return _argbest(ctx, lambda f: score(f, ctx))


def allocate_nearest(ctx: AllocationContext) -> Frontier:
    return _argbest(ctx, lambda f: -_dist(f.centroid, ctx.requester_position))


def allocate_max_dist(ctx: AllocationContext) -> Frontier:
    if not ctx.peer_goals:
        return allocate_nearest(ctx)
    return _argbest(ctx, lambda f: dispersion(f, ctx))


def rank(ctx: AllocationContext, heuristic: str = "explorebug") -> list[Frontier]:
    """All candidates in preference order for ``heuristic`` (first = allocated)."""
    if heuristic not in HEURISTICS:
        raise InvalidArgument(f"unknown heuristic {heuristic!r}; expected one of {HEURISTICS}")
    if not ctx.candidates:
        raise NoFrontier("no frontier candidates")
    if heuristic == "explorebug":
        value = lambda f: score(f, ctx)
    elif heuristic == "maxdist" and ctx.peer_goals:
        value = lambda f: dispersion(f, ctx)
    else:
        value = lambda f: -_dist(f.centroid, ctx.requester_position)
    return sorted(
        ctx.candidates,
        key=lambda f: (-value(f), _dist(f.centroid, ctx.requester_position), f.id),
    )
