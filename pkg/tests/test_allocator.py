import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from explorebug import allocator as al
from explorebug.errors import InvalidArgument, NoFrontier
from explorebug.frontier import Frontier


def F(i, x, y):
    return Frontier(i, ((0, 0),), (float(x), float(y)), 0.0, 1.0)


def exhaustive(ctx):
    """Score everything, keep the maxima, then the nearest, then the smallest id."""
    def d(a, b):
        return math.hypot(a[0] - b[0], a[1] - b[1])
    scores = []
    for f in ctx.candidates:
        if ctx.peer_goals:
            disp = sum(d(f.centroid, g) for _, g in ctx.peer_goals) / len(ctx.peer_goals)
        else:
            disp = 0.0
        scores.append(disp - ctx.distance_weight * d(f.centroid, ctx.requester_position))
    best = max(scores)
    tied = [f for f, s in zip(ctx.candidates, scores) if s == best]
    near = min(d(f.centroid, ctx.requester_position) for f in tied)
    tied = [f for f in tied if d(f.centroid, ctx.requester_position) == near]
    return min(tied, key=lambda f: f.id)


def random_context(rng, lattice=6):
    n = int(rng.integers(1, 21))
    m = int(rng.integers(0, 8))
    cands = [F(i, *rng.integers(0, lattice, 2)) for i in rng.permutation(n)]
    peers = [(j + 1, tuple(float(v) for v in rng.integers(0, lattice, 2))) for j in range(m)]
    return al.AllocationContext(tuple(float(v) for v in rng.integers(0, lattice, 2)), 0, cands, peers)


def test_matches_exhaustive_scoring(rng):
    for _ in range(300):
        ctx = random_context(rng)
        assert al.allocate(ctx).id == exhaustive(ctx).id


def test_hand_computed_example():
    # peer at (10, 0); A scores 10 - 2*1 = 8, B scores 6 - 2*4 = -2
    ctx = al.AllocationContext((0.0, 0.0), 0, [F(0, 4, 0), F(1, 0, 1)], [(1, (10.0, 0.0))])
    assert al.score(ctx.candidates[1], ctx) == pytest.approx(math.hypot(10, 1) - 2.0)
    assert al.allocate(ctx).id == 1
    assert al.allocate_nearest(ctx).id == 1
    assert al.allocate_max_dist(ctx).id == 1


def test_tie_breaks_by_distance_then_id():
    ctx = al.AllocationContext((0.0, 0.0), 0, [F(3, 1, 0), F(2, 0, 1), F(5, -1, 0)])
    assert al.allocate(ctx).id == 2
    assert [f.id for f in al.rank(ctx)] == [2, 3, 5]


def test_no_peers_reduces_to_nearest(rng):
    for _ in range(100):
        ctx = random_context(rng, lattice=50)
        ctx.peer_goals = []
        assert al.allocate(ctx).id == al.allocate_nearest(ctx).id == al.allocate_max_dist(ctx).id


def test_maxdist_prefers_far_from_peers():
    ctx = al.AllocationContext((0.0, 0.0), 0, [F(0, 1, 0), F(1, 9, 0)], [(1, (0.0, 1.0))])
    assert al.allocate_max_dist(ctx).id == 1
    assert al.allocate(ctx).id == 0


def test_rank_first_equals_allocate(rng):
    for _ in range(100):
        ctx = random_context(rng)
        assert al.rank(ctx, "explorebug")[0].id == al.allocate(ctx).id
        assert al.rank(ctx, "nearest")[0].id == al.allocate_nearest(ctx).id
        assert al.rank(ctx, "maxdist")[0].id == al.allocate_max_dist(ctx).id
        assert sorted(f.id for f in al.rank(ctx)) == sorted(f.id for f in ctx.candidates)


def test_errors():
    with pytest.raises(NoFrontier):
        al.allocate(al.AllocationContext((0.0, 0.0), 0, []))
    with pytest.raises(InvalidArgument):
        al.AllocationContext((0.0, 0.0), 0, [F(0, 1, 1)], [(0, (1.0, 1.0))])
    with pytest.raises(InvalidArgument):
        al.rank(al.AllocationContext((0.0, 0.0), 0, [F(0, 1, 1)]), "random")


points = st.tuples(st.integers(-50, 50), st.integers(-50, 50))


@settings(max_examples=200, deadline=None)
@given(st.lists(points, min_size=1, max_size=12), st.lists(points, max_size=5), points, points)
def test_translation_invariance(cands, peers, me, shift):
    # integer coordinates keep every distance bit-identical under integer shifts
    def build(dx, dy):
        return al.AllocationContext(
            (me[0] + dx, me[1] + dy), 0,
            [F(i, x + dx, y + dy) for i, (x, y) in enumerate(cands)],
            [(j + 1, (x + dx, y + dy)) for j, (x, y) in enumerate(peers)],
        )
    for h in al.HEURISTICS:
        assert al.rank(build(0, 0), h)[0].id == al.rank(build(*shift), h)[0].id


@settings(max_examples=200, deadline=None)
@given(st.lists(points, min_size=1, max_size=12), st.lists(points, max_size=5), points)
def test_candidate_order_invariance(cands, peers, me):
    fs = [F(i, x, y) for i, (x, y) in enumerate(cands)]
    pg = [(j + 1, tuple(map(float, p))) for j, p in enumerate(peers)]
    a = al.allocate(al.AllocationContext(tuple(map(float, me)), 0, fs, pg))
    b = al.allocate(al.AllocationContext(tuple(map(float, me)), 0, fs[::-1], pg))
    assert a.id == b.id
