import math

import numpy as np
import pytest

from explorebug import world as wd
from explorebug.errors import GenerationInfeasible, InvalidArgument, InvalidState
from explorebug.seeding import stream


def test_raycast_walls_exact():
    w = wd.World(10.0, np.zeros((0, 3)))
    assert wd.raycast(w, (2.0, 3.0), 0.0, 20.0) == pytest.approx(8.0)
    assert wd.raycast(w, (2.0, 3.0), math.pi, 20.0) == pytest.approx(2.0)
    assert wd.raycast(w, (2.0, 3.0), -math.pi / 2, 20.0) == pytest.approx(3.0)
    assert wd.raycast(w, (2.0, 3.0), 0.0, 4.0) == 4.0


def test_raycast_circle_exact():
    w = wd.World(10.0, np.array([[5.0, 5.0, 1.0]]))
    assert wd.raycast(w, (1.0, 5.0), 0.0, 8.0) == pytest.approx(3.0)
    # grazing offset 0.6 -> chord entry at 4 - 0.8
    assert wd.raycast(w, (1.0, 5.6), 0.0, 8.0) == pytest.approx(3.2)
    assert wd.raycast(w, (1.0, 6.5), 0.0, 8.0) == pytest.approx(8.0)


def test_raycast_matches_march_within_2mm():
    w = wd.generate_world(10.0, 0.2, seed=4)
    rng = stream(9, "test-rays")
    checked = 0
    while checked < 1000:
        x, y = rng.uniform(0.05, 9.95, 2)
        if w.inside_obstacle(x, y):
            continue
        a = rng.uniform(-math.pi, math.pi)
        assert abs(wd.raycast(w, (x, y), a, 4.0) - wd.raycast_march(w, (x, y), a, 4.0)) <= 2e-3
        checked += 1


def test_raycast_errors():
    w = wd.World(10.0, np.array([[5.0, 5.0, 1.0]]))
    with pytest.raises(InvalidArgument):
        wd.raycast(w, (11.0, 5.0), 0.0, 4.0)
    with pytest.raises(InvalidState):
        wd.raycast(w, (5.0, 5.0), 0.0, 4.0)


@pytest.mark.parametrize("density", [0.0, 0.05, 0.1, 0.2])
def test_generation_count_and_clearance(density):
    starts = [(10.0, 1.0), (12.2, 1.0)]
    w = wd.generate_world(20.0, density, 0.15, 0.9, seed=2, starts=starts)
    n = round(density * 400)
    assert len(w.obstacles) == n
    o = w.obstacles
    for i in range(n):
        x, y, r = o[i]
        assert r == 0.15
        assert min(x, y, 20 - x, 20 - y) - r >= 0.9 - 1e-12
        for sx, sy in starts:
            assert math.hypot(x - sx, y - sy) - r >= 0.9 - 1e-12
        for j in range(i):
            assert math.hypot(x - o[j, 0], y - o[j, 1]) - 2 * r >= 0.9 - 1e-12


def test_generation_is_deterministic_and_seed_sensitive():
    a = wd.generate_world(20.0, 0.1, seed=11)
    b = wd.generate_world(20.0, 0.1, seed=11)
    c = wd.generate_world(20.0, 0.1, seed=12)
    assert np.array_equal(a.obstacles, b.obstacles)
    assert not np.array_equal(a.obstacles, c.obstacles)


def test_generation_infeasible():
    with pytest.raises(GenerationInfeasible):
        wd.generate_world(2.0, 10.0, seed=0, max_attempts_per_obstacle=50)
    with pytest.raises(InvalidArgument):
        wd.generate_world(10.0, -0.1)


def test_start_reachability():
    starts = [(10.0, 1.05)]
    w = wd.generate_world(20.0, 0.2, seed=5, starts=starts)
    assert wd._reachable_fraction(w, starts, 0.1, 0.45) >= 0.95


def test_clearance():
    w = wd.World(10.0, np.array([[5.0, 5.0, 1.0]]))
    assert w.clearance(2.0, 5.0) == pytest.approx(2.0)
    assert w.clearance(3.5, 5.0) == pytest.approx(0.5)
    assert w.inside_obstacle(5.5, 5.0) and not w.inside_obstacle(6.5, 5.0)


def test_world_file_roundtrip(tmp_path):
    w = wd.generate_world(20.0, 0.05, seed=3)
    back = wd.load_world(wd.save_world(w, tmp_path / "w.txt"))
    assert np.array_equal(back.obstacles, w.obstacles)
    assert (back.size, back.seed, back.density) == (w.size, w.seed, w.density)
    (tmp_path / "bad.txt").write_text("1 2\n")
    with pytest.raises(InvalidArgument):
        wd.load_world(tmp_path / "bad.txt")


def test_named_streams_are_independent():
    a = stream(1, "world").random(4)
    assert np.array_equal(a, stream(1, "world").random(4))
    assert not np.array_equal(a, stream(1, "sensor").random(4))
    assert not np.array_equal(a, stream(1, "world", 1).random(4))
