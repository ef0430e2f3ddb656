import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from explorebug import frontier as fr
from explorebug.errors import InvalidArgument
from explorebug.grid_map import FREE, OBSTACLE, UNKNOWN

from conftest import masks_of, random_state


def brute_frontier(state):
    h, w = state.shape
    out = set()
    for y in range(h):
        for x in range(w):
            if state[y, x] != FREE:
                continue
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nx, ny = x + dx, y + dy
                    if (dx or dy) and 0 <= nx < w and 0 <= ny < h and state[ny, nx] == UNKNOWN:
                        out.add((x, y))
    return out


def brute_components(cells):
    """Union-find over 8-adjacency."""
    parent = {c: c for c in cells}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for x, y in cells:
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                n = (x + dx, y + dy)
                if n in parent:
                    parent[find(n)] = find((x, y))
    groups = {}
    for c in cells:
        groups.setdefault(find(c), set()).add(c)
    return sorted(groups.values(), key=min)


def test_extraction_matches_brute_force(rng):
    for _ in range(30):
        state = random_state(rng, 40, 50, p_unknown=rng.uniform(0.05, 0.9))
        assert fr.extract_frontier_cells(masks_of(state)) == brute_frontier(state)


def test_clusters_match_union_find(rng):
    for _ in range(30):
        state = random_state(rng, 40, 40, p_unknown=rng.uniform(0.1, 0.7))
        cells = fr.extract_frontier_cells(masks_of(state))
        got = fr.cluster(cells)
        want = brute_components(cells)
        assert [set(c) for c in got] == want
        for comp in got:
            assert comp[0] == min(comp)
            assert len(comp) == len(set(comp))


def test_cluster_empty():
    assert fr.cluster(set()) == []


def test_filter_split_thresholds():
    comp = [(i, 0) for i in range(40)]
    out = fr.filter_split([comp], 1.5, 3.5, 0.1)
    # 4.0 m -> ceil(4.0 / 3.5) = 2 pieces of 20 cells
    assert [f.cell_count for f in out] == [20, 20]
    assert [f.id for f in out] == [0, 1]
    assert out[0].cells == tuple(comp[:20])
    assert fr.filter_split([comp[:10]], 1.5, 3.5, 0.1) == []
    assert [f.cell_count for f in fr.filter_split([comp[:35]], 1.5, 3.5, 0.1)] == [35]
    assert [f.cell_count for f in fr.filter_split([comp[:15]], 1.5, 3.5, 0.1)] == [15]


def test_filter_split_uneven_sizes_and_remainders():
    comp = [(i, 0) for i in range(71)]
    out = fr.filter_split([comp], 1.5, 3.5, 0.1)
    assert [f.cell_count for f in out] == [24, 24, 23]
    assert not any(f.remainder for f in out)
    out = fr.filter_split([[(i, 0) for i in range(8)]], 0.5, 0.7, 0.1)
    assert [f.cell_count for f in out] == [4, 4]
    assert all(f.remainder for f in out)
    with pytest.raises(InvalidArgument):
        fr.filter_split([comp], 3.0, 1.0, 0.1)


def test_descriptor_centroid_orientation_area():
    # free bottom half, unknown top half: frontier is the top free row facing +y
    state = np.full((6, 20), FREE, dtype=np.int8)
    state[3:] = UNKNOWN
    masks = masks_of(state, resolution=0.1)
    out = fr.generate_frontiers(masks, 1.5, 3.5)
    assert len(out) == 1
    f = out[0]
    assert f.cell_count == 20
    assert f.area == pytest.approx(2.0)
    assert f.centroid == pytest.approx((1.0, 0.25))
    assert f.orientation == pytest.approx(math.pi / 2)


def test_orientation_ignores_obstacles():
    state = np.full((5, 5), FREE, dtype=np.int8)
    state[:, 4] = UNKNOWN
    state[:, 0] = OBSTACLE
    f = fr.describe([(3, y) for y in range(5)], masks_of(state))
    assert f.orientation == pytest.approx(0.0)


def test_describe_empty_raises():
    with pytest.raises(InvalidArgument):
        fr.describe([], masks_of(np.zeros((2, 2))))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.05, 0.95))
def test_generated_frontiers_partition_large_components(seed, p_unknown):
    rng = np.random.default_rng(seed)
    masks = masks_of(random_state(rng, 24, 24, p_unknown=p_unknown), resolution=0.1)
    out = fr.generate_frontiers(masks, 0.3, 0.8)
    cells = fr.extract_frontier_cells(masks)
    seen = set()
    for f in out:
        assert set(f.cells) <= cells
        assert seen.isdisjoint(f.cells)
        seen |= set(f.cells)
        assert f.cell_count * 0.1 <= 0.8 + 1e-9
    kept = {c for comp in fr.cluster(cells) if len(comp) * 0.1 >= 0.3 - 1e-9 for c in comp}
    assert seen == kept


def test_frontier_csv(tmp_path):
    state = np.full((6, 20), FREE, dtype=np.int8)
    state[3:] = UNKNOWN
    out = fr.generate_frontiers(masks_of(state, 0.1), 1.5, 3.5)
    path = fr.write_frontier_csv(tmp_path / "f.csv", [(0, out), (1, out)])
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == fr.FRONTIER_CSV_COLUMNS
    assert len(lines) == 3
