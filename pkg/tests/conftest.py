import numpy as np
import pytest

from explorebug.grid_map import FREE, OBSTACLE, UNKNOWN, GridMasks

# filled by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_state(rng, h, w, p_unknown=0.4, p_obstacle=0.1) -> np.ndarray:
    u = rng.random((h, w))
    state = np.full((h, w), FREE, dtype=np.int8)
    state[u < p_unknown] = UNKNOWN
    state[(u >= p_unknown) & (u < p_unknown + p_obstacle)] = OBSTACLE
    return state


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def masks_of(state, resolution=1.0) -> GridMasks:
    return GridMasks.from_state(np.asarray(state, dtype=np.int8), resolution)
