import numpy as np
import pytest
from hypothesis import strategies as st

from iga import Game

# (criterion number, passed, detail) tuples filled in by the acceptance module.
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


payoff = st.floats(-10.0, 10.0, allow_nan=False)
games = st.builds(Game, *[payoff] * 8)
unit = st.floats(0.0, 1.0)


def random_game_array(seed: int, n: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, 8))


@pytest.fixture(scope="session")
def pd():
    return Game.from_matrices([[3, 0], [5, 1]], [[3, 5], [0, 1]])


@pytest.fixture(scope="session")
def mp():
    return Game.from_matrices([[1, -1], [-1, 1]], [[-1, 1], [1, -1]])


@pytest.fixture(scope="session")
def coord():
    return Game.from_matrices([[2, 0], [0, 1]], [[2, 0], [0, 1]])


@pytest.fixture(scope="session")
def flat_row():
    # u = 0 for the row player
    return Game.from_matrices([[1, 2], [3, 4]], [[0, 1], [2, 0]])
