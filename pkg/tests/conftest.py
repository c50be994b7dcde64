from importlib.resources import files

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ltlgames.automata import Dpa, load_hoa
from ltlgames.game import build_gridworld, load_game, load_grid, parse_game
from ltlgames.product import build_product

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = files("ltlgames") / "data"


def data_path(*parts):
    return str(DATA.joinpath(*parts))


@pytest.fixture(scope="session")
def six():
    return load_game(data_path("games", "six_state.game"))


@pytest.fixture(scope="session")
def fgab():
    return load_hoa(data_path("automata", "fgab_or_fgc.hoa"))


@pytest.fixture(scope="session")
def universal():
    return load_hoa(data_path("automata", "universal.hoa"))


@pytest.fixture(scope="session")
def six_product(six, fgab):
    return build_product(six, fgab)


@pytest.fixture(scope="session")
def small4():
    return build_gridworld(load_grid(data_path("grids", "small4.grid")))


CYCLE3 = """game
ap a
state s0 mu
state s1 mu a
state s2 mu
init s0
t s0 go s1:1.0
t s1 go s2:0.5 s0:0.5
t s2 go s0:1.0
"""


def cycle3_product(colors):
    """Three-state chain whose single BSCC shows ``colors[1]`` at s1 and ``colors[0]`` elsewhere."""
    d = Dpa(("a",), np.zeros((1, 2), dtype=int), np.array([colors]), k=max(colors))
    return build_product(parse_game(CYCLE3), d)


def const_dpa(ap, color):
    """One-state automaton emitting ``color`` on every letter."""
    n = 1 << len(ap)
    return Dpa(tuple(ap), np.zeros((1, n), dtype=int), np.full((1, n), color), k=max(color, 2))


ACCEPTANCE = {}


def report(n, ok, detail=""):
    """Record one acceptance line; all lines are printed at the end of the run."""
    ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE, key=str):
            terminalreporter.write_line(ACCEPTANCE[n])
