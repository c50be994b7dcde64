import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ltlgames.game import load_game
from ltlgames.generators import random_product
from ltlgames.prm import Prm
from ltlgames.priority import (
    build_priority, discounted_return, dump_priority, priority_discount, priority_reward, simulate_returns,
)


@pytest.fixture(scope="module")
def six_pg(six_product):
    return build_priority(six_product, Prm(5, 0.01))


def test_idle_priority_factor(six_pg, six_product):
    pg, p = six_pg, six_product
    x0 = p.index[("s0", 0)]
    s = pg.find(x0, 0)
    d = pg.distribution(s, "beta2")
    for x2, q in p.distribution(x0, "beta2").items():
        assert d[pg.find(x2, 0)] == pytest.approx(0.9 * q, abs=1e-15)
        assert d[pg.find(x2, 1)] == pytest.approx(0.1 * q, abs=1e-15)


def test_escalation_copies_product_move():
    text = """game
ap a
state x mu
state y mu
init x
t x go y:0.25 x:0.75
t y go x:1.0
"""
    from ltlgames.automata import Dpa
    from ltlgames.product import build_product
    # color 3 everywhere
    d = Dpa(("a",), np.zeros((1, 2), dtype=int), np.full((1, 2), 3), k=3)
    p = build_product(load_game(text), d)
    pg = build_priority(p, Prm(3, 0.04))
    # <x, 0> -> <x, 1> -> <x, 3>: from priority 1 the color 3 forces priority 3
    s = pg.find(p.index[("x", 0)], 1)
    got = pg.distribution(s, "go")
    assert got == {pg.find(p.index[("y", 0)], 3): 0.25, pg.find(p.index[("x", 0)], 3): 0.75}


def test_rewards_and_discount(six_pg):
    pg = six_pg
    for s in range(pg.n_states):
        assert priority_reward(pg, s) == (0.01 if pg.j[s] >= 2 and pg.j[s] % 2 == 0 else 0.0)
    assert priority_discount(pg) == pytest.approx(0.99)
    s = next(i for i in range(pg.n_states) if pg.j[i] == 4)
    assert priority_reward(pg, pg.states[s]) == 0.01


def test_k_mismatch(six_product):
    with pytest.raises(ValueError, match="k=3"):
        build_priority(six_product, Prm(3, 0.1))


def test_size_bound(six_pg, six_product):
    assert six_pg.n_states <= six_product.n_states * 6
    assert six_pg.states[six_pg.initial] == (six_product.states[six_product.initial], 0)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.floats(1e-6, 1.0))
def test_factorization_and_marginals(seed, eps):
    p = random_product(np.random.default_rng(seed), max_states=10, k=4)
    m = Prm(4, eps)
    pg = build_priority(p, m)
    for s in range(pg.n_states):
        x, j = pg.x[s], pg.j[s]
        assert pg.controller[s] == p.controller[x]
        assert pg.actions[s] == p.actions[x]
        theta = m.transition(j, int(p.color[x]))
        for a in pg.actions[s]:
            d = pg.distribution(s, a)
            assert abs(sum(d.values()) - 1.0) <= 1e-12
            base = p.distribution(x, a)
            marg = {}
            for t, q in d.items():
                marg[pg.x[t]] = marg.get(pg.x[t], 0.0) + q
                assert q == pytest.approx(base[pg.x[t]] * theta[pg.j[t]], rel=1e-12)
            assert marg.keys() == base.keys()
            for x2 in base:
                assert marg[x2] == pytest.approx(base[x2], abs=1e-12)


@given(st.lists(st.sampled_from([0.0, 1.0]), max_size=400), st.floats(1e-4, 1.0))
def test_returns_are_bounded(bits, eps):
    g = discounted_return([eps * b for b in bits], 1 - eps)
    assert -1e-12 <= g <= 1 + 1e-12


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_all_reward_path_approaches_one(eps):
    n = int(math.ceil(40 / eps))
    assert discounted_return([eps] * n, 1 - eps) == pytest.approx(1.0, abs=1e-12)


def test_simulated_returns(six_pg):
    g, bound = simulate_returns(six_pg, 200, 500, np.random.default_rng(0))
    assert g.shape == (200,)
    assert np.all((g >= 0) & (g <= 1))
    assert bound == pytest.approx(0.99 ** 500)
    g2, _ = simulate_returns(six_pg, 200, 500, np.random.default_rng(0))
    assert np.array_equal(g, g2)


def test_dump_priority(six_pg):
    g = load_game(dump_priority(six_pg))
    assert g.n_states == six_pg.n_states
    assert g.annotations["discount"] == pytest.approx(0.99)
    assert sorted(g.annotations["reward"].values()) == sorted(six_pg.reward.tolist())
