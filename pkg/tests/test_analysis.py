import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from ltlgames.analysis import (
    MarkovChain, PureMemorylessStrategyPair, all_pair_values, bscc_bijection_check, bsccs, classify_bscc,
    count_pairs, discounted_value_pair, discounted_value_vi, evaluate_pair, greedy_choice, induce_mc,
    lift_choice, maximin_bounds, parity_best_response, parity_value_exact, reach_prob, reachable_bsccs,
    values_csv, worst_case_value,
)
from ltlgames.errors import CapExceeded
from ltlgames.game import Arena, parse_game
from ltlgames.generators import random_product
from ltlgames.prm import Prm
from ltlgames.priority import build_priority
from ltlgames.product import build_product

from conftest import const_dpa, cycle3_product

EPS_GRID = [0.2, 0.1, 0.05, 0.01, 0.001]


def chain(rows, colors=None):
    n = len(rows)
    P = np.zeros((n, n))
    for i, row in enumerate(rows):
        for j, p in row.items():
            P[i, j] = p
    return MarkovChain(list(range(n)), sp.csr_matrix(P), 0, None if colors is None else np.array(colors))


def power_reach(mc, target, n_iter=20000):
    """Reachability by plain fixed-point iteration (independent of the solver)."""
    x = np.zeros(mc.n_states)
    t = np.zeros(mc.n_states, dtype=bool)
    t[list(target)] = True
    P = mc.P.toarray()
    for _ in range(n_iter):
        x = np.where(t, 1.0, P @ x)
    return x


# -- chains ------------------------------------------------------------------

def test_chain_validation():
    with pytest.raises(ValueError):
        chain([{0: 0.5}])


def test_bsccs_small():
    assert bsccs(chain([{1: 1.0}, {0: 1.0}])) == [frozenset({0, 1})]
    assert bsccs(chain([{1: 1.0}, {1: 1.0}])) == [frozenset({1})]
    mc = chain([{1: 0.5, 2: 0.5}, {1: 1.0}, {2: 1.0}])
    assert bsccs(mc) == [frozenset({1}), frozenset({2})]
    assert reachable_bsccs(mc, start=1) == [frozenset({1})]


def test_classify():
    mc = chain([{1: 1.0}, {2: 1.0}, {3: 1.0}, {0: 1.0}], colors=[1, 2, 3, 4])
    assert classify_bscc(mc, {0, 1, 2, 3}) == "accepting"
    assert classify_bscc(mc, {1}) == "accepting"
    assert classify_bscc(mc, {2}) == "rejecting"
    with pytest.raises(ValueError):
        classify_bscc(chain([{0: 1.0}]), {0})


def test_reach_prob_examples():
    mc = chain([{0: 0.5, 1: 0.5}, {1: 1.0}])
    assert reach_prob(mc, {0, 1}).tolist() == [1.0, 1.0]
    assert reach_prob(mc, {1})[0] == pytest.approx(1.0, abs=1e-12)
    mc = chain([{1: 0.3, 2: 0.7}, {1: 1.0}, {2: 1.0}])
    assert reach_prob(mc, {1}) == pytest.approx([0.3, 1.0, 0.0], abs=1e-12)


@st.composite
def chains(draw):
    n = draw(st.integers(1, 7))
    rows = []
    for _ in range(n):
        succ = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=3, unique=True))
        w = np.array(draw(st.lists(st.integers(1, 9), min_size=len(succ), max_size=len(succ))), dtype=float)
        rows.append(dict(zip(succ, w / w.sum())))
    target = draw(st.sets(st.integers(0, n - 1)))
    return chain(rows), target


@given(chains())
def test_reach_prob_matches_iteration(args):
    mc, target = args
    assert reach_prob(mc, target) == pytest.approx(power_reach(mc, target), abs=1e-6)


@given(chains())
def test_bsccs_partition(args):
    mc, _ = args
    bs = bsccs(mc)
    seen = set()
    for B in bs:
        assert not (B & seen)
        seen |= B
        # closed: no mass leaves B
        for i in B:
            assert set(mc.distribution(i)) <= B
    # every state reaches some BSCC with probability one
    assert np.allclose(power_reach(mc, seen), 1.0, atol=1e-6) if seen else False


# -- induced chains on the six-state game ------------------------------------

def test_induced_cycle(six_product):
    p = six_product
    pair = {p.index[("s1", 1)]: "beta3", p.index[("s1", 0)]: "beta4"}
    choice = np.zeros(p.n_states, dtype=np.int64)
    for s, a in pair.items():
        choice[s] = p.action_index(s, a)
    mc = induce_mc(p, choice)
    cycle = frozenset(p.index[x] for x in [("s1", 1), ("s2", 1), ("s1", 0), ("s3", 0)])
    assert cycle in bsccs(mc)
    assert classify_bscc(mc, cycle) == "rejecting"
    assert max(mc.color[list(cycle)]) == 5


def test_unreachable_change_is_invisible(six_product):
    p = six_product
    c1 = np.zeros(p.n_states, dtype=np.int64)
    c2 = c1.copy()
    # <s0, q1> is unreachable when every state plays its first action
    x = p.index[("s0", 1)]
    c2[x] = 1
    sub = [p.index[s] for s in [("s0", 0), ("s4", 1), ("s5", 0), ("s4", 0), ("s1", 1), ("s2", 1), ("s1", 0), ("s2", 0)]]
    m1, m2 = induce_mc(p, c1), induce_mc(p, c2)
    assert (m1.P[sub] != m2.P[sub]).nnz == 0
    assert evaluate_pair(p, c1)[p.initial] == evaluate_pair(p, c2)[p.initial]


def test_one_state_chain():
    g = parse_game("game\nap a\nstate x mu\ninit x\nt x loop x:1.0\n")
    mc = induce_mc(g, [0])
    assert mc.n_states == 1 and bsccs(mc) == [frozenset({0})]


def test_pair_object_round_trip(six_product):
    pair = PureMemorylessStrategyPair.from_choice(six_product, np.zeros(six_product.n_states, dtype=int))
    assert pair.choice(six_product).tolist() == [0] * six_product.n_states
    with pytest.raises(ValueError):
        PureMemorylessStrategyPair({}, {}).choice(six_product)
    with pytest.raises(ValueError):
        induce_mc(six_product, [5] * six_product.n_states)


# -- exact parity values -----------------------------------------------------

def brute_force_value(p):
    """max over controller maps of min over adversary maps, by plain iteration."""
    ctrl = [s for s in range(p.n_states) if p.controller[s]]
    adv = [s for s in range(p.n_states) if not p.controller[s]]
    best = -1.0
    for cm in itertools.product(*[range(len(p.actions[s])) for s in ctrl]):
        worst = 2.0
        for am in itertools.product(*[range(len(p.actions[s])) for s in adv]):
            choice = np.zeros(p.n_states, dtype=np.int64)
            choice[ctrl] = cm
            choice[adv] = am
            worst = min(worst, evaluate_pair(p, choice)[p.initial])
        best = max(best, worst)
    return best


def test_six_state_value(six_product):
    res = parity_value_exact(six_product)
    assert res.value == pytest.approx(0.9, abs=1e-12)
    assert res.value == pytest.approx(brute_force_value(six_product), abs=1e-12)
    assert res.pair.controller[("s0", 0)] == "beta1"
    lo, hi = maximin_bounds(six_product, res.choice, res.choice)
    assert lo == pytest.approx(0.9, abs=1e-12) and hi == pytest.approx(0.9, abs=1e-12)


def test_trivial_values(six):
    assert parity_value_exact(build_product(six, const_dpa(six.ap, 2))).value == 1.0
    assert parity_value_exact(build_product(six, const_dpa(six.ap, 3))).value == 0.0


def test_cap(six_product):
    with pytest.raises(CapExceeded):
        parity_value_exact(six_product, cap=3)
    assert count_pairs(six_product) == 2 * 2 * 2 * 2


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_enumeration_matches_brute_force(seed):
    p = random_product(np.random.default_rng(seed), max_states=7, max_actions=3)
    res = parity_value_exact(p)
    assert res.value == pytest.approx(brute_force_value(p), abs=1e-9)
    vals = all_pair_values(p)
    assert vals.min(axis=1).max() == pytest.approx(res.value, abs=1e-9)
    # the witness achieves the value against a best-responding adversary
    assert worst_case_value(p, res.choice) == pytest.approx(res.value, abs=1e-9)
    # and the bracket from a best-responding adversary closes on it
    _, adv = parity_best_response(p, res.choice, "adversary")
    lo, hi = maximin_bounds(p, res.choice, adv)
    assert lo <= res.value + 1e-9 and hi >= res.value - 1e-9


# -- discounted values -------------------------------------------------------

def _one_state(reward, eps):
    a = Arena(["x"], [True], [["loop"]], [[([0], [1.0])]])
    a.reward = np.array([reward])
    a.discount = 1 - eps
    return a


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_vi_geometric_series(eps):
    assert discounted_value_vi(_one_state(eps, eps), tol=1e-10).values[0] == pytest.approx(1.0, abs=1e-9)
    assert discounted_value_vi(_one_state(0.0, eps), tol=1e-10).values[0] == 0.0
    with pytest.raises(ValueError):
        discounted_value_vi(_one_state(eps, eps), tol=0)


def test_vi_matches_pair_solve(six_product):
    pg = build_priority(six_product, Prm(5, 0.05))
    vi = discounted_value_vi(pg, tol=1e-10)
    assert vi.values == pytest.approx(discounted_value_pair(pg, vi.choice), abs=1e-8)
    assert np.all((vi.values >= 0) & (vi.values <= 1 + 1e-12))


def test_six_state_discounted_baselines(six_product):
    # regression baselines; the smaller eps is within 0.05 of the parity value 0.9
    v = {}
    for eps in (0.01, 0.001):
        pg = build_priority(six_product, Prm(5, eps))
        v[eps] = discounted_value_vi(pg, tol=1e-9).values[pg.initial]
    assert v[0.01] == pytest.approx(0.7507, abs=1e-4)
    assert v[0.001] == pytest.approx(0.8557, abs=1e-4)
    assert abs(v[0.001] - 0.9) <= 0.05


def test_greedy_choice_ties():
    g = parse_game("game\nap a\nstate x mu\nstate y nu\ninit x\n"
                   "t x l y:1.0\nt x r y:1.0\nt y l x:1.0\nt y r x:1.0\n")
    assert greedy_choice(g, [0.5, 0.5, 0.2, 0.7]).tolist() == [0, 0]
    assert greedy_choice(g, [0.1, 0.9, 0.7, 0.2]).tolist() == [1, 1]


@pytest.mark.parametrize("colors, direction, final", [([1, 2], 1, 0.95), ([2, 3], -1, 0.05)])
def test_discounted_values_converge_monotonically(colors, direction, final):
    p = cycle3_product(colors)
    vals = []
    for eps in EPS_GRID:
        pg = build_priority(p, Prm(max(colors), eps))
        vals.append(discounted_value_vi(pg, tol=1e-12).values[pg.initial])
    assert all(direction * (b - a) >= -1e-12 for a, b in zip(vals, vals[1:]))
    assert (vals[-1] >= final) if direction > 0 else (vals[-1] <= final)


def test_slow_mixing_gap_shrinks_late():
    # a two-state BSCC that shows its even color only rarely: at eps = 0.001 the
    # discounted value is still far from the parity probability 1
    g = parse_game("game\nap a\nstate x mu a\nstate y mu\ninit x\n"
                   "t x go x:0.514 y:0.486\nt y go x:0.048 y:0.952\n")
    p = build_product(g, const_dpa(("a",), 1))
    p.color[:] = [2, 1]
    gaps = []
    for eps in (0.01, 0.001, 1e-5):
        pg = build_priority(p, Prm(2, eps))
        gaps.append(1.0 - discounted_value_pair(pg, np.zeros(pg.n_states, dtype=int))[pg.initial])
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[1] > 0.05 and gaps[2] < 0.01


# -- BSCC bijection ----------------------------------------------------------

def _pair_chains(p, choice, eps):
    pg = build_priority(p, Prm(p.k, eps))
    return induce_mc(pg, lift_choice(pg, choice)), induce_mc(p, choice), pg


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.3, 0.1]))
def test_bijection_random(seed, eps):
    rng = np.random.default_rng(seed)
    p = random_product(rng, max_states=8, max_actions=3)
    choice = np.array([rng.integers(len(a)) for a in p.actions])
    mc_star, mc, pg = _pair_chains(p, choice, eps)
    ok, witness = bscc_bijection_check(mc_star, mc, pg.x)
    assert ok, witness


def test_bijection_negative_control(six_product):
    choice = np.zeros(six_product.n_states, dtype=np.int64)
    mc_star, mc, pg = _pair_chains(six_product, choice, 0.1)
    big = next(B for B in bsccs(mc_star) if len({int(pg.x[i]) for i in B}) > 1)
    i = min(big)
    P = mc_star.P.tolil()
    P.rows[i], P.data[i] = [i], [1.0]
    bad = MarkovChain(mc_star.states, P.tocsr(), mc_star.initial)
    ok, witness = bscc_bijection_check(bad, mc, pg.x)
    assert not ok and "unmatched_priority" in witness


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_parity_equals_priority_reachability(seed):
    rng = np.random.default_rng(seed)
    p = random_product(rng, max_states=8, max_actions=3)
    choice = np.array([rng.integers(len(a)) for a in p.actions])
    mc_star, mc, pg = _pair_chains(p, choice, 0.1)
    acc = set()
    for B in bsccs(mc_star):
        if p.color[pg.x[list(B)]].max() % 2 == 0:
            acc |= B
    lhs = evaluate_pair(p, choice)[p.initial]
    rhs = reach_prob(mc_star, acc)[pg.initial]
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_values_csv(six_product):
    text = values_csv(six_product, np.arange(six_product.n_states))
    lines = text.splitlines()
    assert lines[0] == "state,value"
    assert lines[1] == "s0|0,0.0"
