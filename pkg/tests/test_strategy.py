import numpy as np
import pytest

from ltlgames.analysis import lift_choice, parity_value_exact, worst_case_value
from ltlgames.errors import FormatError
from ltlgames.prm import Prm
from ltlgames.priority import build_priority
from ltlgames.product import build_product
from ltlgames.strategy import (
    attach_memory, dump_strategy, evaluate_worst_case, induce_strategy, load_strategy, simulate,
    simulate_priority, worst_case_chain,
)

from conftest import const_dpa


@pytest.fixture(scope="module")
def six_pg(six_product):
    return build_priority(six_product, Prm(5, 0.01))


def _product_choice(p, picks):
    choice = np.zeros(p.n_states, dtype=np.int64)
    for sid, a in picks.items():
        choice[p.index[sid]] = p.action_index(p.index[sid], a)
    return choice


@pytest.fixture(scope="module")
def cycle_pair(six_product, six_pg):
    # beta1 at s0; the adversary alternates beta3 / beta4 with the automaton state
    picks = {("s1", 1): "beta3", ("s1", 0): "beta4"}
    return lift_choice(six_pg, _product_choice(six_product, picks))


def test_universal_has_few_modes(six):
    p = build_product(six, const_dpa(six.ap, 2))
    pg = build_priority(p, Prm(2, 0.1))
    ctrl, adv = induce_strategy(pg, np.zeros(pg.n_states, dtype=int))
    assert len(ctrl.modes) <= 3 and ctrl.modes == adv.modes
    assert evaluate_worst_case(six, None, ctrl) == pytest.approx(1.0)
    p = build_product(six, const_dpa(six.ap, 3))
    pg = build_priority(p, Prm(3, 0.1))
    ctrl, _ = induce_strategy(pg, np.zeros(pg.n_states, dtype=int))
    assert evaluate_worst_case(six, None, ctrl) == 0.0


def test_alternating_adversary(six, six_pg, cycle_pair):
    _, adv = induce_strategy(six_pg, cycle_pair)
    s1 = six.index["s1"]
    for (m, s), dist in adv.action.items():
        if s == s1:
            q = int(adv.modes[m].split(",")[0][3:])
            assert dist == ({"beta3": 1.0} if q == 1 else {"beta4": 1.0})
    # on the cycle s1 s2 s1 s3 the automaton part of the mode alternates
    rng = np.random.default_rng(0)
    ctrl, _ = induce_strategy(six_pg, cycle_pair)
    tr = simulate(six, ctrl, adv, 400, rng, start="s1")
    qs = [int(m[0].split(",")[0][3:]) for m, s in zip(tr["modes"], tr["path"]) if s == "s1"]
    assert len(set(qs)) == 2
    assert all(a != b for a, b in zip(qs, qs[1:]))


def test_mode_updates_are_distributions(six_pg, cycle_pair):
    ctrl, adv = induce_strategy(six_pg, cycle_pair)
    for st in (ctrl, adv):
        for (t, p) in st.update.values():
            assert abs(p.sum() - 1.0) <= 1e-12


def test_induce_rejects_foreign_inputs(six_pg, fgab, cycle_pair):
    with pytest.raises(ValueError):
        induce_strategy(six_pg, cycle_pair, m=Prm(5, 0.1))
    from ltlgames.automata import load_hoa
    from conftest import data_path
    other = load_hoa(data_path("automata", "fgab_or_fgc.hoa"))
    with pytest.raises(ValueError):
        induce_strategy(six_pg, cycle_pair, d=other)
    ctrl, adv = induce_strategy(six_pg, cycle_pair)
    with pytest.raises(ValueError):
        evaluate_worst_case(None, other, ctrl)
    with pytest.raises(ValueError):
        evaluate_worst_case(None, None, adv)


def test_worst_case_matches_product_evaluation(six_product, six_pg):
    best = parity_value_exact(six_product)
    ctrl, _ = induce_strategy(six_pg, lift_choice(six_pg, best.choice))
    got = evaluate_worst_case(six_product.game, six_product.dpa, ctrl)
    assert got == pytest.approx(worst_case_value(six_product, best.choice), abs=1e-9)
    assert got == pytest.approx(0.9, abs=1e-9)
    mc, bottom, values = worst_case_chain(ctrl)
    assert values[six_pg.initial] == pytest.approx(got)
    assert bottom and all(B <= set(range(mc.n_states)) for B in bottom)


def test_simulation_reproducible(six, six_pg, cycle_pair):
    ctrl, adv = induce_strategy(six_pg, cycle_pair)
    a = simulate(six, ctrl, adv, 200, np.random.default_rng(5))
    b = simulate(six, ctrl, adv, 200, np.random.default_rng(5))
    assert a == b
    assert len(a["path"]) == 201 and len(a["actions"]) == 200 and len(a["modes"]) == 201


def test_deterministic_game_has_one_path(six, six_pg):
    # from s4 the game is deterministic
    ctrl, adv = induce_strategy(six_pg, np.zeros(six_pg.n_states, dtype=int))
    paths = {tuple(simulate(six, ctrl, adv, 6, np.random.default_rng(s), start="s4")["path"]) for s in range(5)}
    assert paths == {("s4", "s5", "s4", "s5", "s4", "s5", "s4")}


def test_faithful_to_priority_rollout(six, six_pg, cycle_pair):
    ctrl, adv = induce_strategy(six_pg, cycle_pair)
    for seed in range(5):
        tr = simulate(six, ctrl, adv, 300, np.random.default_rng(seed))
        ref = simulate_priority(six_pg, cycle_pair, 300, np.random.default_rng(seed))
        got = [(s, m[0]) for s, m in zip(tr["path"], tr["modes"])]
        want = [(x[0], f"(q={x[1]},j={j})") for x, j in ref]
        assert got == want


def _bounded_reach(sg, ctrl, adv, target, n):
    """Forward recursion over (state, controller mode, adversary mode)."""
    dist = {(sg.initial, ctrl.initial, adv.initial): 1.0}
    hit = 0.0
    for _ in range(n + 1):
        nxt = {}
        for (s, mc, ma), pr in dist.items():
            if sg.states[s] in target:
                hit += pr
                continue
            if _ == n:
                continue
            mover = ctrl.act(mc, s) if sg.controller[s] else adv.act(ma, s)
            tc, pc = ctrl.update[(mc, s)]
            ta, pa = adv.update[(ma, s)]
            for a, pa_ in mover.items():
                t, p = sg.dists[s][sg.action_index(s, a)]
                for s2, q in zip(t.tolist(), p.tolist()):
                    # both memories move on the same draw, so pair modes index-wise
                    for m1, m2, r in zip(tc.tolist(), ta.tolist(), pc.tolist()):
                        key = (s2, m1, m2)
                        nxt[key] = nxt.get(key, 0.0) + pr * pa_ * q * r
        dist = nxt
    return hit


def test_simulated_frequency_matches_recursion(six, six_pg):
    choice = np.zeros(six_pg.n_states, dtype=np.int64)
    for i in range(six_pg.n_states):
        if six_pg.states[i][0][0] in ("s0", "s1"):
            choice[i] = 1  # wait with beta2; the adversary detours through s3
    ctrl, adv = induce_strategy(six_pg, choice)
    target, n = {"s3"}, 12
    exact = _bounded_reach(six, ctrl, adv, target, n)
    rng = np.random.default_rng(123)
    runs = 10000
    hits = sum(any(s in target for s in simulate(six, ctrl, adv, n, rng)["path"]) for _ in range(runs))
    assert 0.05 < exact < 0.95
    assert abs(hits / runs - exact) <= 0.02


def test_dump_load_round_trip(six, six_pg, cycle_pair):
    ctrl, adv = induce_strategy(six_pg, cycle_pair)
    text = dump_strategy(ctrl)
    assert text == dump_strategy(ctrl)
    back = load_strategy(text, six)
    assert back.modes == ctrl.modes and back.initial == ctrl.initial
    assert back.action == ctrl.action
    assert dump_strategy(back) == text
    with pytest.raises(ValueError):
        evaluate_worst_case(six, None, back)
    again = attach_memory(back, six_pg)
    assert evaluate_worst_case(six, None, again) == pytest.approx(evaluate_worst_case(six, None, ctrl))
    with pytest.raises(FormatError):
        load_strategy("strategy controller\nmode (q=0,j=0)\n", six)
    with pytest.raises(FormatError):
        load_strategy(text.replace("state s0", "state zz", 1), six)
