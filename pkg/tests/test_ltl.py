import itertools

import pytest
from hypothesis import given, strategies as st

from ltlgames.ltl import (
    TRUE, Always, And, Eventually, LassoWord, LTLSyntaxError, Next, Not, Or, Until, atom,
    atomic_propositions, eval_lasso, expand, parse_ltl, all_labels,
)

a, b, c = atom("a"), atom("b"), atom("c")
AP = ("a", "b", "c")
PHI = "(F G a & G F b) | F G c"


def test_parse_basic_shapes():
    assert parse_ltl("F G a") == Eventually(Always(a))
    assert parse_ltl(PHI) == Or(And(Eventually(Always(a)), Always(Eventually(b))), Eventually(Always(c)))
    assert parse_ltl("a U b U c") == Until(a, Until(b, c))


def test_precedence_table():
    assert parse_ltl("a -> b | c & d") == parse_ltl("a -> (b | (c & d))")
    assert parse_ltl("a & b U c") == And(a, Until(b, c))
    assert parse_ltl("!a U X b") == Until(Not(a), Next(b))
    assert parse_ltl("a -> b -> c") == parse_ltl("a -> (b -> c)")


def test_unicode_aliases():
    assert parse_ltl("◊□a ∧ ¬◯b ∨ c") == parse_ltl("F G a & !X b | c")


def test_false_is_not_true():
    w = LassoWord([], [{}], AP)
    assert not eval_lasso(parse_ltl("false"), w)
    assert eval_lasso(parse_ltl("true"), w)


@pytest.mark.parametrize("text", ["a &", "(a | b", "a b", "F", "a $ b", ""])
def test_syntax_errors(text):
    with pytest.raises(LTLSyntaxError):
        parse_ltl(text)


def test_syntax_error_reports_position():
    with pytest.raises(LTLSyntaxError) as err:
        parse_ltl("a & $")
    assert err.value.pos == 4


def test_atomic_propositions():
    assert atomic_propositions(parse_ltl("F G a")) == {"a"}
    assert atomic_propositions(parse_ltl(PHI)) == {"a", "b", "c"}
    assert atomic_propositions(TRUE) == set()


def test_lasso_examples():
    phi = parse_ltl(PHI)
    assert eval_lasso(parse_ltl("F G a"), LassoWord([{}], [{"a"}], AP))
    assert eval_lasso(parse_ltl("G F b"), LassoWord([], [{"b"}, {}], AP))
    # only {a,c} forever: the c-disjunct holds
    assert eval_lasso(phi, LassoWord([], [{"a", "c"}], AP))
    # a forever with b recurring
    assert eval_lasso(phi, LassoWord([], [{"a", "c"}, {"a", "b", "c"}], AP))
    assert not eval_lasso(phi, LassoWord([], [{"a"}, {"b"}], AP))


def test_next_wraps_into_loop():
    w = LassoWord([{"a"}], [{"b"}, {"c"}], AP)
    assert eval_lasso(parse_ltl("X b"), w)
    assert eval_lasso(parse_ltl("X X c"), w)
    assert eval_lasso(parse_ltl("X X X b"), w)


def test_atom_outside_universe():
    with pytest.raises(ValueError):
        eval_lasso(parse_ltl("d"), LassoWord([], [{}], AP))
    with pytest.raises(ValueError):
        LassoWord([], [{"z"}], AP)


def test_empty_loop_rejected():
    with pytest.raises(ValueError):
        LassoWord([{}], [], AP)


# -- properties -------------------------------------------------------------

atoms = st.sampled_from([a, b, c, TRUE])


def _formulas():
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.builds(Not, sub), st.builds(Next, sub), st.builds(Eventually, sub), st.builds(Always, sub),
            st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Until, sub, sub),
            st.builds(lambda x, y: parse_ltl(f"({x}) -> ({y})"), sub, sub),
        ),
        max_leaves=8,
    )


labels = st.sets(st.sampled_from(AP))
words = st.builds(lambda s, l: LassoWord(s, l, AP),
                  st.lists(labels, max_size=3), st.lists(labels, min_size=1, max_size=3))


@given(_formulas(), words)
def test_negation_duality(f, w):
    assert eval_lasso(Not(f), w) == (not eval_lasso(f, w))


@given(_formulas())
def test_print_parse_round_trip(f):
    assert parse_ltl(str(f)) == f


@given(_formulas(), words)
def test_expansion_matches_derived_nodes(f, w):
    assert eval_lasso(expand(f), w) == eval_lasso(f, w)


@given(_formulas(), words)
def test_loop_unrolling_invariance(f, w):
    v = eval_lasso(f, w)
    assert eval_lasso(f, LassoWord(w.stem + w.loop, w.loop, AP)) == v
    assert eval_lasso(f, LassoWord(w.stem, w.loop + w.loop, AP)) == v


def _naive(f, w, t, horizon):
    """Evaluate on a long unrolling; exact for horizons past the lasso's periodic regime."""
    k = f.kind
    if k == "true":
        return True
    if k == "atom":
        return f.name in w.letter(t)
    if k == "not":
        return not _naive(f.children[0], w, t, horizon)
    if k == "and":
        return _naive(f.children[0], w, t, horizon) and _naive(f.children[1], w, t, horizon)
    if k == "next":
        return _naive(f.children[0], w, t + 1, horizon)
    if k == "until":
        for u in range(t, t + horizon):
            if _naive(f.children[1], w, u, horizon):
                return True
            if not _naive(f.children[0], w, u, horizon):
                return False
        return False
    raise AssertionError(k)


@given(_formulas(), words)
def test_against_bounded_unrolling(f, w):
    core = expand(f)
    depth = sum(1 for _ in str(core))  # generous bound on nesting
    horizon = len(w) * (depth + 2)
    assert _naive(core, w, 0, horizon) == eval_lasso(f, w)


def test_expansion_exhaustive_small():
    # F x = true U x and G x = !F !x on every lasso with |stem|+|loop| <= 6 over two propositions
    ap = ("a", "b")
    letters = all_labels(ap)
    x = parse_ltl("a U X b")
    fx, gx = Eventually(x), Always(x)
    fx2, gx2 = Until(TRUE, x), Not(Eventually(Not(x)))
    for n in range(1, 7):
        for split in range(n):
            for word in itertools.product(letters, repeat=n):
                w = LassoWord(word[:split], word[split:], ap)
                assert eval_lasso(fx, w) == eval_lasso(fx2, w)
                assert eval_lasso(gx, w) == eval_lasso(gx2, w)
