"""
Check a hand-written parity automaton against its LTL formula.

Every ultimately periodic word ``stem loop^omega`` up to the given lengths is
evaluated twice, once by the LTL semantics and once by the automaton run, and
the two verdicts are compared.

    python demos/checking_automata.py
"""

from importlib.resources import files

from ltlgames import check_equivalence_bounded, load_hoa, parse_ltl

AUTOMATA = files("ltlgames") / "data" / "automata"

d = load_hoa(str(AUTOMATA / "nursery.hoa"))
f = parse_ltl("F G e & F a & G (a -> X G !a) & G F b & G F c & G !d")
rep = check_equivalence_bounded(d, f, 2, 2)
print(f"nursery automaton: {rep.checked} lassos, {rep.n_counterexamples} disagreements")

# a deliberately wrong pairing shows what a counterexample looks like
d = load_hoa(str(AUTOMATA / "universal.hoa"))
rep = check_equivalence_bounded(d, parse_ltl("G a"), 1, 1, max_listed=3)
print(f"'true' automaton vs G a: {rep.n_counterexamples} disagreements, e.g.")
for cx in rep.counterexamples:
    print("   ", cx)
