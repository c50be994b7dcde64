"""Regenerate the nursery and surveillance DPA fixtures.

Both automata are built directly from the structure of their formulas and then
gated by the bounded lasso check (see tests/test_automata.py).

    python tools/gen_case_study_automata.py
"""

from itertools import permutations
from pathlib import Path

import numpy as np

from ltlgames.automata import Dpa, to_hoa
from ltlgames.ltl import all_labels

OUT = Path(__file__).resolve().parents[1] / "src" / "ltlgames" / "data" / "automata"

NURSERY = "F G e & F a & G (a -> X G !a) & G F b & G F c & G !d"
SURVEILLANCE = "(F G b & G F a) | (F G d & G F c) | (F G g & G F e & G F f)"


def nursery():
    # states: 0 = before a, 1 = waiting for b, 2 = waiting for c, 3 = rejecting sink
    # colors: 1 neutral, 2 completed b/c round inside e, 3 step outside e
    ap = ("a", "b", "c", "d", "e")
    labels = all_labels(ap)
    delta = np.zeros((4, len(labels)), dtype=int)
    color = np.ones((4, len(labels)), dtype=int)
    for i, l in enumerate(labels):
        if "d" in l:
            delta[:, i] = 3
            continue
        delta[0, i] = 1 if "a" in l else 0
        for q in (1, 2):
            if "a" in l:
                delta[q, i] = 3
                continue
            done = ("b" in l and "c" in l) if q == 1 else ("c" in l)
            if done:
                delta[q, i] = 1
            elif q == 1 and "b" in l:
                delta[q, i] = 2
            else:
                delta[q, i] = q
            if "e" not in l:
                color[q, i] = 3
            elif done:
                color[q, i] = 2
        delta[3, i] = 3
    return Dpa(ap, delta, color, state_names=["before_a", "wait_b", "wait_c", "sink"])


def surveillance():
    # index appearance record over the three zone pairs; pair i is bad when its
    # zone label is absent and good on its target (zone 3: completing an e/f round)
    ap = ("a", "b", "c", "d", "e", "f", "g")
    labels = all_labels(ap)
    perms = list(permutations(range(3)))
    states = [(p, z) for p in perms for z in (0, 1)]  # z: 0 waiting e, 1 waiting f
    index = {s: i for i, s in enumerate(states)}
    delta = np.zeros((len(states), len(labels)), dtype=int)
    color = np.ones((len(states), len(labels)), dtype=int)
    for (perm, z), qi in index.items():
        for i, l in enumerate(labels):
            if z == 0:
                if "e" in l and "f" in l:
                    z2, done = 0, True
                elif "e" in l:
                    z2, done = 1, False
                else:
                    z2, done = 0, False
            else:
                z2, done = (0, True) if "f" in l else (1, False)
            bad = {0: "b" not in l, 1: "d" not in l, 2: "g" not in l}
            good = {0: "a" in l, 1: "c" in l, 2: done}
            pos = {pair: perm.index(pair) + 1 for pair in range(3)}
            mb = max([pos[p] for p in range(3) if bad[p]], default=0)
            mg = max([pos[p] for p in range(3) if good[p]], default=0)
            if mg > mb:
                color[qi, i] = 2 * mg
            elif mb > 0:
                color[qi, i] = 2 * mb + 1
            moved = [p for p in perm if bad[p]]
            rest = [p for p in perm if not bad[p]]
            delta[qi, i] = index[(tuple(moved + rest), z2)]
    names = ["".join(str(p) for p in perm) + ("e" if z == 0 else "f") for perm, z in states]
    return Dpa(ap, delta, color, initial=index[((0, 1, 2), 0)], state_names=names)


if __name__ == "__main__":
    for name, d, f in [("nursery", nursery(), NURSERY), ("surveillance", surveillance(), SURVEILLANCE)]:
        (OUT / f"{name}.hoa").write_text(to_hoa(d, name=f))
        print(name, d)
