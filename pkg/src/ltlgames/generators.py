"""
Random games and automata for property suites and demos.
"""

from __future__ import annotations

import numpy as np

from .automata import Dpa
from .game import StochasticGame
from .ltl import all_labels
from .product import build_product

__all__ = ["random_game", "random_dpa", "random_product"]


def random_game(rng: np.random.Generator, n_states: int = 4, ap=("a", "b"), max_actions: int = 2,
                max_succ: int = 2, p_controller: float = 0.5) -> StochasticGame:
    """Random labelled game; every state gets 1..max_actions actions with 1..max_succ successors."""
    names = [f"s{i}" for i in range(n_states)]
    controller = rng.random(n_states) < p_controller
    actions = []
    dists = []
    for s in range(n_states):
        k = int(rng.integers(1, max_actions + 1))
        actions.append([f"a{i}" for i in range(k)])
        ds = []
        for _ in range(k):
            m = int(rng.integers(1, min(max_succ, n_states) + 1))
            succ = rng.choice(n_states, size=m, replace=False)
            p = rng.dirichlet(np.ones(m))
            p = np.maximum(p, 0.05)
            p /= p.sum()
            p[-1] = 1.0 - p[:-1].sum()
            ds.append((succ.tolist(), p.tolist()))
        dists.append(ds)
    labels = [[a for a in ap if rng.random() < 0.5] for _ in range(n_states)]
    return StochasticGame(names, controller, actions, dists, ap, labels, 0)


def random_dpa(rng: np.random.Generator, n_states: int = 2, ap=("a", "b"), k: int = 4) -> Dpa:
    n_letters = len(all_labels(ap))
    delta = rng.integers(0, n_states, size=(n_states, n_letters))
    color = rng.integers(1, k + 1, size=(n_states, n_letters))
    return Dpa(ap, delta, color, k=k)


def random_product(rng: np.random.Generator, max_states: int = 8, **kw):
    """Random product with at most ``max_states`` states (resampled until it fits)."""
    n_game = kw.pop("n_states", 4)
    n_q = kw.pop("n_q", 2)
    k = kw.pop("k", 4)
    ap = kw.get("ap", ("a", "b"))
    while True:
        g = random_game(rng, n_game, **kw)
        p = build_product(g, random_dpa(rng, n_q, ap, k))
        if p.n_states <= max_states:
            return p
