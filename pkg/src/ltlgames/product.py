"""
Product of a stochastic game with a deterministic parity automaton.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .automata import Dpa
from .game import StochasticGame, dump_game

__all__ = ["ProductGame", "build_product", "project_path", "dump_product"]


class ProductGame(StochasticGame):
    """Reachable product of a game and a DPA.

    State identifiers are pairs ``(game state id, automaton state index)``.

    Attributes
    ----------
    game, dpa : the factors
    sg : ndarray of int
        Game-state index of each product state.
    q : ndarray of int
        Automaton state of each product state.
    color : ndarray of int
        ``C(q, L(s))``, the color of the automaton transition taken on leaving.
        At unobserved game states the automaton stays put and the color is 1,
        the smallest color, which never decides a max-parity condition.
    """

    def __init__(self, game, dpa, sg, q, actions, dists, color, initial, convention):
        states = [(game.states[s], int(qq)) for s, qq in zip(sg, q)]
        super().__init__(states, game.controller[sg], actions, dists, game.ap,
                         [game.labels[s] for s in sg], initial)
        self.game = game
        self.dpa = dpa
        self.sg = np.asarray(sg, dtype=np.int64)
        self.q = np.asarray(q, dtype=np.int64)
        self.color = np.asarray(color, dtype=np.int64)
        self.k = dpa.k
        self.convention = convention
        self._pair_index = {(int(s), int(qq)): i for i, (s, qq) in enumerate(zip(self.sg, self.q))}
        self._letters = [dpa.letter(l) for l in game.labels]

    def automaton_step(self, s: int, q: int) -> tuple[int, int]:
        """Automaton successor and color when leaving game state ``s`` in automaton state ``q``."""
        if not self.game.observed[s]:
            return int(q), 1
        a = self._letters[s]
        return int(self.dpa.delta[q, a]), int(self.dpa.color[q, a])

    def find(self, s, q: int) -> int:
        """Index of product state ``<s, q>``; ``s`` may be an index or an id."""
        if not isinstance(s, (int, np.integer)):
            s = self.game.index[s]
        return self._pair_index[(int(s), int(q))]

    def __repr__(self):
        return f"ProductGame(states={self.n_states}, k={self.k})"


def build_product(g: StochasticGame, d: Dpa, *, convention: str = "source") -> ProductGame:
    """Forward-explore the product of ``g`` and ``d`` from ``<s0, q0>``.

    With ``convention="source"`` the automaton reads the label of the state
    being left, ``q' = delta(q, L(s))``.  ``"target"`` reads the label of the
    state entered instead; it exists only for experimentation.  States of
    ``g`` flagged unobserved leave the automaton state unchanged.
    """
    if convention not in ("source", "target"):
        raise ValueError("convention must be 'source' or 'target'")
    missing = set(g.ap).difference(d.ap)
    if missing:
        raise ValueError(f"game propositions {sorted(missing)} are not in the automaton alphabet")
    letters = [d.letter(l) for l in g.labels]
    seen = g.observed

    def step(s, q):
        return int(d.delta[q, letters[s]]) if seen[s] else q

    start = (g.initial, d.initial)
    index = {start: 0}
    order = [start]
    queue = deque([start])
    actions = []
    dists = []
    while queue:
        s, q = queue.popleft()
        acts = []
        ds = []
        q_src = step(s, q)
        for a, (t, p) in zip(g.actions[s], g.dists[s]):
            succ = []
            for x in t.tolist():
                q2 = q_src if convention == "source" else step(x, q)
                key = (x, q2)
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                    queue.append(key)
                succ.append(index[key])
            acts.append(a)
            ds.append((succ, p))
        actions.append(acts)
        dists.append(ds)
    sg = np.array([s for s, _ in order], dtype=np.int64)
    q = np.array([qq for _, qq in order], dtype=np.int64)
    color = np.array([d.color[qq, letters[s]] if seen[s] else 1 for s, qq in order], dtype=np.int64)
    return ProductGame(g, d, sg, q, actions, dists, color, 0, convention)


def project_path(path, product: ProductGame | None = None) -> list:
    """Drop the automaton component of every state on a product path.

    Elements may be ``(s, q)`` pairs, or indices when ``product`` is given.
    """
    out = []
    for x in path:
        if isinstance(x, (int, np.integer)):
            if product is None:
                raise ValueError("index paths need the product to resolve states")
            x = product.states[int(x)]
        out.append(x[0])
    return out


def dump_product(p: ProductGame) -> str:
    """Explicit game format with one ``color`` line per product state."""
    return dump_game(p, colors=p.color)
