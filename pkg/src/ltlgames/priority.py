"""
Priority game: a product game composed with a priority reward machine.

A state ``<x, j>`` pairs a product state with a priority.  Under action ``a``
the product part moves as in the product game while the priority moves
according to the machine fed with the color of the source product state, so
``P*(<x,j>, a, <x',j'>) = P(x, a, x') * theta(j, C(x), j')``.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .game import Arena, dump_game
from .prm import Prm
from .product import ProductGame

__all__ = [
    "PriorityGame",
    "build_priority",
    "priority_reward",
    "priority_discount",
    "discounted_return",
    "simulate_returns",
    "dump_priority",
]


class PriorityGame(Arena):
    """Reachable priority game.

    State identifiers are ``(product state id, j)``.

    Attributes
    ----------
    product : ProductGame
    prm : Prm
    x : ndarray of int
        Product-state index of each state.
    j : ndarray of int
        Priority of each state.
    reward : ndarray of float
        ``eps`` where ``j`` is positive and even, else 0.
    color : ndarray of int
        Color of the underlying product state.
    discount : float
        ``1 - eps``.
    """

    def __init__(self, product, prm, x, j, actions, dists, initial=0):
        states = [(product.states[a], int(b)) for a, b in zip(x, j)]
        super().__init__(states, product.controller[x], actions, dists, initial)
        self.product = product
        self.prm = prm
        self.x = np.asarray(x, dtype=np.int64)
        self.j = np.asarray(j, dtype=np.int64)
        self.reward = prm.rewards[self.j].copy()
        self.color = product.color[self.x].copy()
        self.epsilon = prm.epsilon
        self.discount = prm.discount
        self.labels = [product.labels[a] for a in self.x]
        self.ap = product.ap
        self._pair_index = {(int(a), int(b)): i for i, (a, b) in enumerate(zip(self.x, self.j))}

    def _x(self, x):
        if isinstance(x, (int, np.integer)):
            return int(x)
        return self.product.index.get(tuple(x), -1)

    def find(self, x, j: int) -> int:
        """Index of ``<x, j>``; ``x`` is a product index or a product state id."""
        return self._pair_index[(self._x(x), int(j))]

    def has(self, x, j: int) -> bool:
        return (self._x(x), int(j)) in self._pair_index

    def __repr__(self):
        return f"PriorityGame(states={self.n_states}, k={self.prm.k}, epsilon={self.epsilon})"


def build_priority(p: ProductGame, m: Prm) -> PriorityGame:
    """Forward-explore the priority game from ``<x0, 0>``."""
    if m.k < int(p.color.max()):
        raise ValueError(f"machine has k={m.k} but the product uses color {int(p.color.max())}")
    start = (p.initial, 0)
    index = {start: 0}
    order = [start]
    queue = deque([start])
    actions = []
    dists = []
    while queue:
        x, j = queue.popleft()
        jt, jp = m.transition_arrays(j, int(p.color[x]))
        acts = []
        ds = []
        for a, (t, pr) in zip(p.actions[x], p.dists[x]):
            succ = []
            prob = []
            for x2, q in zip(t.tolist(), pr.tolist()):
                for j2, r in zip(jt.tolist(), jp.tolist()):
                    key = (x2, j2)
                    if key not in index:
                        index[key] = len(order)
                        order.append(key)
                        queue.append(key)
                    succ.append(index[key])
                    prob.append(q * r)
            acts.append(a)
            ds.append((succ, prob))
        actions.append(acts)
        dists.append(ds)
    x = np.array([a for a, _ in order], dtype=np.int64)
    j = np.array([b for _, b in order], dtype=np.int64)
    return PriorityGame(p, m, x, j, actions, dists, 0)


def priority_reward(pg: PriorityGame, s) -> float:
    """``R*`` of a state given by index or by ``(product id, j)``."""
    if not isinstance(s, (int, np.integer)):
        s = pg.index[s]
    return float(pg.reward[int(s)])


def priority_discount(pg: PriorityGame) -> float:
    return pg.discount


def discounted_return(rewards, discount: float) -> float:
    """``sum_t discount**t * rewards[t]`` over a finite reward sequence."""
    r = np.asarray(rewards, dtype=float)
    return float(np.dot(discount ** np.arange(len(r)), r))


def simulate_returns(pg: PriorityGame, n_paths: int, horizon: int, rng: np.random.Generator,
                     choice=None):
    """Roll out ``n_paths`` paths of length ``horizon`` and return their truncated returns.

    Actions are uniform over the enabled ones unless ``choice`` (one action
    index per state) is given.  Paths are simulated together, one vectorized
    step at a time.

    Returns
    -------
    returns : ndarray, shape (n_paths,)
    bound : float
        ``(1 - eps) ** horizon``, the largest possible contribution of the
        truncated tail.
    """
    M = pg.matrix
    n_act = np.diff(M.row_ptr)
    s = np.full(n_paths, pg.initial, dtype=np.int64)
    g = np.zeros(n_paths)
    w = 1.0
    for _ in range(horizon):
        g += w * pg.reward[s]
        w *= pg.discount
        if choice is None:
            a = np.minimum((rng.random(n_paths) * n_act[s]).astype(np.int64), n_act[s] - 1)
        else:
            a = np.asarray(choice)[s]
        row = M.row_ptr[s] + a
        lo = M.P.indptr[row]
        hi = M.P.indptr[row + 1]
        u = rng.random(n_paths)
        nxt = np.empty(n_paths, dtype=np.int64)
        # rows have few entries; scan them in lockstep
        pos = lo.copy()
        done = np.zeros(n_paths, dtype=bool)
        while not done.all():
            hit = ~done & ((M.cum[pos] > u) | (pos == hi - 1))
            nxt[hit] = M.P.indices[pos[hit]]
            done |= hit
            pos = np.where(done, pos, pos + 1)
        s = nxt
    return g, pg.discount ** horizon


def dump_priority(pg: PriorityGame) -> str:
    """Explicit game format with ``reward`` lines and a ``discount`` header."""
    return dump_game(pg, ap=pg.ap, labels=pg.labels, rewards=pg.reward, discount=pg.discount)
