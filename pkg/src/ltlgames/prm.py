"""
Priority reward machine.

Priorities are the integers ``0..k``.  From priority 0 the machine leaves for
priority 1 with probability ``sqrt(eps)``, whatever color is seen.  From ``j >= 1``
a color ``c > j`` moves it to ``c`` for sure; otherwise it stays w.p. ``1 - eps``
and drops to 1 w.p. ``eps`` (the two masses coincide when ``j = 1``).  Reward
``eps`` is emitted in positive even priorities.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Prm", "prm_transition", "prm_reward"]


def _split(p: float) -> tuple[float, float]:
    """Return ``(1 - p, p')`` with ``p' ~= p`` and the two summing to exactly 1.0."""
    stay = 1.0 - p
    return stay, 1.0 - stay


class Prm:
    """Priority reward machine with ``k`` colors and parameter ``epsilon``.

    Attributes
    ----------
    table : ndarray, shape (k + 1, k + 1, k + 1)
        ``table[j, c, j2]`` is the probability of moving from ``j`` to ``j2``
        after seeing color ``c``.  Row ``c = 0`` is unused and left zero.
    rewards : ndarray, shape (k + 1,)
    """

    def __init__(self, k: int, epsilon: float):
        if int(k) != k or k < 1:
            raise ValueError("k must be a positive integer")
        if not 0.0 < epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        self.k = int(k)
        self.epsilon = float(epsilon)
        self.sqrt_epsilon = math.sqrt(self.epsilon)
        k = self.k
        stay0, leave0 = _split(self.sqrt_epsilon)
        stay, drop = _split(self.epsilon)
        table = np.zeros((k + 1, k + 1, k + 1))
        for c in range(1, k + 1):
            table[0, c, 0] += stay0
            table[0, c, 1] += leave0
            for j in range(1, k + 1):
                if j >= c:
                    table[j, c, j] += stay
                    table[j, c, 1] += drop
                else:
                    table[j, c, c] = 1.0
        table.setflags(write=False)
        self.table = table
        rewards = np.array([self.epsilon if j >= 2 and j % 2 == 0 else 0.0 for j in range(k + 1)])
        rewards.setflags(write=False)
        self.rewards = rewards
        self._dists = {(j, c): self._sparse(j, c) for j in range(k + 1) for c in range(1, k + 1)}

    def _sparse(self, j, c):
        row = self.table[j, c]
        nz = np.flatnonzero(row)
        return nz, row[nz]

    def _check(self, j, c):
        if not 0 <= j <= self.k:
            raise ValueError(f"priority {j} outside 0..{self.k}")
        if not 1 <= c <= self.k:
            raise ValueError(f"color {c} outside 1..{self.k}")

    def transition(self, j: int, c: int) -> dict:
        """Distribution ``{j2: prob}`` over next priorities."""
        self._check(j, c)
        t, p = self._dists[(j, c)]
        return dict(zip(t.tolist(), p.tolist()))

    def transition_arrays(self, j: int, c: int):
        self._check(j, c)
        return self._dists[(j, c)]

    def reward(self, j: int) -> float:
        if not 0 <= j <= self.k:
            raise ValueError(f"priority {j} outside 0..{self.k}")
        return float(self.rewards[j])

    @property
    def discount(self) -> float:
        return 1.0 - self.epsilon

    def __repr__(self):
        return f"Prm(k={self.k}, epsilon={self.epsilon})"


def prm_transition(m: Prm, j: int, c: int) -> dict:
    return m.transition(j, c)


def prm_reward(m: Prm, j: int) -> float:
    return m.reward(j)
