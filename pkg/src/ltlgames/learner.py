"""
Tabular minimax-Q learning on priority games.

One Q-table over (state, enabled action) serves both players: the controller
acts greedily by max, the adversary by min, and both explore at the same rate.
Random numbers come from a counter-based Philox generator seeded once per run,
so a run is reproducible bit for bit across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from numba import njit

from .analysis import PureMemorylessStrategyPair, discounted_value_pair, greedy_choice
from .game import state_token

__all__ = [
    "LearnSchedule",
    "QTable",
    "LearnResult",
    "minimax_q_train",
    "greedy_strategy",
    "schedule_values",
    "make_rng",
]


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide generator: Philox-4x64 keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass
class LearnSchedule:
    """Episode structure and rate schedules.

    The learning rate and the exploration rate decay from their start to their
    end values over the first ``decay_fraction`` of the episodes and stay flat
    afterwards.  The first ``random_start_episodes`` episodes start in a
    uniformly drawn state, the remaining ones in the initial state.
    """

    episodes: int = 131072
    steps: int = 8192
    alpha_start: float = 0.5
    alpha_end: float = 0.05
    explore_start: float = 0.5
    explore_end: float = 0.05
    random_start_episodes: int = 122880
    seed: int = 0
    decay: str = "linear"
    decay_fraction: float = 0.9
    curve_interval: int = 0

    def __post_init__(self):
        for name in ("alpha_start", "alpha_end", "explore_start", "explore_end"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")
        if self.episodes < 1 or self.steps < 1:
            raise ValueError("episodes and steps must be positive")
        if not 0 <= self.random_start_episodes <= self.episodes:
            raise ValueError("random_start_episodes must lie between 0 and episodes")
        if self.decay not in ("linear", "exponential"):
            raise ValueError("decay must be 'linear' or 'exponential'")
        if not 0.0 < self.decay_fraction <= 1.0:
            raise ValueError("decay_fraction must lie in (0, 1]")
        if self.curve_interval < 0:
            raise ValueError("curve_interval must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def schedule_values(start: float, end: float, episodes: int, decay: str = "linear",
                    fraction: float = 0.9) -> np.ndarray:
    """Per-episode rate: decays from ``start`` to ``end`` over ``fraction`` of the run."""
    n_decay = max(1, int(round(fraction * episodes)))
    t = np.minimum(np.arange(episodes) / n_decay, 1.0)
    if decay == "linear":
        return start + (end - start) * t
    return start * (end / start) ** t


@dataclass
class QTable:
    """Q-values, one per row (state, enabled action) of a priority game."""

    game: object
    values: np.ndarray

    def get(self, s, a) -> float:
        if not isinstance(s, (int, np.integer)):
            s = self.game.index[s]
        return float(self.values[self.game.matrix.row_ptr[s] + self.game.action_index(int(s), a)])

    def to_csv(self) -> str:
        g = self.game
        lines = ["state,action,value"]
        for s in range(g.n_states):
            sid = state_token(g.states[s])
            for i, a in enumerate(g.actions[s]):
                lines.append(f"{sid},{a},{float(self.values[g.matrix.row_ptr[s] + i])!r}")
        return "\n".join(lines) + "\n"


@dataclass
class LearnResult:
    q: QTable
    choice: np.ndarray
    curve: list = field(default_factory=list)
    schedule: LearnSchedule | None = None


@njit(cache=True)
def _train_block(Q, indptr, indices, cum, row_ptr, ctrl, reward, gamma, starts, alphas, explores, U):
    n_ep, T = U.shape[0], U.shape[1]
    for e in range(n_ep):
        s = starts[e]
        alpha = alphas[e]
        ex = explores[e]
        for t in range(T):
            lo = row_ptr[s]
            na = row_ptr[s + 1] - lo
            if U[e, t, 0] < ex:
                a = int(U[e, t, 1] * na)
                if a >= na:
                    a = na - 1
            else:
                a = 0
                best = Q[lo]
                if ctrl[s]:
                    for i in range(1, na):
                        if Q[lo + i] > best:
                            best = Q[lo + i]
                            a = i
                else:
                    for i in range(1, na):
                        if Q[lo + i] < best:
                            best = Q[lo + i]
                            a = i
            r = lo + a
            u = U[e, t, 2]
            k = indptr[r]
            last = indptr[r + 1] - 1
            while k < last and cum[k] <= u:
                k += 1
            s2 = indices[k]
            lo2 = row_ptr[s2]
            opt = Q[lo2]
            if ctrl[s2]:
                for i in range(lo2 + 1, row_ptr[s2 + 1]):
                    if Q[i] > opt:
                        opt = Q[i]
            else:
                for i in range(lo2 + 1, row_ptr[s2 + 1]):
                    if Q[i] < opt:
                        opt = Q[i]
            Q[r] = (1.0 - alpha) * Q[r] + alpha * reward[s] + alpha * gamma * opt
            s = s2


def _block_size(steps: int) -> int:
    return max(1, min(4096, (1 << 22) // max(1, 3 * steps)))


def minimax_q_train(pg, sch: LearnSchedule, q0=None) -> LearnResult:
    """Run minimax-Q on a priority game.

    Each step explores with the current rate (a uniform enabled action) and
    otherwise acts greedily, samples the successor and applies
    ``Q(s,a) <- (1-alpha) Q(s,a) + alpha R(s) + alpha (1-eps) opt_a' Q(s',a')``.

    If ``sch.curve_interval`` is positive, the greedy pair is evaluated
    exactly every that many episodes; the curve holds ``(episode, value at the
    initial state)`` pairs.
    """
    M = pg.matrix
    Q = np.zeros(M.n_rows) if q0 is None else np.array(q0, dtype=float)
    alphas = schedule_values(sch.alpha_start, sch.alpha_end, sch.episodes, sch.decay, sch.decay_fraction)
    explores = schedule_values(sch.explore_start, sch.explore_end, sch.episodes, sch.decay, sch.decay_fraction)
    rng = make_rng(sch.seed)
    args = (M.P.indptr.astype(np.int64), M.P.indices.astype(np.int64), M.cum,
            M.row_ptr.astype(np.int64), pg.controller.copy(), np.asarray(pg.reward, dtype=float), float(pg.discount))
    block = _block_size(sch.steps)
    if sch.curve_interval:
        block = min(block, sch.curve_interval)
    curve = []
    e = 0
    while e < sch.episodes:
        n = min(block, sch.episodes - e)
        if sch.curve_interval:
            n = min(n, sch.curve_interval - e % sch.curve_interval)
        starts = np.full(n, pg.initial, dtype=np.int64)
        rnd = np.arange(e, e + n) < sch.random_start_episodes
        starts[rnd] = rng.integers(0, pg.n_states, size=int(rnd.sum()))
        U = rng.random((n, sch.steps, 3))
        _train_block(Q, *args, starts, alphas[e:e + n], explores[e:e + n], U)
        e += n
        if sch.curve_interval and e % sch.curve_interval == 0:
            ch = greedy_choice(pg, Q, tie=0.0)
            curve.append((e, float(discounted_value_pair(pg, ch)[pg.initial])))
    choice = greedy_choice(pg, Q, tie=0.0)
    return LearnResult(QTable(pg, Q), choice, curve, sch)


def greedy_strategy(q: QTable) -> PureMemorylessStrategyPair:
    """Argmax at controller states, argmin at adversary states, ties to the lowest index."""
    return PureMemorylessStrategyPair.from_choice(q.game, greedy_choice(q.game, q.values, tie=0.0))


def curve_csv(curve) -> str:
    lines = ["episode,value_estimate"] + [f"{e},{v!r}" for e, v in curve]
    return "\n".join(lines) + "\n"
