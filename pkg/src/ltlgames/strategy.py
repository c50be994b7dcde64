"""
Finite-memory strategies on stochastic games.

A strategy reads the current mode and state, picks an action distribution,
and moves to a new mode drawn from a distribution that depends on the same
pair.  Strategies induced from a priority game use the automaton state and the
priority as their mode ``(q, j)``: on leaving game state ``s`` the automaton
reads ``L(s)`` and the priority moves as the reward machine dictates for the
color of that step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import _as_choice, induce_mc, parity_best_response, reachable_bsccs
from .errors import FormatError
from .game import StochasticGame, state_token
from .priority import PriorityGame

__all__ = [
    "FiniteMemoryStrategy",
    "induce_strategy",
    "evaluate_worst_case",
    "worst_case_response",
    "simulate",
    "simulate_priority",
    "dump_strategy",
    "load_strategy",
    "mode_label",
    "attach_memory",
    "worst_case_chain",
]


def mode_label(q: int, j: int) -> str:
    return f"(q={q},j={j})"


@dataclass
class FiniteMemoryStrategy:
    """Finite-memory strategy of one player.

    Attributes
    ----------
    game : StochasticGame
    player : {"controller", "adversary"}
    modes : list of str
    initial : int
        Index of the initial mode.
    action : dict
        ``(mode, state) -> {action: prob}`` for the player's own states.
    update : dict
        ``(mode, state) -> (mode indices, probs)`` for every state.
    memory : tuple or None
        ``(dpa, prm)`` when the mode structure is the automaton-times-machine
        memory built by :func:`induce_strategy`.
    """

    game: StochasticGame
    player: str
    modes: list
    initial: int
    action: dict
    update: dict
    memory: tuple | None = None
    priority_game: PriorityGame | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.player not in ("controller", "adversary"):
            raise ValueError("player must be 'controller' or 'adversary'")
        n_modes = len(self.modes)
        if not 0 <= self.initial < n_modes:
            raise ValueError("initial mode out of range")
        mine = self.game.controller if self.player == "controller" else ~self.game.controller
        for (m, s), dist in self.action.items():
            if not 0 <= m < n_modes:
                raise ValueError(f"unknown mode {m}")
            if not mine[s]:
                raise ValueError(f"state {self.game.states[s]!r} is not owned by the {self.player}")
            if abs(sum(dist.values()) - 1.0) > 1e-12 or min(dist.values()) <= 0:
                raise ValueError(f"action distribution at ({self.modes[m]}, {self.game.states[s]!r}) is invalid")
            bad = set(dist).difference(self.game.actions[s])
            if bad:
                raise ValueError(f"actions {sorted(bad)} are not enabled in {self.game.states[s]!r}")
        for (m, s), (t, p) in self.update.items():
            if not 0 <= m < n_modes or (np.asarray(t) < 0).any() or (np.asarray(t) >= n_modes).any():
                raise ValueError("mode update references an unknown mode")
            if abs(float(np.sum(p)) - 1.0) > 1e-12:
                raise ValueError(f"mode update at ({self.modes[m]}, {self.game.states[s]!r}) does not sum to 1")

    def act(self, m: int, s: int) -> dict:
        try:
            return self.action[(m, s)]
        except KeyError:
            raise ValueError(f"strategy undefined at mode {self.modes[m]} in state {self.game.states[s]!r}") from None

    def next_mode(self, m: int, s: int, u: float) -> int:
        """Inverse-CDF draw of the next mode from a uniform ``u``."""
        try:
            t, p = self.update[(m, s)]
        except KeyError:
            raise ValueError(f"no mode update at mode {self.modes[m]} in state {self.game.states[s]!r}") from None
        c = np.cumsum(p)
        return int(t[min(int(np.searchsorted(c, u, side="right")), len(t) - 1)])


def induce_strategy(pg: PriorityGame, pair, d=None, m=None):
    """Turn a pure memoryless pair on the priority game into game strategies.

    Returns ``(controller, adversary)``, both with modes ``(q, j)`` over the
    automaton states and priorities occurring in ``pg``.
    """
    if d is not None and d is not pg.product.dpa:
        raise ValueError("automaton differs from the one the priority game was built with")
    if m is not None and (m.k != pg.prm.k or m.epsilon != pg.prm.epsilon):
        raise ValueError("reward machine differs from the one the priority game was built with")
    if pg.product.convention != "source":
        raise ValueError("strategy induction needs the source-label product")
    choice = _as_choice(pg, pair)
    prod = pg.product
    game = prod.game
    dpa = prod.dpa
    prm = pg.prm
    pairs = sorted({(int(prod.q[x]), int(j)) for x, j in zip(pg.x, pg.j)})
    mode_of = {qj: i for i, qj in enumerate(pairs)}
    labels = [mode_label(q, j) for q, j in pairs]
    acts = ({}, {})
    update = {}
    for i in range(pg.n_states):
        x = int(pg.x[i])
        s = int(prod.sg[x])
        q = int(prod.q[x])
        j = int(pg.j[i])
        mode = mode_of[(q, j)]
        a = game.actions[s][choice[i]]
        acts[0 if game.controller[s] else 1][(mode, s)] = {a: 1.0}
        q2, c = prod.automaton_step(s, q)
        jt, jp = prm.transition_arrays(j, c)
        update[(mode, s)] = (np.array([mode_of[(q2, int(j2))] for j2 in jt]), jp.copy())
    init = mode_of[(int(prod.q[pg.x[pg.initial]]), int(pg.j[pg.initial]))]
    ctrl = FiniteMemoryStrategy(game, "controller", labels, init, acts[0], update, (dpa, prm), pg)
    adv = FiniteMemoryStrategy(game, "adversary", labels, init, acts[1], dict(update), (dpa, prm), pg)
    return ctrl, adv


def _fold(strategy: FiniteMemoryStrategy, pg: PriorityGame) -> np.ndarray:
    """Choice array on ``pg`` playing the strategy at its own states (zeros elsewhere)."""
    prod = pg.product
    mode_of = {lab: i for i, lab in enumerate(strategy.modes)}
    mine = strategy.player == "controller"
    out = np.zeros(pg.n_states, dtype=np.int64)
    for i in range(pg.n_states):
        x = int(pg.x[i])
        s = int(prod.sg[x])
        if bool(prod.game.controller[s]) != mine:
            continue
        m = mode_of.get(mode_label(int(prod.q[x]), int(pg.j[i])))
        if m is None:
            raise ValueError(f"strategy has no mode for priority state {pg.states[i]!r}")
        dist = strategy.act(m, s)
        if len(dist) != 1:
            raise ValueError("only pure strategies can be folded into the game")
        out[i] = prod.game.action_index(s, next(iter(dist)))
    return out


def _check_memory(strategy, sg, d):
    if strategy.memory is None or strategy.priority_game is None:
        raise ValueError("strategy memory is not the automaton-times-machine structure")
    pg = strategy.priority_game
    if d is not None and d is not pg.product.dpa:
        raise ValueError("strategy memory was built from a different automaton")
    if sg is not None and sg is not pg.product.game:
        raise ValueError("strategy was built for a different game")
    return pg


def worst_case_response(sg, d, controller: FiniteMemoryStrategy):
    """Worst-case parity values and the adversary's optimal response on the priority game.

    The controller's memory is folded into the game, which leaves an MDP for
    the adversary over (state, automaton state, priority).  The adversary
    minimizes over its pure memoryless strategies of that MDP.
    """
    pg = _check_memory(controller, sg, d)
    if controller.player != "controller":
        raise ValueError("expected a controller strategy")
    return parity_best_response(pg, _fold(controller, pg), "adversary", colors=pg.color)


def evaluate_worst_case(sg, d, controller: FiniteMemoryStrategy) -> float:
    """Probability that the controller satisfies the task against its worst adversary."""
    v, _ = worst_case_response(sg, d, controller)
    return float(v[controller.priority_game.initial])


def attach_memory(strategy: FiniteMemoryStrategy, pg: PriorityGame) -> FiniteMemoryStrategy:
    """Re-bind a loaded strategy to the automaton-times-machine memory of ``pg``.

    The strategy's modes must be ``(q=..,j=..)`` labels of ``pg``; its game
    must have the same state ids as the game ``pg`` was built from.
    """
    game = pg.product.game
    if [state_token(x) for x in strategy.game.states] != [state_token(x) for x in game.states]:
        raise ValueError("strategy was written for a different game")
    known = {mode_label(int(pg.product.q[x]), int(j)) for x, j in zip(pg.x, pg.j)}
    missing = known.difference(strategy.modes)
    if missing:
        raise ValueError(f"strategy lacks modes {sorted(missing)[:3]}")
    return FiniteMemoryStrategy(game, strategy.player, list(strategy.modes), strategy.initial,
                                dict(strategy.action), dict(strategy.update),
                                (pg.product.dpa, pg.prm), pg)


def worst_case_chain(controller: FiniteMemoryStrategy):
    """Markov chain on the priority game under the controller and its worst adversary.

    Returns
    -------
    mc : MarkovChain
    bottom : list of frozenset
        BSCCs reachable from the initial state.
    values : ndarray
        Worst-case satisfaction probability per priority-game state.
    """
    pg = _check_memory(controller, None, None)
    v, choice = worst_case_response(None, None, controller)
    mc = induce_mc(pg, choice)
    return mc, reachable_bsccs(mc), v


def simulate(sg: StochasticGame, controller: FiniteMemoryStrategy, adversary: FiniteMemoryStrategy,
             steps: int, rng: np.random.Generator, start=None):
    """Roll out the game under two finite-memory strategies.

    Each step draws three uniforms: one for the action (when the mover's
    action distribution is not a point mass), one for the successor, one shared
    by both players' mode updates.  Sharing the mode draw keeps two strategies
    induced from the same priority game in the same mode.

    Returns
    -------
    dict with ``path`` (state ids), ``labels``, ``actions`` and ``modes``
    (pairs of controller and adversary mode labels), ``steps + 1`` states long.
    """
    s = sg.initial if start is None else (start if isinstance(start, (int, np.integer)) else sg.index[start])
    mc, ma = controller.initial, adversary.initial
    path = [sg.states[s]]
    labels = [sg.labels[s]]
    actions = []
    modes = [(controller.modes[mc], adversary.modes[ma])]
    for _ in range(steps):
        u_act, u_succ, u_mode = rng.random(3)
        mover = controller if sg.controller[s] else adversary
        dist = mover.act(mc if sg.controller[s] else ma, s)
        names = list(dist)
        if len(names) == 1:
            a = names[0]
        else:
            c = np.cumsum([dist[n] for n in names])
            a = names[min(int(np.searchsorted(c, u_act, side="right")), len(names) - 1)]
        t, p = sg.dists[s][sg.action_index(s, a)]
        c = np.cumsum(p)
        s2 = int(t[min(int(np.searchsorted(c, u_succ, side="right")), len(t) - 1)])
        mc = controller.next_mode(mc, s, u_mode)
        ma = adversary.next_mode(ma, s, u_mode)
        s = s2
        actions.append(a)
        path.append(sg.states[s])
        labels.append(sg.labels[s])
        modes.append((controller.modes[mc], adversary.modes[ma]))
    return {"path": path, "labels": labels, "actions": actions, "modes": modes}


def simulate_priority(pg: PriorityGame, pair, steps: int, rng: np.random.Generator):
    """Roll out a pure memoryless pair on the priority game with the same draws as :func:`simulate`.

    The successor is drawn in two parts: the product successor from the
    second uniform, then the priority from the third.
    """
    choice = _as_choice(pg, pair)
    prod = pg.product
    i = pg.initial
    path = [pg.states[i]]
    for _ in range(steps):
        _, u_succ, u_mode = rng.random(3)
        x = int(pg.x[i])
        t, p = prod.dists[x][choice[i]]
        c = np.cumsum(p)
        x2 = int(t[min(int(np.searchsorted(c, u_succ, side="right")), len(t) - 1)])
        jt, jp = pg.prm.transition_arrays(int(pg.j[i]), int(pg.color[i]))
        c = np.cumsum(jp)
        j2 = int(jt[min(int(np.searchsorted(c, u_mode, side="right")), len(jt) - 1)])
        i = pg.find(x2, j2)
        path.append(pg.states[i])
    return path


# ---------------------------------------------------------------------------
# text format

def dump_strategy(st: FiniteMemoryStrategy) -> str:
    """Serialize a strategy; the output is deterministic for a given strategy."""
    g = st.game
    lines = [f"strategy {st.player}", f"modes {len(st.modes)}"]
    lines += [f"mode {lab}" for lab in st.modes]
    lines.append(f"initial {st.modes[st.initial]}")
    for (m, s) in sorted(st.action):
        dist = st.action[(m, s)]
        for a in sorted(dist, key=g.actions[s].index):
            p = dist[a]
            suffix = "" if p == 1.0 else f" {p!r}"
            lines.append(f"mode {st.modes[m]} state {state_token(g.states[s])} action {a}{suffix}")
    for (m, s) in sorted(st.update):
        t, p = st.update[(m, s)]
        succ = " ".join(f"{st.modes[int(a)]}:{float(b)!r}" for a, b in zip(t, p))
        lines.append(f"next {st.modes[m]} state {state_token(g.states[s])} {succ}")
    return "\n".join(lines) + "\n"


def load_strategy(text: str, game: StochasticGame) -> FiniteMemoryStrategy:
    """Parse :func:`dump_strategy` output against ``game``.

    The result carries no automaton memory, so it can be simulated but not
    passed to :func:`evaluate_worst_case`.
    """
    by_token = {state_token(s): i for i, s in enumerate(game.states)}
    player = None
    modes = []
    initial = None
    action = {}
    update = {}

    def state(tok, lineno):
        if tok not in by_token:
            raise FormatError(f"line {lineno}: unknown state {tok!r}")
        return by_token[tok]

    mode_index = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split("#", 1)[0].split()
        if not tok:
            continue
        try:
            if tok[0] == "strategy":
                player = tok[1]
            elif tok[0] == "modes":
                int(tok[1])
            elif tok[0] == "mode" and len(tok) == 2:
                mode_index[tok[1]] = len(modes)
                modes.append(tok[1])
            elif tok[0] == "initial":
                initial = mode_index[tok[1]]
            elif tok[0] == "mode":
                m, s = mode_index[tok[1]], state(tok[3], lineno)
                p = float(tok[6]) if len(tok) > 6 else 1.0
                action.setdefault((m, s), {})[tok[5]] = p
            elif tok[0] == "next":
                m, s = mode_index[tok[1]], state(tok[3], lineno)
                t, p = [], []
                for item in tok[4:]:
                    lab, _, prob = item.rpartition(":")
                    t.append(mode_index[lab])
                    p.append(float(prob))
                update[(m, s)] = (np.array(t), np.array(p))
            else:
                raise FormatError(f"line {lineno}: unknown directive {tok[0]!r}")
        except (IndexError, KeyError, ValueError) as err:
            if isinstance(err, FormatError):
                raise
            raise FormatError(f"line {lineno}: malformed strategy line") from None
    if player is None or initial is None:
        raise FormatError("strategy header incomplete")
    try:
        return FiniteMemoryStrategy(game, player, modes, initial, action, update)
    except ValueError as err:
        raise FormatError(str(err)) from None
