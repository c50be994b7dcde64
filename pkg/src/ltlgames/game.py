"""
Turn-based stochastic games and the adversarial grid-world generator.

Every game-like object in the package (stochastic game, product game,
priority game) is an :class:`Arena`: an indexed state set with an owner per
state, a tuple of enabled actions per state and one sparse distribution per
enabled action.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import FormatError
from .ltl import make_label

__all__ = [
    "Arena",
    "StochasticGame",
    "load_game",
    "parse_game",
    "dump_game",
    "enabled_actions",
    "sample_successor",
    "GridSpec",
    "parse_grid",
    "load_grid",
    "build_gridworld",
    "DIRECTIONS",
    "ADVERSARY_ACTIONS",
]

PROB_TOL = 1e-12


class Arena:
    """Finite turn-based arena.

    Parameters
    ----------
    states : sequence of hashable
        State identifiers; position in the sequence is the state index.
    controller : sequence of bool
        ``True`` where the controller (maximizer) moves, ``False`` for the adversary.
    actions : sequence of tuple of str
        Enabled actions per state, in a fixed order (the tie-breaking order).
    dists : sequence of sequence of (succ, prob)
        ``dists[s][i]`` is the successor distribution of ``actions[s][i]`` as
        two aligned arrays of successor indices and probabilities.
    initial : int
    """

    def __init__(self, states, controller, actions, dists, initial=0):
        self.states = list(states)
        self.index = {s: i for i, s in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise ValueError("duplicate state identifiers")
        self.controller = np.asarray(controller, dtype=bool)
        self.actions = [tuple(a) for a in actions]
        self.dists = [[(np.asarray(t, dtype=np.int64), np.asarray(p, dtype=float)) for t, p in d] for d in dists]
        self.initial = int(initial)
        self._validate()

    def _validate(self):
        n = len(self.states)
        if not (len(self.controller) == len(self.actions) == len(self.dists) == n):
            raise ValueError("states, owners, actions and distributions must align")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        for s in range(n):
            if not self.actions[s]:
                raise ValueError(f"state {self.states[s]!r} has no enabled action")
            if len(self.actions[s]) != len(self.dists[s]):
                raise ValueError(f"state {self.states[s]!r}: one distribution per action required")
            if len(set(self.actions[s])) != len(self.actions[s]):
                raise ValueError(f"state {self.states[s]!r}: duplicate action names")
            for a, (t, p) in zip(self.actions[s], self.dists[s]):
                if len(t) == 0 or t.min() < 0 or t.max() >= n:
                    raise ValueError(f"state {self.states[s]!r}, action {a!r}: bad successor index")
                if (p <= 0).any() or (p > 1).any():
                    raise ValueError(f"state {self.states[s]!r}, action {a!r}: probabilities must lie in (0, 1]")
                if abs(math.fsum(p) - 1.0) > PROB_TOL:
                    raise ValueError(f"state {self.states[s]!r}, action {a!r}: probabilities sum to {math.fsum(p)!r}")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def is_controller(self, s: int) -> bool:
        return bool(self.controller[s])

    def enabled_actions(self, s: int) -> tuple:
        return self.actions[s]

    def action_index(self, s: int, a: str) -> int:
        try:
            return self.actions[s].index(a)
        except ValueError:
            raise ValueError(f"action {a!r} is not enabled in state {self.states[s]!r}") from None

    def distribution(self, s: int, a: str) -> dict:
        """Successor distribution ``{state index: probability}`` of ``a`` at ``s``."""
        t, p = self.dists[s][self.action_index(s, a)]
        return dict(zip(t.tolist(), p.tolist()))

    def sample_successor(self, s: int, a: str, rng: np.random.Generator) -> int:
        t, p = self.dists[s][self.action_index(s, a)]
        u = rng.random()
        return int(t[min(np.searchsorted(np.cumsum(p), u, side="right"), len(t) - 1)])

    def successors(self, s: int) -> set:
        return {int(x) for t, _ in self.dists[s] for x in t}

    def reachable(self, start: int | None = None) -> list[int]:
        """Indices reachable from ``start`` (default: the initial state) under any actions."""
        start = self.initial if start is None else start
        seen = {start}
        stack = [start]
        while stack:
            s = stack.pop()
            for x in self.successors(s):
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        return sorted(seen)

    @cached_property
    def matrix(self) -> "ArenaMatrix":
        return ArenaMatrix(self)


class ArenaMatrix:
    """Row-per-(state, action) sparse view used by the numeric solvers.

    Rows of state ``s`` are ``row_ptr[s]:row_ptr[s+1]`` in enabled-action order.
    """

    def __init__(self, arena: Arena):
        n = arena.n_states
        counts = np.array([len(a) for a in arena.actions], dtype=np.int64)
        self.row_ptr = np.concatenate([[0], np.cumsum(counts)])
        self.row_state = np.repeat(np.arange(n), counts)
        indptr = [0]
        idx = []
        val = []
        for s in range(n):
            for t, p in arena.dists[s]:
                idx.append(t)
                val.append(p)
                indptr.append(indptr[-1] + len(t))
        self.P = sp.csr_matrix((np.concatenate(val), np.concatenate(idx), np.array(indptr)),
                               shape=(int(self.row_ptr[-1]), n))
        self.controller = arena.controller.copy()
        # cumulative probabilities per row, for sampling
        self.cum = self.P.data.copy()
        for r in range(self.P.shape[0]):
            lo, hi = self.P.indptr[r], self.P.indptr[r + 1]
            self.cum[lo:hi] = np.cumsum(self.P.data[lo:hi])
            self.cum[hi - 1] = 1.0

    @property
    def n_rows(self):
        return self.P.shape[0]


class StochasticGame(Arena):
    """Labelled turn-based two-player stochastic game.

    ``ap`` is the proposition universe and ``labels[s]`` the label set of state ``s``.
    ``observed[s]`` says whether a specification automaton reads the label of
    ``s`` (all states by default; grid worlds hide their intermediate adversary
    states).  ``annotations`` keeps extra per-state lines (colors, rewards)
    read from files.
    """

    def __init__(self, states, controller, actions, dists, ap, labels, initial=0, annotations=None,
                 observed=None):
        super().__init__(states, controller, actions, dists, initial)
        self.ap = tuple(ap)
        self.labels = [make_label(l, self.ap) for l in labels]
        if len(self.labels) != self.n_states:
            raise ValueError("one label set per state required")
        self.observed = np.ones(self.n_states, dtype=bool) if observed is None else np.asarray(observed, dtype=bool)
        if self.observed.shape != (self.n_states,):
            raise ValueError("one observed flag per state required")
        self.annotations = annotations or {}

    def label(self, s: int) -> frozenset:
        return self.labels[s]

    def __repr__(self):
        return f"StochasticGame(states={self.n_states}, ap={list(self.ap)})"


def enabled_actions(g: Arena, s) -> tuple:
    """Enabled actions of state ``s`` (index or identifier)."""
    if not isinstance(s, (int, np.integer)):
        s = g.index[s]
    return g.enabled_actions(int(s))


def sample_successor(g: Arena, s, a: str, rng: np.random.Generator):
    """Sample a successor identifier of ``s`` under ``a``."""
    si = s if isinstance(s, (int, np.integer)) else g.index[s]
    return g.states[g.sample_successor(int(si), a, rng)]


# ---------------------------------------------------------------------------
# explicit text format

def parse_game(text: str) -> StochasticGame:
    """Parse the line-oriented game format.

    ::

        game
        ap a b c
        state s0 mu c          # id, owner (mu = controller, nu = adversary), labels
        init s0
        t s0 beta2 s1:0.1 s0:0.9
        unobserved s3 s4        # optional: labels hidden from the automaton

    ``color <state> <c>``, ``reward <state> <r>`` and ``discount <x>`` lines are
    kept in :attr:`StochasticGame.annotations`.
    """
    ap = None
    order = []
    owner = {}
    labels = {}
    init = None
    trans = {}
    annotations = {}
    hidden = set()
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        where = f"line {lineno}"
        if head == "game":
            seen_header = True
        elif head == "ap":
            ap = tuple(tok[1:])
        elif head == "state":
            if len(tok) < 3 or tok[2] not in ("mu", "nu"):
                raise FormatError(f"{where}: expected 'state <id> <mu|nu> [labels...]'")
            if tok[1] in owner:
                raise FormatError(f"{where}: duplicate state {tok[1]!r}")
            order.append(tok[1])
            owner[tok[1]] = tok[2] == "mu"
            labels[tok[1]] = tok[3:]
        elif head == "init":
            if len(tok) != 2:
                raise FormatError(f"{where}: expected 'init <id>'")
            init = tok[1]
        elif head == "t":
            if len(tok) < 4:
                raise FormatError(f"{where}: expected 't <state> <action> <succ>:<prob> ...'")
            s, a = tok[1], tok[2]
            if (s, a) in trans:
                raise FormatError(f"{where}: duplicate transition for state {s!r}, action {a!r}")
            dist = {}
            for item in tok[3:]:
                succ, sep, prob = item.rpartition(":")
                if not sep:
                    raise FormatError(f"{where}: malformed successor {item!r}")
                try:
                    p = float(prob)
                except ValueError:
                    raise FormatError(f"{where}: malformed probability {prob!r}") from None
                dist[succ] = dist.get(succ, 0.0) + p
            trans[(s, a)] = (dist, lineno)
        elif head in ("color", "reward"):
            if len(tok) != 3:
                raise FormatError(f"{where}: expected '{head} <state> <value>'")
            annotations.setdefault(head, {})[tok[1]] = float(tok[2]) if head == "reward" else int(tok[2])
        elif head == "discount":
            annotations["discount"] = float(tok[1])
        elif head == "unobserved":
            hidden.update(tok[1:])
        else:
            raise FormatError(f"{where}: unknown directive {head!r}")
    if not seen_header:
        raise FormatError("missing 'game' header")
    if ap is None:
        raise FormatError("missing 'ap' line")
    if not order:
        raise FormatError("game has no states")
    if init is None:
        raise FormatError("missing 'init' line")
    if init not in owner:
        raise FormatError(f"initial state {init!r} is not declared")
    index = {s: i for i, s in enumerate(order)}
    actions = [[] for _ in order]
    dists = [[] for _ in order]
    for (s, a), (dist, lineno) in trans.items():
        if s not in index:
            raise FormatError(f"line {lineno}: transition from undeclared state {s!r}")
        for succ, p in dist.items():
            if succ not in index:
                raise FormatError(f"line {lineno}: successor {succ!r} is not declared")
            if not 0 < p <= 1:
                raise FormatError(f"line {lineno}: probability {p!r} outside (0, 1]")
        total = math.fsum(dist.values())
        if abs(total - 1.0) > PROB_TOL:
            raise FormatError(f"line {lineno}: probabilities of state {s!r}, action {a!r} sum to {total!r}, not 1")
        actions[index[s]].append(a)
        dists[index[s]].append(([index[x] for x in dist], list(dist.values())))
    for s, acts in zip(order, actions):
        if not acts:
            raise FormatError(f"state {s!r} has no enabled action")
    for s, ls in labels.items():
        bad = set(ls).difference(ap)
        if bad:
            raise FormatError(f"state {s!r}: labels {sorted(bad)} are not declared in 'ap'")
    unknown = hidden.difference(index)
    if unknown:
        raise FormatError(f"unobserved states {sorted(unknown)} are not declared")
    return StochasticGame(order, [owner[s] for s in order], actions, dists, ap,
                          [labels[s] for s in order], index[init], annotations,
                          [s not in hidden for s in order])


def load_game(text_or_path) -> StochasticGame:
    """Load a game from a path or directly from text."""
    text = str(text_or_path)
    if "\n" not in text and not text.lstrip().startswith("game"):
        with open(text) as fh:
            text = fh.read()
    return parse_game(text)


def state_token(s) -> str:
    """Whitespace-free string form of a state identifier, used in all file formats."""
    if isinstance(s, tuple):
        return "|".join(state_token(x) for x in s)
    return str(s)


def dump_game(g: Arena, *, ap=None, labels=None, colors=None, rewards=None, discount=None) -> str:
    """Write any arena in the explicit game format."""
    ap = tuple(getattr(g, "ap", ()) if ap is None else ap)
    if labels is None:
        labels = getattr(g, "labels", None) or [frozenset()] * g.n_states
    lines = ["game", "ap " + " ".join(ap)]
    if discount is not None:
        lines.append(f"discount {discount!r}")
    names = [state_token(s) for s in g.states]
    for s in range(g.n_states):
        owner = "mu" if g.controller[s] else "nu"
        lines.append(" ".join(["state", names[s], owner] + sorted(labels[s])))
    lines.append(f"init {names[g.initial]}")
    observed = getattr(g, "observed", None)
    if observed is not None and not observed.all():
        lines.append("unobserved " + " ".join(names[s] for s in np.flatnonzero(~observed)))
    for s in range(g.n_states):
        for a, (t, p) in zip(g.actions[s], g.dists[s]):
            succ = " ".join(f"{names[x]}:{q!r}" for x, q in zip(t.tolist(), p.tolist()))
            lines.append(f"t {names[s]} {a} {succ}")
    if colors is not None:
        lines += [f"color {names[s]} {int(colors[s])}" for s in range(g.n_states)]
    if rewards is not None:
        lines += [f"reward {names[s]} {float(rewards[s])!r}" for s in range(g.n_states)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# grid worlds

# row 0 is the bottom row; "up" increases the row index
DIRECTIONS = ("up", "down", "right", "left")
ADVERSARY_ACTIONS = ("none", "cw", "ccw", "both")
_OFFSET = {"up": (1, 0), "down": (-1, 0), "right": (0, 1), "left": (0, -1)}
_CW = {"up": "right", "right": "down", "down": "left", "left": "up"}
_CCW = {v: k for k, v in _CW.items()}


@dataclass
class GridSpec:
    """Grid layout: ``width`` columns, ``height`` rows, cells addressed ``(row, col)``.

    ``blocked`` decides where a perturbation toward an obstacle or edge goes:
    ``"stay"`` keeps the robot in its cell, ``"redistribute"`` renormalizes the
    remaining outcomes.
    """

    width: int
    height: int
    obstacles: set = field(default_factory=set)
    labels: dict = field(default_factory=dict)
    initial: tuple = (0, 0)
    blocked: str = "stay"
    name: str = "grid"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be at least 1")
        self.obstacles = {tuple(c) for c in self.obstacles}
        self.labels = {tuple(c): frozenset(v) for c, v in self.labels.items()}
        self.initial = tuple(self.initial)
        for c in [self.initial, *self.obstacles, *self.labels]:
            if not self.inside(c):
                raise ValueError(f"cell {c} lies outside the {self.height}x{self.width} grid")
        if self.initial in self.obstacles:
            raise ValueError("the initial cell is an obstacle")
        both = self.obstacles.intersection(c for c, v in self.labels.items() if v)
        if both:
            raise ValueError(f"labelled cells {sorted(both)} are obstacles")
        if self.blocked not in ("stay", "redistribute"):
            raise ValueError("blocked must be 'stay' or 'redistribute'")

    def inside(self, c) -> bool:
        return 0 <= c[0] < self.height and 0 <= c[1] < self.width

    def free(self, c) -> bool:
        return self.inside(c) and c not in self.obstacles

    def neighbor(self, c, direction):
        dr, dc = _OFFSET[direction]
        return (c[0] + dr, c[1] + dc)

    @property
    def ap(self) -> tuple:
        return tuple(sorted(set().union(*self.labels.values()))) if self.labels else ()

    def cells(self):
        return [(r, c) for r in range(self.height) for c in range(self.width) if (r, c) not in self.obstacles]


def parse_grid(text: str) -> GridSpec:
    """Parse a grid block (``grid W H``, ``obstacle r c``, ``label r c p...``, ``init r c``)."""
    spec = {"obstacles": set(), "labels": {}}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "grid":
                spec["width"], spec["height"] = int(tok[1]), int(tok[2])
            elif tok[0] == "obstacle":
                spec["obstacles"].add((int(tok[1]), int(tok[2])))
            elif tok[0] == "label":
                cell = (int(tok[1]), int(tok[2]))
                spec["labels"][cell] = spec["labels"].get(cell, frozenset()) | frozenset(tok[3:])
            elif tok[0] == "init":
                spec["initial"] = (int(tok[1]), int(tok[2]))
            elif tok[0] == "blocked":
                spec["blocked"] = tok[1]
            elif tok[0] == "name":
                spec["name"] = tok[1]
            else:
                raise FormatError(f"line {lineno}: unknown directive {tok[0]!r}")
        except (IndexError, ValueError) as err:
            if isinstance(err, FormatError):
                raise
            raise FormatError(f"line {lineno}: malformed grid line {line!r}") from None
    if "width" not in spec:
        raise FormatError("missing 'grid W H' line")
    try:
        return GridSpec(**spec)
    except ValueError as err:
        raise FormatError(str(err)) from None


def load_grid(path) -> GridSpec:
    with open(path) as fh:
        return parse_grid(fh.read())


def cell_id(c) -> str:
    return f"r{c[0]}c{c[1]}"


def build_gridworld(g: GridSpec) -> StochasticGame:
    """Turn-based encoding of the adversarial grid world.

    Controller states are free cells, adversary states are ``(cell, intended
    direction)`` pairs labelled like their cell.  Adversary states are marked
    unobserved, so an automaton reads one letter per cell visit.  The
    controller may only aim at free neighbours; the adversary then picks ``none`` (intended move w.p. 1),
    ``cw``/``ccw`` (0.8 intended, 0.2 rotated by 90 degrees) or ``both`` (0.8
    intended, 0.1 to each perpendicular side).
    """
    cells = g.cells()
    states = []
    controller = []
    labels = []
    for c in cells:
        states.append(cell_id(c))
        controller.append(True)
        labels.append(g.labels.get(c, frozenset()))
    moves = {}
    for c in cells:
        moves[c] = [d for d in DIRECTIONS if g.free(g.neighbor(c, d))]
        if not moves[c]:
            raise ValueError(f"cell {c} has no free neighbour")
        for d in moves[c]:
            states.append(f"{cell_id(c)}^{d}")
            controller.append(False)
            labels.append(g.labels.get(c, frozenset()))
    index = {s: i for i, s in enumerate(states)}
    actions = [None] * len(states)
    dists = [None] * len(states)
    for c in cells:
        s = index[cell_id(c)]
        actions[s] = tuple(moves[c])
        dists[s] = [([index[f"{cell_id(c)}^{d}"]], [1.0]) for d in moves[c]]
        for d in moves[c]:
            s_adv = index[f"{cell_id(c)}^{d}"]
            acts = []
            ds = []
            for act in ADVERSARY_ACTIONS:
                outcome = _perturbed(g, c, d, act)
                acts.append(act)
                ds.append(([index[cell_id(x)] for x in outcome], list(outcome.values())))
            actions[s_adv] = tuple(acts)
            dists[s_adv] = ds
    return StochasticGame(states, controller, actions, dists, g.ap, labels, index[cell_id(g.initial)],
                          observed=controller)


def _perturbed(g: GridSpec, c, d, act) -> dict:
    intended = g.neighbor(c, d)
    if act == "none":
        parts = [(intended, 1.0)]
    elif act == "cw":
        parts = [(intended, 0.8), (g.neighbor(c, _CW[d]), 0.2)]
    elif act == "ccw":
        parts = [(intended, 0.8), (g.neighbor(c, _CCW[d]), 0.2)]
    else:
        parts = [(intended, 0.8), (g.neighbor(c, _CW[d]), 0.1), (g.neighbor(c, _CCW[d]), 0.1)]
    out = {}
    if g.blocked == "stay":
        for cell, p in parts:
            cell = cell if g.free(cell) else c
            out[cell] = out.get(cell, 0.0) + p
    else:
        ok = [(cell, p) for cell, p in parts if g.free(cell)]
        total = math.fsum(p for _, p in ok)
        for cell, p in ok:
            out[cell] = out.get(cell, 0.0) + p / total
    return out
