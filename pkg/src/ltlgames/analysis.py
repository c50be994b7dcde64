"""
Exact analysis of small games: induced Markov chains, bottom SCCs,
reachability, maximin parity values and discounted minimax values.

Strategies are handled internally as *choice arrays*: one enabled-action
index per state, in the arena's action order.  :class:`PureMemorylessStrategyPair`
is the named form used at API boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.sparse import csgraph
from scipy.sparse.linalg import spsolve

from .errors import CapExceeded
from .game import Arena

__all__ = [
    "MarkovChain",
    "PureMemorylessStrategyPair",
    "induce_mc",
    "bsccs",
    "reachable_bsccs",
    "bscc_labels",
    "classify_bscc",
    "reach_prob",
    "parity_prob",
    "evaluate_pair",
    "count_pairs",
    "ParityResult",
    "parity_value_exact",
    "all_pair_values",
    "parity_best_response",
    "worst_case_value",
    "maximin_bounds",
    "discounted_value_vi",
    "discounted_value_pair",
    "greedy_choice",
    "lift_choice",
    "bscc_bijection_check",
    "values_csv",
]

DENSE_LIMIT = 2000
SOLVE_TOL = 1e-12


# ---------------------------------------------------------------------------
# chains and strategies

@dataclass
class MarkovChain:
    """Finite Markov chain with a sparse row-stochastic matrix ``P``.

    ``color`` and ``reward`` are optional per-state annotations carried over
    from the arena the chain was induced from.
    """

    states: list
    P: sp.csr_matrix
    initial: int = 0
    color: np.ndarray | None = None
    reward: np.ndarray | None = None

    def __post_init__(self):
        self.P = sp.csr_matrix(self.P)
        n = len(self.states)
        if self.P.shape != (n, n):
            raise ValueError("transition matrix does not match the state list")
        sums = np.asarray(self.P.sum(axis=1)).ravel()
        bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-12)
        if len(bad):
            raise ValueError(f"row of state {self.states[bad[0]]!r} sums to {sums[bad[0]]!r}")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def distribution(self, s: int) -> dict:
        lo, hi = self.P.indptr[s], self.P.indptr[s + 1]
        return dict(zip(self.P.indices[lo:hi].tolist(), self.P.data[lo:hi].tolist()))


@dataclass(frozen=True)
class PureMemorylessStrategyPair:
    """One action per controller state and one per adversary state, keyed by state id."""

    controller: dict
    adversary: dict

    @classmethod
    def from_choice(cls, arena: Arena, choice) -> "PureMemorylessStrategyPair":
        ctrl = {}
        adv = {}
        for s, c in enumerate(np.asarray(choice).tolist()):
            (ctrl if arena.controller[s] else adv)[arena.states[s]] = arena.actions[s][c]
        return cls(ctrl, adv)

    def choice(self, arena: Arena) -> np.ndarray:
        out = np.empty(arena.n_states, dtype=np.int64)
        for s, sid in enumerate(arena.states):
            table = self.controller if arena.controller[s] else self.adversary
            if sid not in table:
                raise ValueError(f"strategy pair does not map state {sid!r}")
            out[s] = arena.action_index(s, table[sid])
        return out


def _as_choice(arena, pair):
    if isinstance(pair, PureMemorylessStrategyPair):
        return pair.choice(arena)
    choice = np.asarray(pair, dtype=np.int64)
    n_act = np.diff(arena.matrix.row_ptr)
    if choice.shape != (arena.n_states,) or (choice < 0).any() or (choice >= n_act).any():
        raise ValueError("choice array must hold one enabled action index per state")
    return choice


def induce_mc(arena: Arena, pair) -> MarkovChain:
    """Markov chain obtained by fixing one action per state."""
    choice = _as_choice(arena, pair)
    M = arena.matrix
    P = M.P[M.row_ptr[:-1] + choice]
    return MarkovChain(list(arena.states), P, arena.initial,
                       getattr(arena, "color", None), getattr(arena, "reward", None))


def bscc_labels(P) -> np.ndarray:
    """Per-state BSCC id (0, 1, ...) or -1 for transient states."""
    P = sp.csr_matrix(P)
    n = P.shape[0]
    _, comp = csgraph.connected_components(P, directed=True, connection="strong")
    rows = np.repeat(np.arange(n), np.diff(P.indptr))
    leaving = comp[rows] != comp[P.indices]
    open_comp = np.zeros(comp.max() + 1, dtype=bool)
    open_comp[comp[rows[leaving]]] = True
    out = np.full(n, -1, dtype=np.int64)
    closed = ~open_comp[comp]
    # renumber closed components by their smallest member
    ids = {}
    for s in np.flatnonzero(closed).tolist():
        out[s] = ids.setdefault(int(comp[s]), len(ids))
    return out


def bsccs(mc: MarkovChain) -> list[frozenset]:
    """Bottom strongly connected components, ordered by their smallest state index."""
    lab = bscc_labels(mc.P)
    return [frozenset(np.flatnonzero(lab == b).tolist()) for b in range(lab.max() + 1)]


def reachable_bsccs(mc: MarkovChain, start=None) -> list[frozenset]:
    """BSCCs reachable from ``start`` (the chain's initial state by default)."""
    start = mc.initial if start is None else start
    seen = csgraph.breadth_first_order(mc.P, int(start), directed=True, return_predecessors=False)
    lab = bscc_labels(mc.P)
    hit = np.unique(lab[seen])
    return [frozenset(np.flatnonzero(lab == b).tolist()) for b in hit[hit >= 0].tolist()]


def classify_bscc(mc: MarkovChain, B) -> str:
    """``"accepting"`` if the largest color in ``B`` is even, else ``"rejecting"``."""
    if mc.color is None:
        raise ValueError("chain carries no colors")
    top = int(mc.color[list(B)].max())
    return "accepting" if top % 2 == 0 else "rejecting"


def _backward_reach(P: sp.csr_matrix, mask: np.ndarray) -> np.ndarray:
    """States with a path (length >= 0) into ``mask``."""
    n = P.shape[0]
    if not mask.any():
        return np.zeros(n, dtype=bool)
    # reverse graph plus a virtual source pointing at every target
    src = np.flatnonzero(mask)
    R = sp.csr_matrix(P.T)
    R = sp.vstack([sp.hstack([R, sp.csr_matrix((n, 1))]),
                   sp.csr_matrix((np.ones(len(src)), (np.zeros(len(src), dtype=int), src)), shape=(1, n + 1))])
    order = csgraph.breadth_first_order(sp.csr_matrix(R), n, directed=True, return_predecessors=False)
    out = np.zeros(n + 1, dtype=bool)
    out[order] = True
    return out[:n]


def _solve(A, b):
    if A.shape[0] <= DENSE_LIMIT:
        return np.linalg.solve(A.toarray() if sp.issparse(A) else A, b)
    return spsolve(sp.csc_matrix(A), b)


def reach_prob(mc: MarkovChain, target) -> np.ndarray:
    """Probability of eventually visiting ``target`` from every state."""
    n = mc.n_states
    tmask = np.zeros(n, dtype=bool)
    tmask[list(target) if not isinstance(target, np.ndarray) or target.dtype != bool else np.flatnonzero(target)] = True
    P = mc.P
    can = _backward_reach(P, tmask)
    zero = ~can
    # states that can reach a zero state while avoiding the target
    Pcut = sp.csr_matrix(P.multiply((~tmask)[:, None]))
    Pcut.eliminate_zeros()
    one = ~_backward_reach(Pcut, zero) & can
    x = np.zeros(n)
    x[one] = 1.0
    rest = np.flatnonzero(~one & ~zero)
    if len(rest):
        A = sp.identity(len(rest), format="csr") - P[rest][:, rest]
        b = np.asarray(P[rest][:, np.flatnonzero(one)].sum(axis=1)).ravel()
        sol = _solve(A, b)
        res = np.abs(A @ sol - b).max()
        if not np.isfinite(res) or res > 1e-9:
            raise np.linalg.LinAlgError(f"reachability system is ill-conditioned (residual {res:.3g})")
        x[rest] = np.clip(sol, 0.0, 1.0)
    return x


def parity_prob(mc: MarkovChain) -> np.ndarray:
    """Probability of satisfying the max-even parity condition from every state."""
    lab = bscc_labels(mc.P)
    acc = np.zeros(mc.n_states, dtype=bool)
    for b in range(lab.max() + 1):
        members = lab == b
        if mc.color[members].max() % 2 == 0:
            acc |= members
    return reach_prob(mc, acc)


def evaluate_pair(arena: Arena, pair, colors=None) -> np.ndarray:
    """Parity satisfaction probability from every state under a fixed pair."""
    mc = induce_mc(arena, pair)
    if colors is not None:
        mc.color = np.asarray(colors)
    return parity_prob(mc)


# ---------------------------------------------------------------------------
# compiled pair evaluation and exhaustive maximin

@njit(cache=True)
def _pair_value(indptr, indices, data, row_ptr, choice, color, start):
    n = len(row_ptr) - 1
    # states reachable from start under the pair
    loc = np.full(n, -1, np.int64)
    glob = np.empty(n, np.int64)
    m = 0
    stack = np.empty(n, np.int64)
    sp_ = 0
    loc[start] = 0
    glob[0] = start
    m = 1
    stack[0] = start
    sp_ = 1
    while sp_ > 0:
        sp_ -= 1
        s = stack[sp_]
        r = row_ptr[s] + choice[s]
        for e in range(indptr[r], indptr[r + 1]):
            t = indices[e]
            if loc[t] < 0:
                loc[t] = m
                glob[m] = t
                m += 1
                stack[sp_] = t
                sp_ += 1
    # iterative Tarjan on the reachable part
    idx = np.full(m, -1, np.int64)
    low = np.zeros(m, np.int64)
    onst = np.zeros(m, np.bool_)
    st = np.empty(m, np.int64)
    stn = 0
    comp = np.full(m, -1, np.int64)
    ncomp = 0
    call = np.empty(m, np.int64)
    edge = np.empty(m, np.int64)
    counter = 0
    for root in range(m):
        if idx[root] >= 0:
            continue
        depth = 0
        call[0] = root
        r0 = row_ptr[glob[root]] + choice[glob[root]]
        edge[0] = indptr[r0]
        idx[root] = counter
        low[root] = counter
        counter += 1
        st[stn] = root
        stn += 1
        onst[root] = True
        while depth >= 0:
            v = call[depth]
            rv = row_ptr[glob[v]] + choice[glob[v]]
            if edge[depth] < indptr[rv + 1]:
                w = loc[indices[edge[depth]]]
                edge[depth] += 1
                if idx[w] < 0:
                    idx[w] = counter
                    low[w] = counter
                    counter += 1
                    st[stn] = w
                    stn += 1
                    onst[w] = True
                    depth += 1
                    call[depth] = w
                    rw = row_ptr[glob[w]] + choice[glob[w]]
                    edge[depth] = indptr[rw]
                elif onst[w]:
                    if idx[w] < low[v]:
                        low[v] = idx[w]
            else:
                if low[v] == idx[v]:
                    while True:
                        stn -= 1
                        w = st[stn]
                        onst[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
                depth -= 1
                if depth >= 0:
                    u = call[depth]
                    if low[v] < low[u]:
                        low[u] = low[v]
    # bottom components and their parity
    bottom = np.ones(ncomp, np.bool_)
    top = np.zeros(ncomp, np.int64)
    for v in range(m):
        g = glob[v]
        if color[g] > top[comp[v]]:
            top[comp[v]] = color[g]
        r = row_ptr[g] + choice[g]
        for e in range(indptr[r], indptr[r + 1]):
            if comp[loc[indices[e]]] != comp[v]:
                bottom[comp[v]] = False
    c0 = comp[0]
    if bottom[c0]:
        return 1.0 if top[c0] % 2 == 0 else 0.0
    # transient states solve x = P_TT x + P_T,acc 1
    tid = np.full(m, -1, np.int64)
    nt = 0
    for v in range(m):
        if not bottom[comp[v]]:
            tid[v] = nt
            nt += 1
    A = np.eye(nt)
    b = np.zeros(nt)
    for v in range(m):
        i = tid[v]
        if i < 0:
            continue
        g = glob[v]
        r = row_ptr[g] + choice[g]
        for e in range(indptr[r], indptr[r + 1]):
            w = loc[indices[e]]
            if tid[w] >= 0:
                A[i, tid[w]] -= data[e]
            elif top[comp[w]] % 2 == 0:
                b[i] += data[e]
    x = np.linalg.solve(A, b)
    return min(1.0, max(0.0, x[0]))


@njit(cache=True)
def _advance(choice, states, n_act):
    # odometer step over the given states; False once it wraps around
    for i in range(len(states)):
        s = states[i]
        choice[s] += 1
        if choice[s] < n_act[s]:
            return True
        choice[s] = 0
    return False


@njit(cache=True)
def _maximin_enum(indptr, indices, data, row_ptr, color, start, ctrl, adv, tie):
    n = len(row_ptr) - 1
    n_act = row_ptr[1:] - row_ptr[:-1]
    choice = np.zeros(n, np.int64)
    best = -1.0
    best_choice = choice.copy()
    evaluated = 0
    while True:
        for i in range(len(adv)):
            choice[adv[i]] = 0
        cur = 2.0
        cur_choice = choice.copy()
        while True:
            v = _pair_value(indptr, indices, data, row_ptr, choice, color, start)
            evaluated += 1
            if v < cur - tie:
                cur = v
                cur_choice[:] = choice
            if cur <= best + tie:
                break
            if not _advance(choice, adv, n_act):
                break
        if cur > best + tie:
            best = cur
            best_choice[:] = cur_choice
        if not _advance(choice, ctrl, n_act):
            break
    return best, best_choice, evaluated


@njit(cache=True)
def _all_values(indptr, indices, data, row_ptr, color, start, ctrl, adv, total):
    n = len(row_ptr) - 1
    n_act = row_ptr[1:] - row_ptr[:-1]
    choice = np.zeros(n, np.int64)
    out = np.empty(total)
    k = 0
    while True:
        for i in range(len(adv)):
            choice[adv[i]] = 0
        while True:
            out[k] = _pair_value(indptr, indices, data, row_ptr, choice, color, start)
            k += 1
            if not _advance(choice, adv, n_act):
                break
        if not _advance(choice, ctrl, n_act):
            break
    return out


def count_pairs(arena: Arena) -> int:
    """Number of pure memoryless strategy pairs."""
    return math.prod(len(a) for a in arena.actions)


@dataclass
class ParityResult:
    """Maximin parity value at the initial state with an optimal pair."""

    value: float
    choice: np.ndarray
    pair: PureMemorylessStrategyPair
    n_pairs: int
    evaluated: int


def _kernel_args(arena, colors):
    M = arena.matrix
    return (M.P.indptr.astype(np.int64), M.P.indices.astype(np.int64), M.P.data,
            M.row_ptr.astype(np.int64), np.asarray(colors, dtype=np.int64))


def parity_value_exact(product: Arena, cap: int = 10**7, colors=None, tie: float = 1e-12) -> ParityResult:
    """Maximin parity probability at the initial state by exhaustive enumeration.

    Controller maps are enumerated in odometer order (first state fastest); for
    each one the adversary maps are enumerated and the minimum kept.  A
    controller map is abandoned as soon as its running minimum cannot beat the
    best value found so far, which never changes the result.  Among equally
    good maps the first one found is returned.

    Raises
    ------
    CapExceeded
        If the number of pairs exceeds ``cap``.
    """
    total = count_pairs(product)
    if total > cap:
        raise CapExceeded(f"{total} strategy pairs exceed the enumeration cap {cap}")
    colors = product.color if colors is None else colors
    ctrl = np.flatnonzero(product.controller).astype(np.int64)
    adv = np.flatnonzero(~product.controller).astype(np.int64)
    best, choice, evaluated = _maximin_enum(*_kernel_args(product, colors), product.initial, ctrl, adv, tie)
    return ParityResult(float(best), choice, PureMemorylessStrategyPair.from_choice(product, choice), total, int(evaluated))


def all_pair_values(product: Arena, cap: int = 10**5, colors=None):
    """Value at the initial state of every pair, with the choice arrays' enumeration order.

    Returns
    -------
    values : ndarray, shape (n_controller_maps, n_adversary_maps)
    """
    total = count_pairs(product)
    if total > cap:
        raise CapExceeded(f"{total} strategy pairs exceed the cap {cap}")
    colors = product.color if colors is None else colors
    ctrl = np.flatnonzero(product.controller).astype(np.int64)
    adv = np.flatnonzero(~product.controller).astype(np.int64)
    vals = _all_values(*_kernel_args(product, colors), product.initial, ctrl, adv, total)
    n_adv = math.prod(len(product.actions[s]) for s in adv)
    return vals.reshape(-1, n_adv)


def iter_maps(arena: Arena, states):
    """Choice arrays (zeros elsewhere) for every map over ``states``, in odometer order."""
    states = list(states)
    choice = np.zeros(arena.n_states, dtype=np.int64)
    n_act = np.array([len(a) for a in arena.actions])
    while True:
        yield choice.copy()
        for s in states:
            choice[s] += 1
            if choice[s] < n_act[s]:
                break
            choice[s] = 0
        else:
            return


# ---------------------------------------------------------------------------
# one-player parity objectives (the other player fixed)

def _row_any(M, mask):
    """Per row: does any successor lie in ``mask``?"""
    return np.maximum.reduceat(mask[M.P.indices].astype(np.int8), M.P.indptr[:-1]).astype(bool)


def _row_all(M, mask):
    """Per row: do all successors lie in ``mask``?"""
    return np.minimum.reduceat(mask[M.P.indices].astype(np.int8), M.P.indptr[:-1]).astype(bool)


def _first_row(M, ok):
    """Per state, the first action index whose row is flagged, or -1."""
    big = np.iinfo(np.int64).max
    rows = np.where(ok, np.arange(M.n_rows), big)
    first = np.minimum.reduceat(rows, M.row_ptr[:-1])
    return np.where(first == big, -1, first - M.row_ptr[:-1])


def _mecs(M, rows_ok, mask):
    """Maximal end components inside ``mask`` using only rows flagged in ``rows_ok``.

    Returns a per-state component id (-1 outside every component) and the rows
    that stay inside their component.
    """
    mask = mask.copy()
    n = len(mask)
    while True:
        active = rows_ok & mask[M.row_state] & _row_all(M, mask)
        has = np.zeros(n, dtype=bool)
        has[M.row_state[active]] = True
        mask &= has
        active &= mask[M.row_state]
        if not mask.any():
            return np.full(n, -1, dtype=np.int64), active
        keep = np.repeat(active, np.diff(M.P.indptr))
        rows = M.row_state[np.repeat(np.arange(M.n_rows), np.diff(M.P.indptr))][keep]
        cols = M.P.indices[keep]
        G = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        _, comp = csgraph.connected_components(G, directed=True, connection="strong")
        comp = np.where(mask, comp, -1)
        succ_comp = comp[M.P.indices]
        lo = np.minimum.reduceat(succ_comp, M.P.indptr[:-1])
        hi = np.maximum.reduceat(succ_comp, M.P.indptr[:-1])
        inside = active & (lo == hi) & (lo == comp[M.row_state])
        has = np.zeros(n, dtype=bool)
        has[M.row_state[inside]] = True
        if np.array_equal(inside, active) and np.array_equal(has, mask):
            return comp, inside
        rows_ok = rows_ok & inside | ~mask[M.row_state]
        mask &= has


def _attract(M, rows_ok, target, within):
    """Positive-probability attractor of ``target`` inside ``within``.

    Returns the attracted set and, for attracted non-target states, the first
    usable action index (a row flagged in ``rows_ok`` whose support stays in
    ``within`` and hits the set built so far).
    """
    inset = target.copy()
    choice = np.full(len(target), -1, dtype=np.int64)
    stay = rows_ok & _row_all(M, within)
    while True:
        ok = stay & ~inset[M.row_state] & within[M.row_state] & _row_any(M, inset)
        first = _first_row(M, ok)
        new = first >= 0
        if not new.any():
            return inset, choice
        choice[new] = first[new]
        inset |= new


def _max_parity_mdp(M, rows_ok, colors, parity):
    """Maximal probability that the largest color seen infinitely often has ``parity``.

    ``rows_ok`` flags the rows the optimizing player may use; states of the
    fixed player have exactly one flagged row.  Returns the value vector and an
    optimal choice array.
    """
    n = len(colors)
    colors = np.asarray(colors)
    choice = _first_row(M, rows_ok)
    win = np.zeros(n, dtype=bool)
    comp, _ = _mecs(M, rows_ok, np.ones(n, dtype=bool))
    for e in range(comp.max() + 1):
        members = comp == e
        for c in sorted(set(colors[members].tolist()), reverse=True):
            if c % 2 != parity:
                continue
            sub = members & (colors <= c) & ~win
            sc, inner = _mecs(M, rows_ok, sub)
            for f in range(sc.max() + 1):
                ec = sc == f
                hit = ec & (colors == c)
                if not hit.any():
                    continue
                # inside the winning component: head for a top-color state, stay anywhere
                inrows = inner & ec[M.row_state]
                att, ach = _attract(M, inrows, hit, ec)
                choice[ec & ~hit] = ach[ec & ~hit]
                first = _first_row(M, inrows)
                choice[hit] = first[hit]
                win |= ec
    if not win.any():
        return np.zeros(n), choice
    # almost-sure reachability of the winning set
    U = np.ones(n, dtype=bool)
    while True:
        R, rch = _attract(M, rows_ok, win, U)
        if np.array_equal(R, U):
            break
        U = R
    one = U
    choice[one & ~win] = rch[one & ~win]
    can, cch = _attract(M, rows_ok, one, np.ones(n, dtype=bool))
    maybe = can & ~one
    v = one.astype(float)
    if not maybe.any():
        return v, choice
    choice[maybe] = cch[maybe]
    idx = np.flatnonzero(maybe)
    for _ in range(10 * n + 10):
        rows = M.row_ptr[idx] + choice[idx]
        Pm = M.P[rows]
        A = sp.identity(len(idx), format="csr") - Pm[:, idx]
        b = np.asarray(Pm[:, np.flatnonzero(one)].sum(axis=1)).ravel()
        v[idx] = np.clip(_solve(A, b), 0.0, 1.0)
        q = M.P @ v
        q_ok = np.where(rows_ok, q, -np.inf)
        best = np.maximum.reduceat(q_ok, M.row_ptr[:-1])
        improve = maybe & (best > v + SOLVE_TOL)
        if not improve.any():
            break
        brow = _first_row(M, rows_ok & (q_ok >= best[M.row_state]))
        choice[improve] = brow[improve]
    return v, choice


def _fixed_rows(arena, choice, player_is_controller):
    """Row flags where states of the fixed player keep only their chosen row."""
    M = arena.matrix
    fixed = arena.controller if player_is_controller else ~arena.controller
    fixed_states = np.flatnonzero(fixed)
    ok = ~fixed[M.row_state]
    ok[M.row_ptr[fixed_states] + np.asarray(choice)[fixed_states]] = True
    return ok


def parity_best_response(arena: Arena, choice, responder: str, colors=None):
    """Best response of one player to the other's fixed pure memoryless strategy.

    Parameters
    ----------
    arena : Arena with per-state colors (``arena.color``) or explicit ``colors``
    choice : array_like
        Choice array; only the entries of the fixed player are read.
    responder : {"adversary", "controller"}
        The adversary minimizes, the controller maximizes, the probability
        that the largest color seen infinitely often is even.

    Returns
    -------
    values : ndarray
        Parity probability from every state under the optimal response.
    choice : ndarray
        Full choice array: the fixed player's entries followed by the response.
    """
    colors = arena.color if colors is None else colors
    if responder == "adversary":
        rows_ok = _fixed_rows(arena, choice, True)
        v, ch = _max_parity_mdp(arena.matrix, rows_ok, colors, 1)
        v = 1.0 - v
    elif responder == "controller":
        rows_ok = _fixed_rows(arena, choice, False)
        v, ch = _max_parity_mdp(arena.matrix, rows_ok, colors, 0)
    else:
        raise ValueError("responder must be 'adversary' or 'controller'")
    fixed = arena.controller if responder == "adversary" else ~arena.controller
    ch = np.where(fixed, np.asarray(choice), ch)
    return v, ch


def worst_case_value(arena: Arena, choice, colors=None) -> float:
    """Parity probability at the initial state against the best adversary response."""
    v, _ = parity_best_response(arena, choice, "adversary", colors)
    return float(v[arena.initial])


def maximin_bounds(arena: Arena, ctrl_choice, adv_choice, colors=None) -> tuple[float, float]:
    """Certified bracket ``lower <= maximin value <= upper`` at the initial state.

    The lower end fixes the controller and lets the adversary respond; the upper
    end fixes the adversary and lets the controller respond.
    """
    lo, _ = parity_best_response(arena, ctrl_choice, "adversary", colors)
    hi, _ = parity_best_response(arena, adv_choice, "controller", colors)
    return float(lo[arena.initial]), float(hi[arena.initial])


# ---------------------------------------------------------------------------
# discounted games

def greedy_choice(arena: Arena, row_values, tie: float = 1e-12) -> np.ndarray:
    """Max at controller states, min at adversary states, ties to the lowest index."""
    M = arena.matrix
    sign = np.where(arena.controller[M.row_state], 1.0, -1.0)
    signed = sign * np.asarray(row_values)
    best = np.maximum.reduceat(signed, M.row_ptr[:-1])
    ok = signed >= best[M.row_state] - tie
    return _first_row(M, ok)


@dataclass
class ViResult:
    values: np.ndarray
    choice: np.ndarray
    iterations: int
    residual: float

    def pair_for(self, arena):
        return PureMemorylessStrategyPair.from_choice(arena, self.choice)


def discounted_value_vi(pg, tol: float = 1e-8, max_iter: int | None = None, v0=None) -> ViResult:
    """Minimax value iteration ``v <- R + (1 - eps) * opt_a P v``.

    Stops once the sup-norm update drops below ``tol * eps``, which bounds the
    distance to the fixed point by ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = pg.matrix
    R = np.asarray(pg.reward, dtype=float)
    gamma = pg.discount
    eps = 1.0 - gamma
    ctrl = pg.controller
    starts = M.row_ptr[:-1]
    v = np.zeros(pg.n_states) if v0 is None else np.array(v0, dtype=float)
    P = M.P
    it = 0
    diff = np.inf
    limit = max_iter if max_iter is not None else 50_000_000
    while it < limit:
        q = P @ v
        new = R + gamma * np.where(ctrl, np.maximum.reduceat(q, starts), np.minimum.reduceat(q, starts))
        diff = float(np.abs(new - v).max())
        v = new
        it += 1
        if diff < tol * eps:
            break
    choice = greedy_choice(pg, P @ v)
    return ViResult(v, choice, it, diff)


def discounted_value_pair(pg, pair) -> np.ndarray:
    """Exact discounted value of every state under a fixed pair."""
    choice = _as_choice(pg, pair)
    M = pg.matrix
    P = M.P[M.row_ptr[:-1] + choice]
    A = sp.identity(pg.n_states, format="csr") - pg.discount * P
    return np.asarray(_solve(A, np.asarray(pg.reward, dtype=float)))


def lift_choice(pg, product_choice) -> np.ndarray:
    """Priority-game choice array that plays the product choice in every priority copy."""
    return np.asarray(product_choice, dtype=np.int64)[pg.x]


def bscc_bijection_check(priority_mc: MarkovChain, product_mc: MarkovChain, project) -> tuple[bool, dict]:
    """Check that dropping priorities maps priority BSCCs one-to-one onto product BSCCs.

    ``project[i]`` is the product-chain index of priority-chain state ``i``.
    Returns ``(ok, witness)``; the witness lists the offending sets on failure.
    """
    project = np.asarray(project)
    prio = [frozenset(project[list(B)].tolist()) for B in bsccs(priority_mc)]
    prod = set(bsccs(product_mc))
    witness = {}
    seen = {}
    for i, V in enumerate(prio):
        if V in seen:
            witness.setdefault("duplicate", []).append((seen[V], i, sorted(V)))
        seen[V] = i
    extra = [sorted(V) for V in set(prio) - prod]
    missing = [sorted(V) for V in prod - set(prio)]
    if extra:
        witness["unmatched_priority"] = extra
    if missing:
        witness["unmatched_product"] = missing
    return not witness, witness


def values_csv(arena: Arena, values, header: str = "state,value") -> str:
    """Per-state values as CSV text."""
    from .game import state_token

    lines = [header]
    lines += [f"{state_token(s)},{float(v)!r}" for s, v in zip(arena.states, values)]
    return "\n".join(lines) + "\n"
