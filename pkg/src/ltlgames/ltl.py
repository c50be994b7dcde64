"""
Linear temporal logic: formulas, a small parser and exact evaluation on lasso words.

A lasso word ``stem . loop^omega`` is the finite representation of an
ultimately periodic infinite label sequence.  Evaluation on it is exact, which
makes this module the ground-truth oracle used to validate parity automata.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Formula",
    "LTLSyntaxError",
    "LassoWord",
    "TRUE",
    "atom",
    "parse_ltl",
    "eval_lasso",
    "eval_lasso_positions",
    "atomic_propositions",
    "expand",
    "subformulas",
    "make_label",
    "all_labels",
]

# Node kinds.  The first six are the core grammar, the rest are kept explicitly
# after parsing so that printing reproduces what the user wrote.
TRUE_K = "true"
ATOM = "atom"
AND = "and"
NOT = "not"
NEXT = "next"
UNTIL = "until"
OR = "or"
IMPLIES = "implies"
EVENTUALLY = "eventually"
ALWAYS = "always"

_UNARY = {NOT, NEXT, EVENTUALLY, ALWAYS}
_BINARY = {AND, UNTIL, OR, IMPLIES}


@dataclass(frozen=True)
class Formula:
    """Immutable LTL syntax tree node.

    Attributes
    ----------
    kind : str
        One of ``true, atom, and, not, next, until, or, implies, eventually,
        always``.
    children : tuple of Formula
        Operands (empty for ``true`` and atoms).
    name : str or None
        Proposition name for atoms.
    """

    kind: str
    children: tuple = ()
    name: str | None = None

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        if self.kind == ATOM:
            return f"Atom({self.name})"
        if self.kind == TRUE_K:
            return "True"
        args = ", ".join(repr(c) for c in self.children)
        return f"{self.kind.capitalize()}({args})"

    # convenience constructors, handy in tests and notebooks
    def __and__(self, other: "Formula") -> "Formula":
        return Formula(AND, (self, other))

    def __or__(self, other: "Formula") -> "Formula":
        return Formula(OR, (self, other))

    def __invert__(self) -> "Formula":
        return Formula(NOT, (self,))


TRUE = Formula(TRUE_K)


def atom(name: str) -> Formula:
    return Formula(ATOM, (), name)


def Not(f):
    return Formula(NOT, (f,))


def Next(f):
    return Formula(NEXT, (f,))


def Eventually(f):
    return Formula(EVENTUALLY, (f,))


def Always(f):
    return Formula(ALWAYS, (f,))


def And(a, b):
    return Formula(AND, (a, b))


def Or(a, b):
    return Formula(OR, (a, b))


def Implies(a, b):
    return Formula(IMPLIES, (a, b))


def Until(a, b):
    return Formula(UNTIL, (a, b))


# ---------------------------------------------------------------------------
# parsing

class LTLSyntaxError(ValueError):
    """Raised for malformed formula text; ``pos`` is the character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_ALIASES = {
    "◊": "F",  # lozenge
    "◇": "F",
    "□": "G",  # square
    "◻": "G",
    "◯": "X",  # large circle
    "○": "X",
    "∧": "&",
    "∨": "|",
    "¬": "!",
    "→": "->",
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>->|&&|\|\||[!&|()~])|(?P<bad>\S))"
)
_KEYWORDS = {"X", "F", "G", "U", "true", "false"}


def _tokenize(text: str):
    tokens = []
    pos = 0
    # aliases are translated character by character, keeping a position map so
    # error offsets refer to the original text
    chars = []
    origin = []
    for i, ch in enumerate(text):
        rep = _ALIASES.get(ch)
        if rep is None:
            chars.append(ch)
            origin.append(i)
        else:
            # pad with spaces so that e.g. "◊□a" still splits into F G a
            for r in " " + rep + " ":
                chars.append(r)
                origin.append(i)
    src = "".join(chars)
    origin.append(len(text))
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            break
        if m.group("bad") is not None:
            raise LTLSyntaxError(f"unknown token {m.group('bad')!r}", origin[m.start("bad")])
        if m.group("ident") is not None:
            tokens.append((m.group("ident"), origin[m.start("ident")]))
        else:
            op = {"&&": "&", "||": "|", "~": "!"}.get(m.group("op"), m.group("op"))
            tokens.append((op, origin[m.start("op")]))
        pos = m.end()
    tokens.append(("<end>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok, pos = self.take()
        if tok != value:
            raise LTLSyntaxError(f"expected {value!r}, found {tok!r}", pos)

    def parse(self) -> Formula:
        f = self.implication()
        tok, pos = self.tokens[self.i]
        if tok != "<end>":
            raise LTLSyntaxError(f"unexpected token {tok!r}", pos)
        return f

    def implication(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.until()
        while self.peek() == "&":
            self.take()
            left = And(left, self.until())
        return left

    def until(self):
        left = self.unary()
        if self.peek() == "U":
            self.take()
            return Until(left, self.until())
        return left

    def unary(self):
        tok, pos = self.take()
        if tok == "!":
            return Not(self.unary())
        if tok == "X":
            return Next(self.unary())
        if tok == "F":
            return Eventually(self.unary())
        if tok == "G":
            return Always(self.unary())
        if tok == "(":
            f = self.implication()
            self.expect(")")
            return f
        if tok == "true":
            return TRUE
        if tok == "false":
            return Not(TRUE)
        if tok == "<end>":
            raise LTLSyntaxError("unexpected end of formula", pos)
        if tok in _KEYWORDS or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            raise LTLSyntaxError(f"unexpected token {tok!r}", pos)
        return atom(tok)


def parse_ltl(text: str) -> Formula:
    """Parse an LTL formula.

    Operators from loosest to tightest binding: ``->`` (right associative),
    ``|``, ``&``, ``U`` (right associative), then the unary ``! X F G``.
    ``true``/``false`` are constants and the Unicode symbols
    ``◊ □ ◯ ∧ ∨ ¬ →`` are accepted as aliases.

    >>> parse_ltl("F G a")
    Eventually(Always(Atom(a)))
    """
    return _Parser(text).parse()


_PREC = {IMPLIES: 1, OR: 2, AND: 3, UNTIL: 4}
_SYMBOL = {IMPLIES: "->", OR: "|", AND: "&", UNTIL: "U"}
_PREFIX = {NOT: "!", NEXT: "X ", EVENTUALLY: "F ", ALWAYS: "G "}


def to_string(f: Formula) -> str:
    """Print a formula in the surface syntax accepted by :func:`parse_ltl`."""
    if f.kind == TRUE_K:
        return "true"
    if f.kind == ATOM:
        return f.name
    if f.kind in _UNARY:
        inner = to_string(f.children[0])
        if f.children[0].kind in _BINARY:
            inner = f"({inner})"
        return _PREFIX[f.kind] + inner
    left, right = (to_string(c) for c in f.children)
    # binary children are always parenthesised; this keeps associativity explicit
    if f.children[0].kind in _BINARY:
        left = f"({left})"
    if f.children[1].kind in _BINARY:
        right = f"({right})"
    return f"{left} {_SYMBOL[f.kind]} {right}"


# ---------------------------------------------------------------------------
# structure

def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen = {}
    stack = [(f, False)]
    while stack:
        node, done = stack.pop()
        if node in seen:
            continue
        if done:
            seen[node] = None
            continue
        stack.append((node, True))
        for c in reversed(node.children):
            if c not in seen:
                stack.append((c, False))
    return list(seen)


def atomic_propositions(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if g.kind == ATOM}


def expand(f: Formula) -> Formula:
    """Rewrite derived operators into the core grammar true/atom/and/not/next/until."""
    if f.kind in (TRUE_K, ATOM):
        return f
    ch = tuple(expand(c) for c in f.children)
    if f.kind == OR:
        return Not(And(Not(ch[0]), Not(ch[1])))
    if f.kind == IMPLIES:
        return expand(Or(Not(ch[0]), ch[1]))
    if f.kind == EVENTUALLY:
        return Until(TRUE, ch[0])
    if f.kind == ALWAYS:
        return Not(Until(TRUE, Not(ch[0])))
    return Formula(f.kind, ch, f.name)


# ---------------------------------------------------------------------------
# labels and lasso words

def make_label(props: Iterable[str], ap: Sequence[str] | None = None) -> frozenset:
    """Canonical label set; names outside ``ap`` (if given) are rejected."""
    label = frozenset(props)
    if ap is not None:
        extra = label.difference(ap)
        if extra:
            raise ValueError(f"labels {sorted(extra)} are not in the proposition universe {list(ap)}")
    return label


def all_labels(ap: Sequence[str]) -> list[frozenset]:
    """Every subset of ``ap``; index ``i`` holds ``ap[b]`` iff bit ``b`` of ``i`` is set."""
    return [frozenset(p for b, p in enumerate(ap) if i >> b & 1) for i in range(1 << len(ap))]


@dataclass(frozen=True)
class LassoWord:
    """The infinite word ``stem . loop^omega`` over the universe ``ap``."""

    stem: tuple
    loop: tuple
    ap: tuple

    def __init__(self, stem, loop, ap):
        ap = tuple(ap)
        stem = tuple(make_label(s, ap) for s in stem)
        loop = tuple(make_label(s, ap) for s in loop)
        if not loop:
            raise ValueError("the loop of a lasso word must be nonempty")
        object.__setattr__(self, "stem", stem)
        object.__setattr__(self, "loop", loop)
        object.__setattr__(self, "ap", ap)

    def __len__(self):
        return len(self.stem) + len(self.loop)

    def letter(self, t: int) -> frozenset:
        """Label at time ``t`` of the infinite word."""
        if t < len(self.stem):
            return self.stem[t]
        return self.loop[(t - len(self.stem)) % len(self.loop)]

    def __str__(self):
        fmt = lambda ls: " ".join("{" + ",".join(sorted(l)) + "}" for l in ls)
        return f"{fmt(self.stem)} ({fmt(self.loop)})^w".strip()


# ---------------------------------------------------------------------------
# evaluation

def eval_lasso_positions(f: Formula, w: LassoWord) -> dict:
    """Truth table of every subformula at positions ``0 .. len(w)-1``.

    Position ``len(w) - 1`` is followed by the first loop position.
    """
    unknown = atomic_propositions(f).difference(w.ap)
    if unknown:
        raise ValueError(f"atoms {sorted(unknown)} are not in the word's universe {list(w.ap)}")
    letters = list(w.stem) + list(w.loop)
    n = len(letters)
    start = len(w.stem)
    nxt = list(range(1, n)) + [start]
    table = {}
    for g in subformulas(f):
        k = g.kind
        if k == TRUE_K:
            val = [True] * n
        elif k == ATOM:
            val = [g.name in l for l in letters]
        elif k == NOT:
            val = [not x for x in table[g.children[0]]]
        elif k == AND:
            a, b = table[g.children[0]], table[g.children[1]]
            val = [x and y for x, y in zip(a, b)]
        elif k == OR:
            a, b = table[g.children[0]], table[g.children[1]]
            val = [x or y for x, y in zip(a, b)]
        elif k == IMPLIES:
            a, b = table[g.children[0]], table[g.children[1]]
            val = [(not x) or y for x, y in zip(a, b)]
        elif k == NEXT:
            a = table[g.children[0]]
            val = [a[nxt[i]] for i in range(n)]
        elif k == UNTIL:
            val = _until(table[g.children[0]], table[g.children[1]], nxt, start)
        elif k == EVENTUALLY:
            val = _until([True] * n, table[g.children[0]], nxt, start)
        elif k == ALWAYS:
            val = _always(table[g.children[0]], nxt, start)
        else:  # pragma: no cover - constructor guards kinds
            raise ValueError(f"unknown formula kind {k!r}")
        table[g] = val
    return table


def _until(hold, goal, nxt, start):
    # least fixpoint: two backward sweeps over the loop, then one over the stem
    n = len(hold)
    val = [False] * n
    for _ in range(2):
        for i in range(n - 1, start - 1, -1):
            val[i] = goal[i] or (hold[i] and val[nxt[i]])
    for i in range(start - 1, -1, -1):
        val[i] = goal[i] or (hold[i] and val[nxt[i]])
    return val


def _always(hold, nxt, start):
    # greatest fixpoint, same sweep structure as _until
    n = len(hold)
    val = [True] * n
    for _ in range(2):
        for i in range(n - 1, start - 1, -1):
            val[i] = hold[i] and val[nxt[i]]
    for i in range(start - 1, -1, -1):
        val[i] = hold[i] and val[nxt[i]]
    return val


def eval_lasso(f: Formula, w: LassoWord) -> bool:
    """Whether ``stem . loop^omega`` satisfies ``f``."""
    return eval_lasso_positions(f, w)[f][0]
