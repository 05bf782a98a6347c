"""Formula syntax trees, concrete syntax and reference path semantics.

Concrete grammar (atoms are double-quoted)::

    state := '"atom"' | 'true' | 'false' | '!' state | state '&' state
           | state '|' state | '(' state ')' | '<<' agents '>>' tail
    tail  := 'P' rel num '[' path ']'
           | 'R{' reward '}' rel num '[' path ']'
           | 'D' rel num '[' 'BCR(' agent ',' profile ',' path ')' ']'
    path  := 'X' state | state 'U<=' int state | 'F<=' int state | 'G<=' int state

``!`` binds tighter than ``&``, which binds tighter than ``|``.  ``a | b`` is
sugar for ``!(!a & !b)``.
"""

from __future__ import annotations

import re
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from typing import Union

from .errors import FormulaSyntaxError, HistoryTooShort
from .model import Game, History

RELATIONS = ("<=", "<", ">=", ">")


# -- state formulas ------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: StateFormula


@dataclass(frozen=True)
class And:
    left: StateFormula
    right: StateFormula


@dataclass(frozen=True)
class CoalitionP:
    coalition: tuple[str, ...]
    rel: str
    bound: float
    path: PathFormula


@dataclass(frozen=True)
class CoalitionR:
    coalition: tuple[str, ...]
    reward: str
    rel: str
    bound: float
    path: PathFormula


@dataclass(frozen=True)
class CoalitionD:
    coalition: tuple[str, ...]
    rel: str
    bound: float
    agent: str
    profile: str
    path: PathFormula


# -- path formulas -------------------------------------------------------------


@dataclass(frozen=True)
class Next:
    arg: StateFormula


@dataclass(frozen=True)
class Until:
    left: StateFormula
    bound: int
    right: StateFormula


@dataclass(frozen=True)
class Eventually:
    bound: int
    arg: StateFormula


@dataclass(frozen=True)
class Always:
    bound: int
    arg: StateFormula


@dataclass(frozen=True)
class AnyOf:
    """Disjunction of path formulas (not part of the concrete grammar)."""

    members: tuple[PathFormula, ...]


@dataclass(frozen=True)
class AllOf:
    """Conjunction of path formulas (not part of the concrete grammar)."""

    members: tuple[PathFormula, ...]


StateFormula = Union[Const, Atom, Not, And, CoalitionP, CoalitionR, CoalitionD]
PathFormula = Union[Next, Until, Eventually, Always]
Outcome = Union[Next, Until, Eventually, Always, AnyOf, AllOf]

TRUE = Const(True)
FALSE = Const(False)
STATE_TYPES = (Const, Atom, Not, And, CoalitionP, CoalitionR, CoalitionD)
PATH_TYPES = (Next, Until, Eventually, Always)


def Or(left: StateFormula, right: StateFormula) -> StateFormula:
    return Not(And(Not(left), Not(right)))


def any_of(*paths: PathFormula) -> AnyOf:
    return AnyOf(tuple(paths))


def all_of(*paths: PathFormula) -> AllOf:
    return AllOf(tuple(paths))


def horizon(path: Outcome) -> int:
    """Number of steps needed to decide ``path``."""
    if isinstance(path, Next):
        return 1
    if isinstance(path, (Until, Eventually, Always)):
        return path.bound
    if isinstance(path, (AnyOf, AllOf)):
        return max((horizon(p) for p in path.members), default=0)
    raise TypeError(f"not a path formula: {path!r}")


def subformulas(path: Outcome) -> list[StateFormula]:
    """State formulas labelling the positions of ``path``."""
    if isinstance(path, Next):
        return [path.arg]
    if isinstance(path, Until):
        return [path.left, path.right]
    if isinstance(path, (Eventually, Always)):
        return [path.arg]
    return [f for m in path.members for f in subformulas(m)]


# -- printing --------------------------------------------------------------------


def _num(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def format_formula(f: StateFormula | Outcome) -> str:
    """Concrete syntax accepted back by :func:`parse_formula`."""
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f'"{f.name}"'
    if isinstance(f, Not):
        inner = format_formula(f.arg)
        return f"!({inner})" if isinstance(f.arg, And) else f"!{inner}"
    if isinstance(f, And):
        left, right = format_formula(f.left), format_formula(f.right)
        if isinstance(f.left, And):
            left = f"({left})"
        if isinstance(f.right, And):
            right = f"({right})"
        return f"{left} & {right}"
    if isinstance(f, (CoalitionP, CoalitionR, CoalitionD)):
        head = "<<" + ",".join(f.coalition) + ">>"
        if isinstance(f, CoalitionP):
            return f"{head} P{f.rel}{_num(f.bound)} [ {format_formula(f.path)} ]"
        if isinstance(f, CoalitionR):
            return f"{head} R{{{f.reward}}}{f.rel}{_num(f.bound)} [ {format_formula(f.path)} ]"
        return (f"{head} D{f.rel}{_num(f.bound)} "
                f"[ BCR({f.agent}, {f.profile}, {format_formula(f.path)}) ]")
    if isinstance(f, Next):
        return f"X {format_formula(f.arg)}"
    if isinstance(f, Until):
        return f"{_operand(f.left)} U<={f.bound} {_operand(f.right)}"
    if isinstance(f, Eventually):
        return f"F<={f.bound} {format_formula(f.arg)}"
    if isinstance(f, Always):
        return f"G<={f.bound} {format_formula(f.arg)}"
    if isinstance(f, (AnyOf, AllOf)):
        joiner = " or " if isinstance(f, AnyOf) else " and "
        return joiner.join(f"({format_formula(m)})" for m in f.members)
    raise TypeError(f"cannot format {f!r}")


def _operand(f: StateFormula) -> str:
    return format_formula(f)


# -- parsing ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<atom>"[^"]*")
  | (?P<op><<|>>|<=|>=|<|>|!|&|\||\(|\)|\[|\]|\{|\}|,)
  | (?P<num>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", 1, pos + 1)
        if m.lastgroup != "ws":
            kind = m.lastgroup
            out.append(_Tok("op" if kind == "op" else kind, m.group(), pos))
        pos = m.end()
    out.append(_Tok("eof", "", len(text)))
    return out


class _FormulaParser:
    def __init__(self, text: str, agents: Sequence[str] | None):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.agents = tuple(agents) if agents is not None else None

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None) -> FormulaSyntaxError:
        tok = tok or self.tok
        line = self.text.count("\n", 0, tok.pos) + 1
        col = tok.pos - (self.text.rfind("\n", 0, tok.pos) + 1) + 1
        return FormulaSyntaxError(message, line, col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "id") and self.tok.text == text

    def eat(self, text: str) -> _Tok:
        if not self.at(text):
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str) -> str:
        if self.tok.kind != "id":
            raise self.error(f"expected {what}")
        tok = self.tok
        self.i += 1
        return tok.text

    def number(self) -> float:
        if self.tok.kind != "num":
            raise self.error("expected a number")
        tok = self.tok
        self.i += 1
        return float(tok.text)

    def natural(self) -> int:
        tok = self.tok
        x = self.number()
        if x < 0 or not x.is_integer():
            raise self.error("step bound must be a natural number", tok)
        return int(x)

    def rel(self) -> str:
        if self.tok.kind == "op" and self.tok.text in RELATIONS:
            tok = self.tok
            self.i += 1
            return tok.text
        raise self.error("expected one of <=, <, >=, >")

    # state := or
    def state(self) -> StateFormula:
        left = self.conj()
        while self.at("|"):
            self.i += 1
            left = Or(left, self.conj())
        return left

    def conj(self) -> StateFormula:
        left = self.unary()
        while self.at("&"):
            self.i += 1
            left = And(left, self.unary())
        return left

    def unary(self) -> StateFormula:
        if self.at("!"):
            self.i += 1
            return Not(self.unary())
        return self.primary()

    def primary(self) -> StateFormula:
        tok = self.tok
        if tok.kind == "atom":
            self.i += 1
            return Atom(tok.text[1:-1])
        if tok.kind == "id" and tok.text in ("true", "false"):
            self.i += 1
            return Const(tok.text == "true")
        if self.at("("):
            self.i += 1
            inner = self.state()
            self.eat(")")
            return inner
        if self.at("<<"):
            return self.coalition_op()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise self.error(f"expected a state formula, found {found}")

    def coalition_op(self) -> StateFormula:
        self.eat("<<")
        members: list[str] = []
        while not self.at(">>"):
            tok = self.tok
            name = self.ident("agent name")
            if self.agents is not None and name not in self.agents:
                raise self.error(f"unknown agent {name!r} in coalition", tok)
            if name not in members:
                members.append(name)
            if not self.at(">>"):
                self.eat(",")
        self.eat(">>")
        if self.agents is not None:
            members = [a for a in self.agents if a in members]
        coalition = tuple(members)
        tok = self.tok
        op = self.ident("'P', 'R' or 'D'")
        if op == "P":
            rel = self.rel()
            btok = self.tok
            bound = self.number()
            if not 0.0 <= bound <= 1.0:
                raise self.error(f"probability bound {bound} outside [0,1]", btok)
            self.eat("[")
            path = self.path()
            self.eat("]")
            return CoalitionP(coalition, rel, bound, path)
        if op == "R":
            self.eat("{")
            reward = self.ident("reward structure name")
            self.eat("}")
            rel = self.rel()
            bound = self.number()
            self.eat("[")
            path = self.path()
            self.eat("]")
            return CoalitionR(coalition, reward, rel, bound, path)
        if op == "D":
            rel = self.rel()
            bound = self.number()
            self.eat("[")
            self.eat("BCR")
            self.eat("(")
            atok = self.tok
            agent = self.ident("agent name")
            if agent not in coalition:
                raise self.error(f"agent {agent!r} is not in the coalition", atok)
            self.eat(",")
            profile = self.ident("profile name")
            self.eat(",")
            path = self.path()
            self.eat(")")
            self.eat("]")
            return CoalitionD(coalition, rel, bound, agent, profile, path)
        raise self.error(f"expected 'P', 'R' or 'D', found {op!r}", tok)

    def bounded(self, keyword: str) -> int:
        self.eat(keyword)
        if not self.at("<="):
            raise self.error(f"expected '<=' after {keyword!r}")
        self.i += 1
        return self.natural()

    def path(self) -> PathFormula:
        if self.at("X"):
            self.i += 1
            return Next(self.state())
        if self.at("F"):
            k = self.bounded("F")
            return Eventually(k, self.state())
        if self.at("G"):
            k = self.bounded("G")
            return Always(k, self.state())
        if self.at("("):
            save = self.i
            self.i += 1
            try:
                inner = self.path()
                self.eat(")")
                return inner
            except FormulaSyntaxError:
                self.i = save
        left = self.state()
        if not self.at("U"):
            raise self.error("expected a path formula ('X', 'F<=', 'G<=' or 'U<=')")
        k = self.bounded("U")
        return Until(left, k, self.state())

    def formula(self) -> StateFormula | PathFormula:
        if self.at("X") or self.at("F") or self.at("G"):
            out: StateFormula | PathFormula = self.path()
        else:
            save = self.i
            try:
                out = self.state()
                if self.at("U"):
                    self.i = save
                    out = self.path()
            except FormulaSyntaxError as first:
                self.i = save
                try:
                    out = self.path()
                except FormulaSyntaxError:
                    raise first from None
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return out


def parse_formula(text: str, agents: Sequence[str] | None = None) -> StateFormula | PathFormula:
    """Parse a state or path formula.  With ``agents`` given, coalitions are
    checked against them and put in that order."""
    if not text.strip():
        raise FormulaSyntaxError("empty formula", 1, 1)
    return _FormulaParser(text, agents).formula()


def parse_state_formula(text: str, agents: Sequence[str] | None = None) -> StateFormula:
    f = parse_formula(text, agents)
    if not isinstance(f, STATE_TYPES):
        raise FormulaSyntaxError("expected a state formula, got a path formula", 1, 1)
    return f


def parse_path_formula(text: str, agents: Sequence[str] | None = None) -> PathFormula:
    f = parse_formula(text, agents)
    if not isinstance(f, PATH_TYPES):
        raise FormulaSyntaxError("expected a path formula ('X', 'U<=', 'F<=' or 'G<=')", 1, 1)
    return f


# -- reference semantics -------------------------------------------------------------

Holds = Callable[[str, StateFormula], bool]


def label_evaluator(game: Game) -> Holds:
    """Evaluate propositional state formulas against the game labelling."""

    def holds(state: str, f: StateFormula) -> bool:
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Atom):
            return f.name in game.label_of(state)
        if isinstance(f, Not):
            return not holds(state, f.arg)
        if isinstance(f, And):
            return holds(state, f.left) and holds(state, f.right)
        raise TypeError("coalition operators need the model checker to evaluate")

    return holds


def path_sat(history: History | Sequence[str], path: Outcome, holds: Holds) -> bool:
    """Does the history satisfy ``path``?

    Raises :class:`HistoryTooShort` when the prefix does not determine the
    verdict.
    """
    states = history.states if isinstance(history, History) else tuple(history)

    def at(i: int) -> str:
        if i >= len(states):
            raise HistoryTooShort(f"verdict needs position {i}, history has {len(states)} states")
        return states[i]

    if isinstance(path, Next):
        return holds(at(1), path.arg)
    if isinstance(path, Eventually):
        return path_sat(states, Until(TRUE, path.bound, path.arg), holds)
    if isinstance(path, Until):
        for i in range(path.bound + 1):
            s = at(i)
            if holds(s, path.right):
                return True
            if not holds(s, path.left):
                return False
        return False
    if isinstance(path, Always):
        for j in range(path.bound + 1):
            if not holds(at(j), path.arg):
                return False
        return True
    if isinstance(path, (AnyOf, AllOf)):
        want = isinstance(path, AnyOf)
        pending: HistoryTooShort | None = None
        for m in path.members:
            try:
                if path_sat(states, m, holds) == want:
                    return want
            except HistoryTooShort as exc:
                pending = exc
        if pending is not None:
            raise pending
        return not want
    raise TypeError(f"not a path formula: {path!r}")


def coalition_agents(f: StateFormula | Outcome) -> Iterable[str]:
    """Every agent name referenced by ``f`` (used for validation)."""
    if isinstance(f, (CoalitionP, CoalitionR, CoalitionD)):
        yield from f.coalition
        if isinstance(f, CoalitionD):
            yield f.agent
        yield from coalition_agents(f.path)
    elif isinstance(f, Not):
        yield from coalition_agents(f.arg)
    elif isinstance(f, And):
        yield from coalition_agents(f.left)
        yield from coalition_agents(f.right)
    elif isinstance(f, (Next, Until, Eventually, Always, AnyOf, AllOf)):
        for sub in subformulas(f):
            yield from coalition_agents(sub)
