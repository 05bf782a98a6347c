"""Path formulas compiled to small deterministic monitors.

A monitor reads the state at each position ``j = 0 .. horizon`` of a history
and moves between the statuses open / satisfied / violated.  The numerical
engines run their dynamic programmes over (position, state, status), which
is how bounded until is decided without unrolling histories.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

from .logic import (
    AllOf,
    AnyOf,
    Always,
    And,
    Atom,
    Const,
    Eventually,
    Next,
    Not,
    Outcome,
    StateFormula,
    Until,
)
from .model import Game

OPEN, SAT, VIOL = 0, 1, 2

SatFn = Callable[[StateFormula], frozenset]


@dataclass(frozen=True)
class Monitor:
    """Monitor for one of ``next`` / ``until`` / ``always``.

    ``right`` holds the target states (for ``next`` and ``always`` the states
    where the argument holds); ``left`` the states allowed before the target.
    """

    kind: str
    horizon: int
    left: frozenset
    right: frozenset

    def start(self):
        return OPEN

    def update(self, status, j: int, s: str):
        if status != OPEN:
            return status
        if self.kind == "next":
            if j == 0:
                return OPEN
            return SAT if s in self.right else VIOL
        if self.kind == "until":
            if s in self.right:
                return SAT
            if s not in self.left or j >= self.horizon:
                return VIOL
            return OPEN
        # always
        if s not in self.right:
            return VIOL
        return SAT if j >= self.horizon else OPEN

    @staticmethod
    def verdict(status):
        return None if status == OPEN else status == SAT


@dataclass(frozen=True)
class Combined:
    """Any-of / all-of product of member monitors."""

    members: tuple[Monitor, ...]
    any_of: bool

    @property
    def horizon(self) -> int:
        return max((m.horizon for m in self.members), default=0)

    def start(self):
        return tuple(m.start() for m in self.members)

    def update(self, status, j: int, s: str):
        return tuple(m.update(st, j, s) for m, st in zip(self.members, status))

    def verdict(self, status):
        if self.any_of:
            if SAT in status:
                return True
            return False if all(st == VIOL for st in status) else None
        if VIOL in status:
            return False
        return True if all(st == SAT for st in status) else None


def propositional_sat(game: Game) -> SatFn:
    """Satisfaction sets of state formulas; coalition operators are handed to
    the model checker (without profiles or reward structures)."""
    cache: dict = {}

    def sat(f: StateFormula) -> frozenset:
        if f in cache:
            return cache[f]
        if isinstance(f, Const):
            out = frozenset(game.states) if f.value else frozenset()
        elif isinstance(f, Atom):
            out = game.states_with(f.name)
        elif isinstance(f, Not):
            out = frozenset(game.states) - sat(f.arg)
        elif isinstance(f, And):
            out = sat(f.left) & sat(f.right)
        else:
            from .checker import CheckContext, sat_set

            out = sat_set(CheckContext(game), f)
        cache[f] = out
        return out

    return sat


def compile_outcome(game: Game, outcome, sat: SatFn | None = None):
    """Monitor for ``outcome`` (a path formula, :class:`AnyOf`/:class:`AllOf`,
    or an already compiled monitor)."""
    if isinstance(outcome, (Monitor, Combined)):
        return outcome
    sat = sat or propositional_sat(game)
    if isinstance(outcome, Next):
        return Monitor("next", 1, frozenset(game.states), sat(outcome.arg))
    if isinstance(outcome, Until):
        return Monitor("until", outcome.bound, sat(outcome.left), sat(outcome.right))
    if isinstance(outcome, Eventually):
        return Monitor("until", outcome.bound, frozenset(game.states), sat(outcome.arg))
    if isinstance(outcome, Always):
        return Monitor("always", outcome.bound, frozenset(game.states), sat(outcome.arg))
    if isinstance(outcome, (AnyOf, AllOf)):
        members = tuple(compile_outcome(game, m, sat) for m in outcome.members)
        return Combined(members, isinstance(outcome, AnyOf))
    raise TypeError(f"not an outcome: {outcome!r}")


Objective = Outcome
