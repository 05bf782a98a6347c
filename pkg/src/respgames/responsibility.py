"""Coalition values, Shapley responsibility degrees and qualitative blame.

The value of a coalition ``A`` is the probability of the outcome when ``A``
plays its part of the profile and every other agent acts against (mode
``min``) or towards (mode ``max``) the outcome.  Degrees are Shapley values
of that cooperative game.
"""

from __future__ import annotations

import itertools
import json
import os
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import factorial

from .engine import extremal_probability
from .errors import AgentNotInScope, CoalitionTooLarge
from .logic import AllOf, Outcome
from .model import Game, History, StrategyProfile
from .objectives import SatFn, compile_outcome

DEFAULT_CAP = 12
AVOID_TOL = 1e-9

Coalition = tuple[str, ...]


def _check_mode(mode: str) -> None:
    if mode not in ("min", "max"):
        raise ValueError("mode must be 'min' or 'max'")


def subsets(members: Sequence[str]) -> list[Coalition]:
    """All subsets ordered by size, then lexicographically by member position."""
    members = tuple(members)
    return [c for r in range(len(members) + 1) for c in itertools.combinations(members, r)]


def _scope(game: Game, scope) -> Coalition:
    if scope is None:
        return game.agents
    wanted = set(scope)
    unknown = wanted - set(game.agents)
    if unknown:
        raise AgentNotInScope(f"unknown agents {sorted(unknown)}")
    return tuple(a for a in game.agents if a in wanted)


def coalition_value(game: Game, profile: StrategyProfile, outcome: Outcome,
                    coalition: Sequence[str], mode: str = "min", *,
                    start: str | None = None, sat: SatFn | None = None) -> float:
    _check_mode(mode)
    profile.require_full(game)
    return extremal_probability(game, profile.restrict(coalition), outcome, mode,
                                start=start, sat=sat).value


@dataclass(frozen=True)
class CoalitionValueTable:
    outcome: Outcome
    mode: str
    horizon: int
    scope: Coalition
    entries: dict = field(hash=False)

    def __getitem__(self, coalition) -> float:
        key = tuple(a for a in self.scope if a in set(coalition))
        return self.entries[key]

    def rows(self) -> list[tuple[Coalition, float]]:
        return [(c, self.entries[c]) for c in subsets(self.scope)]


def value_table(game: Game, profile: StrategyProfile, outcome: Outcome,
                scope: Sequence[str] | None = None, mode: str = "min", *,
                cap: int = DEFAULT_CAP, threads: int | None = None,
                start: str | None = None, sat: SatFn | None = None) -> CoalitionValueTable:
    """Values of every subset of ``scope`` (default: all agents)."""
    _check_mode(mode)
    profile.require_full(game)
    members = _scope(game, scope)
    if len(members) > cap:
        raise CoalitionTooLarge(f"{len(members)} agents exceed the cap of {cap}")
    mon = compile_outcome(game, outcome, sat)
    coalitions = subsets(members)

    def one(c):
        return extremal_probability(game, profile.restrict(c), mon, mode, start=start).value

    workers = threads if threads is not None else int(os.environ.get("RESPGAMES_THREADS", "1"))
    if workers > 1 and len(coalitions) > 4:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, coalitions))
    else:
        values = [one(c) for c in coalitions]
    return CoalitionValueTable(outcome, mode, mon.horizon, members, dict(zip(coalitions, values)))


def shapley(table: CoalitionValueTable, agent: str) -> float:
    members = table.scope
    if agent not in members:
        raise AgentNotInScope(f"agent {agent!r} is not in the scope {list(members)}")
    n = len(members)
    others = tuple(a for a in members if a != agent)
    total = 0.0
    for j in subsets(others):
        weight = factorial(len(j)) * factorial(n - len(j) - 1) / factorial(n)
        total += weight * (table[j + (agent,)] - table[j])
    return total


def bcr_degree(game: Game, profile: StrategyProfile, outcome: Outcome, agent: str,
               scope: Sequence[str] | None = None, mode: str = "min", *,
               table: CoalitionValueTable | None = None, **kw) -> float:
    """Shapley degree of ``agent`` for ``outcome`` over the coalitions of ``scope``."""
    members = _scope(game, scope)
    if agent not in members:
        raise AgentNotInScope(f"agent {agent!r} is not in the scope {list(members)}")
    if table is None:
        table = value_table(game, profile, outcome, members, mode, **kw)
    return shapley(table, agent)


def attributable_value(game: Game, profile: StrategyProfile, outcome: Outcome,
                       mode: str = "min", **kw) -> float:
    return (coalition_value(game, profile, outcome, game.agents, mode, **kw)
            - coalition_value(game, profile, outcome, (), mode, **kw))


@dataclass(frozen=True)
class ResponsibilityReport:
    mode: str
    horizon: int
    upsilon: float
    degrees: dict
    table: CoalitionValueTable

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "horizon": self.horizon,
            "upsilon": self.upsilon,
            "degrees": dict(self.degrees),
            "table": [{"coalition": list(c), "v": v} for c, v in self.table.rows()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def responsibility_report(game: Game, profile: StrategyProfile, outcome: Outcome,
                          agents: Sequence[str] | None = None, mode: str = "min",
                          **kw) -> ResponsibilityReport:
    """Degrees of ``agents`` (default all) over the full agent set."""
    table = value_table(game, profile, outcome, None, mode, **kw)
    wanted = game.agents if agents is None else _scope(game, agents)
    degrees = {a: shapley(table, a) for a in wanted}
    upsilon = table[game.agents] - table[()]
    return ResponsibilityReport(mode, table.horizon, upsilon, degrees, table)


# -- qualitative responsibility --------------------------------------------------


def _compatible(game: Game, fixed: StrategyProfile):
    idx = game.agent_index

    def allowed(s, joint):
        return all(fixed[a].prob(s, joint[idx[a]]) > 0 for a in fixed.scope)

    return allowed


def _search(game: Game, monitor, accept, allowed=None, start: str | None = None) -> History | None:
    """A history of ``monitor.horizon`` steps whose final monitor status
    passes ``accept``; joint actions are filtered by ``allowed``."""
    k = monitor.horizon
    s0 = start or game.initial
    first = (s0, monitor.update(monitor.start(), 0, s0))
    layer = {first: None}
    parents = [layer]
    for j in range(k):
        nxt: dict = {}
        for node in layer:
            s, st = node
            for a in game._joint[s]:
                if allowed is not None and not allowed(s, a):
                    continue
                for t, p in game.transitions[s, a].items():
                    if p <= 0:
                        continue
                    child = (t, monitor.update(st, j + 1, t))
                    if child not in nxt:
                        nxt[child] = (node, a)
        layer = nxt
        parents.append(layer)
    for node in sorted(layer, key=repr):
        if accept(node[1]):
            states, actions = [node[0]], []
            for j in range(k, 0, -1):
                node, a = parents[j][node]
                states.append(node[0])
                actions.append(a)
            return History(tuple(reversed(states)), tuple(reversed(actions)))
    return None


def _violated(monitor):
    return lambda st: monitor.verdict(st) is False


@dataclass(frozen=True)
class BcrWitness:
    agent: str
    coalition: Coalition
    history: History

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "coalition": list(self.coalition),
            "history": {"states": list(self.history.states),
                        "joint_actions": [list(a) for a in self.history.joint_actions]},
        }


def qualitative_bcr(game: Game, profile: StrategyProfile, outcome: Outcome, agent: str, *,
                    sat: SatFn | None = None) -> tuple[bool, BcrWitness | None]:
    """Whether ``agent`` is to blame: some coalition ``J`` without the agent
    admits a compatible history violating the outcome while ``J`` plus the
    agent forces it.  The first such ``J`` (by size, then order) is the
    witness."""
    profile.require_full(game)
    if agent not in game.agents:
        raise AgentNotInScope(f"unknown agent {agent!r}")
    mon = compile_outcome(game, outcome, sat)
    bad = _violated(mon)
    others = tuple(a for a in game.agents if a != agent)
    for j in subsets(others):
        with_i = tuple(a for a in game.agents if a in set(j) | {agent})
        if _search(game, mon, bad, _compatible(game, profile.restrict(with_i))) is not None:
            continue
        rho = _search(game, mon, bad, _compatible(game, profile.restrict(j)))
        if rho is not None:
            return True, BcrWitness(agent, j, rho)
    return False, None


def check_disjoint(game: Game, first: Outcome, second: Outcome, *,
                   sat: SatFn | None = None) -> bool:
    """No support history satisfies both outcomes."""
    mon = compile_outcome(game, AllOf((first, second)), sat)
    return _search(game, mon, lambda st: mon.verdict(st) is True) is None


def check_avoidable(game: Game, outcome: Outcome, *, sat: SatFn | None = None) -> bool:
    """Some profile keeps the outcome's probability below one."""
    value = extremal_probability(game, StrategyProfile(), outcome, "min", sat=sat).value
    return value < 1.0 - AVOID_TOL


def implies_on_support(game: Game, first: Outcome, second: Outcome, *,
                       sat: SatFn | None = None) -> bool:
    """Every support history satisfying ``first`` also satisfies ``second``."""
    a = compile_outcome(game, first, sat)
    b = compile_outcome(game, second, sat)
    mon = compile_outcome(game, AllOf((a, b)))
    return _search(game, mon, lambda st: a.verdict(st[0]) is True and b.verdict(st[1]) is False) is None


__all__ = [
    "BcrWitness",
    "CoalitionValueTable",
    "ResponsibilityReport",
    "attributable_value",
    "bcr_degree",
    "check_avoidable",
    "check_disjoint",
    "coalition_value",
    "implies_on_support",
    "qualitative_bcr",
    "responsibility_report",
    "shapley",
    "subsets",
    "value_table",
]
