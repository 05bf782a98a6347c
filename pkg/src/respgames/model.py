"""Concurrent stochastic games, reward structures, strategies and histories.

All objects here are plain frozen dataclasses.  A :class:`Game` validates
itself on construction, so any ``Game`` instance in circulation satisfies the
well-formedness invariants (total transition function over available joint
actions, normalised distributions, known identifiers).  Internally the game
keeps dense integer indices and per-state transition matrices for the
numerical engines; every public signature uses names.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DistributionNotNormalized,
    EmptyAvailability,
    IncompatibleHistory,
    InvalidHistory,
    InvalidStrategy,
    MissingTransition,
    ModelError,
    PartialProfile,
    UnknownIdentifier,
    UnknownState,
)

PROB_TOL = 1e-9

JointAction = tuple[str, ...]
Coalition = tuple[str, ...]


@dataclass(frozen=True, eq=True)
class Game:
    """A concurrent stochastic multi-player game.

    ``availability`` is always fully expanded: one entry per (state, agent).
    ``transitions`` maps ``(state, joint_action)`` to a successor
    distribution; joint actions are tuples ordered like ``agents``.
    """

    agents: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    actions: Mapping[str, tuple[str, ...]]
    availability: Mapping[tuple[str, str], tuple[str, ...]]
    transitions: Mapping[tuple[str, JointAction], Mapping[str, float]]
    atoms: frozenset[str]
    labels: Mapping[str, frozenset[str]]

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        violations = _game_violations(self)
        if violations:
            first = violations[0]
            message = "; ".join(str(v) for v in violations)
            raise type(first)(message, violations)

    # -- indices -----------------------------------------------------------

    @cached_property
    def state_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def agent_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.agents)}

    @cached_property
    def _joint(self) -> dict[str, list[JointAction]]:
        return {
            s: list(itertools.product(*(self.availability[s, ag] for ag in self.agents)))
            for s in self.states
        }

    @cached_property
    def _kernels(self) -> dict[str, np.ndarray]:
        out = {}
        for s in self.states:
            rows = np.zeros((len(self._joint[s]), len(self.states)))
            for j, a in enumerate(self._joint[s]):
                for t, p in self.transitions[s, a].items():
                    rows[j, self.state_index[t]] += p
            rows.setflags(write=False)
            out[s] = rows
        return out

    def joint_actions(self, state: str) -> list[JointAction]:
        if state not in self.state_index:
            raise UnknownState(f"unknown state {state!r}")
        return list(self._joint[state])

    def kernel(self, state: str) -> np.ndarray:
        """Transition matrix at ``state``: one row per joint action (in
        :meth:`joint_actions` order), one column per state."""
        return self._kernels[state]

    def successors(self, state: str, joint: JointAction) -> dict[str, float]:
        return dict(self.transitions[state, tuple(joint)])

    def label_of(self, state: str) -> frozenset[str]:
        return self.labels.get(state, frozenset())

    def states_with(self, atom: str) -> frozenset[str]:
        return frozenset(s for s in self.states if atom in self.label_of(s))


def _game_violations(g: Game) -> list[ModelError]:
    out: list[ModelError] = []
    if not g.agents:
        out.append(ModelError("game has no agents"))
    if len(set(g.agents)) != len(g.agents):
        out.append(ModelError("duplicate agent identifiers"))
    if not g.states:
        out.append(ModelError("game has no states"))
    if len(set(g.states)) != len(g.states):
        out.append(ModelError("duplicate state identifiers"))
    states = set(g.states)
    if g.initial not in states:
        out.append(UnknownIdentifier(f"initial state {g.initial!r} is not a state"))
    for ag in g.actions:
        if ag not in g.agents:
            out.append(UnknownIdentifier(f"actions declared for unknown agent {ag!r}"))
    for ag in g.agents:
        if not g.actions.get(ag):
            out.append(EmptyAvailability(f"agent {ag!r} has no actions"))
    for (s, ag), avail in g.availability.items():
        if s not in states or ag not in g.agents:
            out.append(UnknownIdentifier(f"availability for unknown ({s!r}, {ag!r})"))
            continue
        if not avail:
            out.append(EmptyAvailability(f"no available action for {ag!r} at {s!r}"))
        for a in avail:
            if a not in g.actions.get(ag, ()):
                out.append(UnknownIdentifier(f"action {a!r} is not an action of {ag!r}"))
    for s in g.states:
        for ag in g.agents:
            if (s, ag) not in g.availability:
                out.append(EmptyAvailability(f"availability of {ag!r} at {s!r} missing"))
    for s, labels in g.labels.items():
        if s not in states:
            out.append(UnknownIdentifier(f"label for unknown state {s!r}"))
        for atom in labels:
            if atom not in g.atoms:
                out.append(UnknownIdentifier(f"label {atom!r} of {s!r} is not a declared atom"))
    if out:
        # joint-action checks below rely on consistent availability
        return out

    expected = set()
    for s in g.states:
        for a in itertools.product(*(g.availability[s, ag] for ag in g.agents)):
            expected.add((s, a))
            if (s, a) not in g.transitions:
                out.append(MissingTransition(f"no transition for {s} {_fmt_joint(a)}"))
    for (s, a), dist in g.transitions.items():
        if (s, a) not in expected:
            out.append(UnknownIdentifier(f"transition for unavailable {s} {_fmt_joint(a)}"))
            continue
        total = 0.0
        for t, p in dist.items():
            if t not in states:
                out.append(UnknownIdentifier(f"successor {t!r} of {s} {_fmt_joint(a)} unknown"))
            if not (math.isfinite(p) and -PROB_TOL <= p <= 1 + PROB_TOL):
                out.append(DistributionNotNormalized(
                    f"probability {p} of {s} {_fmt_joint(a)} -> {t} outside [0,1]"))
            total += p
        if abs(total - 1.0) > PROB_TOL:
            out.append(DistributionNotNormalized(
                f"distribution of {s} {_fmt_joint(a)} sums to {total!r}"))
    return out


def _fmt_joint(a: Sequence[str]) -> str:
    return "(" + ",".join(a) + ")"


def validate_game(raw: Mapping | Game) -> Game:
    """Build a :class:`Game` from a plain description, reporting every problem.

    ``raw`` keys: ``agents``, ``states``, ``initial``, ``actions`` (agent ->
    actions), optional ``availability`` (``{state: {agent: actions}}``,
    defaults to the full action set), ``transitions`` (``{(state, joint):
    {succ: p}}``), optional ``atoms`` (defaults to the union of labels) and
    ``labels`` (state -> atoms).
    """
    if isinstance(raw, Game):
        return raw
    agents = tuple(raw.get("agents", ()))
    states = tuple(raw.get("states", ()))
    actions = {ag: tuple(acts) for ag, acts in dict(raw.get("actions", {})).items()}
    availability: dict[tuple[str, str], tuple[str, ...]] = {}
    given = raw.get("availability") or {}
    for s in states:
        for ag in agents:
            availability[s, ag] = tuple(actions.get(ag, ()))
    for s, per_agent in given.items():
        for ag, acts in per_agent.items():
            availability[s, ag] = tuple(acts)
    transitions = {
        (s, tuple(a)): {t: float(p) for t, p in dist.items()}
        for (s, a), dist in dict(raw.get("transitions", {})).items()
    }
    labels = {s: frozenset(ls) for s, ls in dict(raw.get("labels", {})).items()}
    if raw.get("atoms") is None:
        atoms = frozenset().union(*labels.values()) if labels else frozenset()
    else:
        atoms = frozenset(raw["atoms"])
    return Game(
        agents=agents,
        states=states,
        initial=raw.get("initial", states[0] if states else ""),
        actions=actions,
        availability=availability,
        transitions=transitions,
        atoms=atoms,
        labels=labels,
    )


def joint_actions(game: Game, state: str) -> list[JointAction]:
    """Available joint actions at ``state`` in lexicographic (agent, action) order."""
    return game.joint_actions(state)


def canonical_coalition(game: Game, members: Iterable[str]) -> Coalition:
    """Sorted (by agent order), duplicate-free coalition."""
    members = set(members)
    unknown = members - set(game.agents)
    if unknown:
        raise UnknownIdentifier(f"unknown agents {sorted(unknown)}")
    return tuple(a for a in game.agents if a in members)


# -- rewards -----------------------------------------------------------------


@dataclass(frozen=True)
class ActionRule:
    """``value`` is added whenever ``state`` (None = any) and the per-agent
    ``pattern`` (None = wildcard) match the current state and joint action."""

    state: str | None
    pattern: tuple[str | None, ...]
    value: float

    def matches(self, state: str, joint: JointAction) -> bool:
        if self.state is not None and self.state != state:
            return False
        return all(p is None or p == a for p, a in zip(self.pattern, joint))


@dataclass(frozen=True)
class RewardStructure:
    name: str
    state_rewards: Mapping[str, float] = field(default_factory=dict)
    action_rules: tuple[ActionRule, ...] = ()

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        values = list(self.state_rewards.values()) + [r.value for r in self.action_rules]
        if not all(math.isfinite(v) for v in values):
            raise ModelError(f"reward structure {self.name!r} has a non-finite value")

    def state_reward(self, state: str) -> float:
        return float(self.state_rewards.get(state, 0.0))

    def action_reward(self, state: str, joint: JointAction) -> float:
        return float(sum(r.value for r in self.action_rules if r.matches(state, joint)))


def reward_of(reward: RewardStructure, state: str, joint: JointAction) -> float:
    """State reward plus the sum of every matching action rule."""
    return reward.state_reward(state) + reward.action_reward(state, tuple(joint))


def validate_reward(game: Game, reward: RewardStructure) -> RewardStructure:
    for s in reward.state_rewards:
        if s not in game.state_index:
            raise UnknownIdentifier(f"reward {reward.name!r} names unknown state {s!r}")
    for rule in reward.action_rules:
        if rule.state is not None and rule.state not in game.state_index:
            raise UnknownIdentifier(f"reward {reward.name!r} names unknown state {rule.state!r}")
        if len(rule.pattern) != len(game.agents):
            raise ModelError(f"reward {reward.name!r}: pattern arity {len(rule.pattern)}")
        for ag, a in zip(game.agents, rule.pattern):
            if a is not None and a not in game.actions[ag]:
                raise UnknownIdentifier(f"reward {reward.name!r}: {a!r} is not an action of {ag!r}")
    return reward


# -- strategies ----------------------------------------------------------------


@dataclass(frozen=True)
class Strategy:
    """Memoryless randomised strategy: state -> distribution over actions."""

    agent: str
    choice: Mapping[str, Mapping[str, float]]

    __hash__ = None  # type: ignore[assignment]

    def prob(self, state: str, action: str) -> float:
        return float(self.choice.get(state, {}).get(action, 0.0))


@dataclass(frozen=True)
class StrategyProfile:
    """Strategies for a subset (``scope``) of the agents."""

    entries: Mapping[str, Strategy] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        for ag, strat in self.entries.items():
            if strat.agent != ag:
                raise InvalidStrategy(f"profile entry {ag!r} holds a strategy for {strat.agent!r}")

    @property
    def scope(self) -> frozenset[str]:
        return frozenset(self.entries)

    def __contains__(self, agent: str) -> bool:
        return agent in self.entries

    def __getitem__(self, agent: str) -> Strategy:
        return self.entries[agent]

    def restrict(self, agents: Iterable[str]) -> StrategyProfile:
        keep = set(agents)
        return StrategyProfile({a: s for a, s in self.entries.items() if a in keep})

    def is_full(self, game: Game) -> bool:
        return set(game.agents) <= set(self.entries)

    def require_full(self, game: Game) -> None:
        missing = [a for a in game.agents if a not in self.entries]
        if missing:
            raise PartialProfile(f"profile lacks strategies for {missing}")


def make_strategy(game: Game, agent: str, choice: Mapping[str, Mapping[str, float]] | None = None) -> Strategy:
    """Strategy for ``agent``; states not mentioned in ``choice`` play uniformly."""
    if agent not in game.agent_index:
        raise UnknownIdentifier(f"unknown agent {agent!r}")
    choice = dict(choice or {})
    full = {}
    for s in game.states:
        if s in choice:
            full[s] = {a: float(p) for a, p in choice[s].items()}
        else:
            avail = game.availability[s, agent]
            full[s] = {a: 1.0 / len(avail) for a in avail}
    for s in choice:
        if s not in game.state_index:
            raise UnknownState(f"strategy of {agent!r} names unknown state {s!r}")
    return validate_strategy(game, Strategy(agent, full))


def make_profile(game: Game, spec: Mapping[str, Mapping[str, Mapping[str, float]]]) -> StrategyProfile:
    """Profile from ``{agent: {state: {action: p}}}`` (unlisted states uniform)."""
    for ag in spec:
        if ag not in game.agent_index:
            raise UnknownIdentifier(f"profile names unknown agent {ag!r}")
    return StrategyProfile({ag: make_strategy(game, ag, spec[ag]) for ag in game.agents if ag in spec})


def pure_profile(game: Game, choice: Mapping[str, str | Mapping[str, str]]) -> StrategyProfile:
    """Deterministic profile.  ``choice[agent]`` is either one action used at
    every state where it is available or a ``{state: action}`` map."""
    spec = {}
    for ag, c in choice.items():
        if isinstance(c, str):
            spec[ag] = {s: {c: 1.0} for s in game.states if c in game.availability[s, ag]}
        else:
            spec[ag] = {s: {a: 1.0} for s, a in c.items()}
    return make_profile(game, spec)


def validate_strategy(game: Game, strategy: Strategy) -> Strategy:
    ag = strategy.agent
    if ag not in game.agent_index:
        raise UnknownIdentifier(f"unknown agent {ag!r}")
    for s in game.states:
        dist = strategy.choice.get(s)
        if dist is None:
            raise InvalidStrategy(f"strategy of {ag!r} has no distribution at {s!r}")
        avail = game.availability[s, ag]
        total = 0.0
        for a, p in dist.items():
            if not (-PROB_TOL <= p <= 1 + PROB_TOL):
                raise InvalidStrategy(f"{ag!r} at {s!r}: probability {p} of {a!r} outside [0,1]")
            if p > 0 and a not in avail:
                raise InvalidStrategy(f"{ag!r} at {s!r}: {a!r} is not available")
            total += p
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidStrategy(f"{ag!r} at {s!r}: distribution sums to {total!r}")
    return strategy


def validate_profile(game: Game, profile: StrategyProfile) -> StrategyProfile:
    for ag, strat in profile.entries.items():
        if ag not in game.agent_index:
            raise UnknownIdentifier(f"profile names unknown agent {ag!r}")
        validate_strategy(game, strat)
    return profile


def joint_weights(game: Game, profile: StrategyProfile, state: str) -> np.ndarray:
    """Probability mass the fixed agents of ``profile`` put on each joint action
    at ``state`` (agents outside the profile contribute a factor 1)."""
    joint = game._joint[state]
    w = np.ones(len(joint))
    for k, ag in enumerate(game.agents):
        if ag in profile:
            dist = profile[ag].choice.get(state, {})
            w *= np.array([dist.get(a[k], 0.0) for a in joint])
    return w


# -- histories -----------------------------------------------------------------


@dataclass(frozen=True)
class History:
    """``states[0] --joint_actions[0]--> states[1] ... states[-1]``."""

    states: tuple[str, ...]
    joint_actions: tuple[JointAction, ...] = ()

    def __post_init__(self) -> None:
        if not self.states:
            raise InvalidHistory("a history has at least one state")
        if len(self.joint_actions) != len(self.states) - 1:
            raise InvalidHistory("a history needs exactly one joint action per step")

    def __len__(self) -> int:
        return len(self.joint_actions)

    @classmethod
    def of(cls, *items) -> History:
        """``History.of("s0", ("b1", "b2"), "s1")``."""
        return cls(tuple(items[0::2]), tuple(tuple(a) for a in items[1::2]))


def validate_history(game: Game, history: History) -> History:
    for s in history.states:
        if s not in game.state_index:
            raise UnknownState(f"unknown state {s!r} in history")
    for j, a in enumerate(history.joint_actions):
        s, t = history.states[j], history.states[j + 1]
        if (s, a) not in game.transitions:
            raise InvalidHistory(f"joint action {_fmt_joint(a)} unavailable at {s!r}")
        if game.transitions[s, a].get(t, 0.0) <= 0.0:
            raise InvalidHistory(f"{s} {_fmt_joint(a)} -> {t} has probability zero")
    return history


def history_factor(game: Game, profile: StrategyProfile, history: History, j: int) -> float:
    s, a, t = history.states[j], history.joint_actions[j], history.states[j + 1]
    w = 1.0
    for k, ag in enumerate(game.agents):
        w *= profile[ag].prob(s, a[k])
    if w == 0.0:
        raise IncompatibleHistory(f"step {j}: profile never plays {_fmt_joint(a)} at {s!r}")
    return w * game.transitions[s, a].get(t, 0.0)
