"""Finite-horizon probabilities and rewards on concurrent stochastic games.

Everything is computed exactly (up to float64) by dynamic programming over
(position, state, monitor status):

* :func:`sat_probability` / :func:`expected_reward` for a full profile;
* :func:`extremal_probability` where the agents outside a partial profile
  jointly minimise or maximise (an MDP, solved with step-indexed
  deterministic policies);
* :func:`game_value_probability` / :func:`robust_expected_reward` where a
  coalition plays a zero-sum game against the remaining agents, one matrix
  game per (position, state, status).
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidHistory
from .logic import Outcome
from .matrix import matrix_game_value
from .model import (
    Game,
    History,
    RewardStructure,
    StrategyProfile,
    history_factor,
    joint_weights,
    validate_history,
)
from .objectives import SatFn, compile_outcome

BOUND_TOL = 1e-9
TIE_TOL = 1e-12


def compare(value: float, rel: str, bound: float, tol: float = BOUND_TOL) -> bool:
    """``value rel bound``; a value within ``tol`` of the bound satisfies the
    non-strict relation and fails the strict one."""
    if rel == ">=":
        return value >= bound - tol
    if rel == ">":
        return value > bound + tol
    if rel == "<=":
        return value <= bound + tol
    if rel == "<":
        return value < bound - tol
    raise ValueError(f"unknown relation {rel!r}")


def maximising(rel: str) -> bool:
    return rel in (">=", ">")


class ExtremalResult(NamedTuple):
    value: float
    policy: dict


class GameResult(NamedTuple):
    value: float
    verdict: bool
    policy: dict


@dataclass(frozen=True)
class StepValue:
    """Optimal values for still-open histories: ``values[j, s]`` is the value
    when position ``j`` is reached in state ``s`` with the monitor open."""

    values: np.ndarray
    states: tuple[str, ...]


# -- single histories ----------------------------------------------------------


def path_probability(game: Game, profile: StrategyProfile, history: History) -> float:
    """Probability of ``history`` under a full profile: product over steps of
    the joint-action probability times the transition probability."""
    profile.require_full(game)
    validate_history(game, history)
    p = 1.0
    for j in range(len(history)):
        p *= history_factor(game, profile, history, j)
    return p


# -- full profile -------------------------------------------------------------------


def sat_probability(game: Game, profile: StrategyProfile, outcome: Outcome, *,
                    start: str | None = None, sat: SatFn | None = None) -> float:
    """Probability that a history of the induced chain satisfies ``outcome``.

    Forward propagation of the joint (state, status) distribution.
    """
    profile.require_full(game)
    mon = compile_outcome(game, outcome, sat)
    k = mon.horizon
    mass = {(start or game.initial, mon.start()): 1.0}
    total = 0.0
    for j in range(k + 1):
        nxt: dict = {}
        for (s, st), m in mass.items():
            st = mon.update(st, j, s)
            v = mon.verdict(st)
            if v is True:
                total += m
                continue
            if v is False:
                continue
            if j == k:
                raise RuntimeError("monitor undecided at its horizon")
            probs = joint_weights(game, profile, s) @ game.kernel(s)
            for t in np.flatnonzero(probs):
                key = (game.states[t], st)
                nxt[key] = nxt.get(key, 0.0) + m * probs[t]
        mass = nxt
    return total


def expected_reward(game: Game, profile: StrategyProfile, reward: RewardStructure,
                    outcome: Outcome, *, start: str | None = None,
                    sat: SatFn | None = None) -> float:
    """Expected accumulated reward over the horizon, counted only on histories
    satisfying ``outcome``.

    A history of ``k`` steps accumulates the state rewards of positions
    ``0..k`` and the action rewards of steps ``0..k-1``.
    """
    profile.require_full(game)
    solver = _Solver(game, compile_outcome(game, outcome, sat), profile, (), (), reward)
    return solver.reward_value(start or game.initial)


# -- optimisation -----------------------------------------------------------------


class _Solver:
    """Backward induction where ``fixed`` agents follow their strategies,
    ``maxers`` maximise and ``miners`` minimise (coalitions act as one
    player, choosing joint actions)."""

    def __init__(self, game: Game, monitor, fixed: StrategyProfile,
                 maxers: Sequence[str], miners: Sequence[str],
                 reward: RewardStructure | None = None):
        self.game = game
        self.mon = monitor
        self.k = monitor.horizon
        self.fixed = fixed
        self.maxers = tuple(maxers)
        self.miners = tuple(miners)
        self.reward = reward
        self.cache: dict = {}
        self.future: dict = {}
        self.policy: dict = {}
        self._layout = {s: self._state_layout(s) for s in game.states}

    def _state_layout(self, s: str):
        g = self.game
        joint = g._joint[s]
        w = joint_weights(g, self.fixed, s)
        idx = g.agent_index
        row_acts = list(itertools.product(*(g.availability[s, a] for a in self.maxers)))
        col_acts = list(itertools.product(*(g.availability[s, a] for a in self.miners)))
        rpos = {a: i for i, a in enumerate(row_acts)}
        cpos = {a: i for i, a in enumerate(col_acts)}
        rows = np.array([rpos[tuple(a[idx[ag]] for ag in self.maxers)] for a in joint])
        cols = np.array([cpos[tuple(a[idx[ag]] for ag in self.miners)] for a in joint])
        live = np.flatnonzero(w > 0)
        ra = None
        if self.reward is not None:
            ra = np.array([self.reward.action_reward(s, a) for a in joint])
        return dict(w=w, rows=rows, cols=cols, live=live, row_acts=row_acts,
                    col_acts=col_acts, kernel=g.kernel(s), ra=ra)

    def _decide(self, j: int, s: str, st, per_joint: np.ndarray) -> float:
        lay = self._layout[s]
        m = np.zeros((len(lay["row_acts"]), len(lay["col_acts"])))
        np.add.at(m, (lay["rows"], lay["cols"]), lay["w"] * per_joint)
        key = (j, s, st)
        if m.shape == (1, 1):
            return float(m[0, 0])
        if m.shape[1] == 1:
            col = m[:, 0]
            best = col.max()
            i = int(np.flatnonzero(col >= best - TIE_TOL)[0])
            self.policy[key] = dict(zip(self.maxers, lay["row_acts"][i]))
            return float(col[i])
        if m.shape[0] == 1:
            row = m[0]
            best = row.min()
            i = int(np.flatnonzero(row <= best + TIE_TOL)[0])
            self.policy[key] = dict(zip(self.miners, lay["col_acts"][i]))
            return float(row[i])
        v, x, y = matrix_game_value(m)
        self.policy[key] = {
            "max": {",".join(a): float(p) for a, p in zip(lay["row_acts"], x) if p > 0},
            "min": {",".join(a): float(p) for a, p in zip(lay["col_acts"], y) if p > 0},
        }
        return v

    # probability objective
    def prob(self, j: int, s: str, st) -> float:
        key = (j, s, st)
        if key in self.cache:
            return self.cache[key]
        st2 = self.mon.update(st, j, s)
        verdict = self.mon.verdict(st2)
        if verdict is not None:
            val = 1.0 if verdict else 0.0
        else:
            lay = self._layout[s]
            kern = lay["kernel"]
            support = np.flatnonzero(kern[lay["live"]].sum(axis=0))
            nxt = np.zeros(len(self.game.states))
            for t in support:
                nxt[t] = self.prob(j + 1, self.game.states[t], st2)
            val = self._decide(j, s, st2, kern @ nxt)
        self.cache[key] = val
        return val

    # reward objective
    def _future(self, j: int, s: str) -> float:
        """Game value of the rewards still to come from position ``j`` on
        (action rewards of steps ``j..k-1``, state rewards of ``j+1..k``)."""
        key = (j, s)
        if key in self.future:
            return self.future[key]
        if j >= self.k:
            val = 0.0
        else:
            lay = self._layout[s]
            kern = lay["kernel"]
            support = np.flatnonzero(kern[lay["live"]].sum(axis=0))
            nxt = np.zeros(len(self.game.states))
            for t in support:
                t_name = self.game.states[t]
                nxt[t] = self.reward.state_reward(t_name) + self._future(j + 1, t_name)
            val = self._decide(j, s, ("future",), lay["ra"] + kern @ nxt)
        self.future[key] = val
        return val

    def rew(self, j: int, s: str, st, acc: float) -> float:
        key = (j, s, st, acc)
        if key in self.cache:
            return self.cache[key]
        st2 = self.mon.update(st, j, s)
        verdict = self.mon.verdict(st2)
        acc2 = acc + self.reward.state_reward(s)
        if verdict is False:
            val = 0.0
        elif verdict is True:
            val = acc2 + self._future(j, s)
        else:
            lay = self._layout[s]
            kern = lay["kernel"]
            per_joint = np.zeros(len(lay["w"]))
            for q in lay["live"]:
                for t in np.flatnonzero(kern[q]):
                    per_joint[q] += kern[q, t] * self.rew(
                        j + 1, self.game.states[t], st2, acc2 + lay["ra"][q])
            val = self._decide(j, s, st2, per_joint)
        self.cache[key] = val
        return val

    def prob_value(self, start: str) -> float:
        return self.prob(0, start, self.mon.start())

    def reward_value(self, start: str) -> float:
        return self.rew(0, start, self.mon.start(), 0.0)


def extremal_probability(game: Game, fixed: StrategyProfile, outcome: Outcome,
                         direction: str = "min", *, start: str | None = None,
                         sat: SatFn | None = None) -> ExtremalResult:
    """Minimal (or maximal) satisfaction probability when the agents outside
    ``fixed`` jointly choose actions against (or for) ``outcome``.

    The witness policy maps ``(step, state, status)`` to the adversaries'
    joint action; ties go to the lowest action index.
    """
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    others = [a for a in game.agents if a not in fixed]
    mon = compile_outcome(game, outcome, sat)
    if direction == "min":
        solver = _Solver(game, mon, fixed, (), others)
    else:
        solver = _Solver(game, mon, fixed, others, ())
    value = solver.prob_value(start or game.initial)
    return ExtremalResult(value, solver.policy)


def step_values(game: Game, fixed: StrategyProfile, outcome: Outcome, direction: str = "min",
                *, sat: SatFn | None = None) -> StepValue:
    """Table of optimal open-status values for every position and state."""
    others = [a for a in game.agents if a not in fixed]
    mon = compile_outcome(game, outcome, sat)
    if getattr(mon, "kind", None) is None:
        raise TypeError("step tables are defined for single path formulas")
    solver = _Solver(game, mon, fixed, others if direction == "max" else (),
                     others if direction == "min" else ())
    vals = np.zeros((mon.horizon + 1, len(game.states)))
    for j in range(mon.horizon + 1):
        for i, s in enumerate(game.states):
            vals[j, i] = solver.prob(j, s, mon.start())
    return StepValue(vals, game.states)


def game_value_probability(game: Game, coalition: Sequence[str], outcome: Outcome,
                           rel: str, bound: float, *, start: str | None = None,
                           sat: SatFn | None = None, tol: float = BOUND_TOL) -> GameResult:
    """Value of the zero-sum game in which ``coalition`` pushes the
    satisfaction probability towards ``rel bound`` and everyone else opposes."""
    coalition = [a for a in game.agents if a in set(coalition)]
    others = [a for a in game.agents if a not in coalition]
    mon = compile_outcome(game, outcome, sat)
    if maximising(rel):
        solver = _Solver(game, mon, StrategyProfile(), coalition, others)
    else:
        solver = _Solver(game, mon, StrategyProfile(), others, coalition)
    value = solver.prob_value(start or game.initial)
    return GameResult(value, compare(value, rel, bound, tol), solver.policy)


def robust_expected_reward(game: Game, coalition: Sequence[str], reward: RewardStructure,
                           outcome: Outcome, rel: str, bound: float, *,
                           adversary: str = "hostile", start: str | None = None,
                           sat: SatFn | None = None, tol: float = BOUND_TOL) -> GameResult:
    """Optimal expected ``reward`` (counted on histories satisfying
    ``outcome``) that ``coalition`` can guarantee in the direction of ``rel``.

    ``adversary="hostile"`` lets the other agents oppose; ``"any"`` lets
    them cooperate with the coalition.
    """
    if adversary not in ("hostile", "any"):
        raise ValueError("adversary must be 'hostile' or 'any'")
    coalition = [a for a in game.agents if a in set(coalition)]
    others = [a for a in game.agents if a not in coalition]
    mon = compile_outcome(game, outcome, sat)
    if adversary == "any":
        coalition, others = list(game.agents), []
    if maximising(rel):
        solver = _Solver(game, mon, StrategyProfile(), coalition, others, reward)
    else:
        solver = _Solver(game, mon, StrategyProfile(), others, coalition, reward)
    value = solver.reward_value(start or game.initial)
    return GameResult(value, compare(value, rel, bound, tol), solver.policy)


def serial_policy(policy: dict) -> list[dict]:
    """JSON-friendly form of a witness policy."""
    out = []
    for (j, s, st), choice in sorted(policy.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]))):
        if st == ("future",):
            continue
        out.append({"step": j, "state": s, "status": str(st), "choice": choice})
    return out


def enumerate_histories(game: Game, length: int, start: str | None = None,
                        allowed=None):
    """All histories with ``length`` steps in the support graph.

    ``allowed(state, joint)`` filters the joint actions (default: all
    available ones)."""
    def rec(states, actions):
        if len(actions) == length:
            yield History(tuple(states), tuple(actions))
            return
        s = states[-1]
        for a in game._joint[s]:
            if allowed is not None and not allowed(s, a):
                continue
            for t, p in game.transitions[s, a].items():
                if p > 0:
                    yield from rec(states + [t], actions + [a])

    if length < 0:
        raise InvalidHistory("negative history length")
    yield from rec([start or game.initial], [])
