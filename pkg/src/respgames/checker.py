"""Recursive evaluation of state formulas with probability, reward and
responsibility operators."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

from .engine import BOUND_TOL, compare, game_value_probability, robust_expected_reward, serial_policy
from .errors import UnknownAtom, UnknownProfile, UnknownReward, UnknownState
from .logic import (
    And,
    Atom,
    CoalitionD,
    CoalitionP,
    CoalitionR,
    Const,
    Not,
    StateFormula,
    format_formula,
)
from .model import Game, RewardStructure, StrategyProfile
from .responsibility import bcr_degree


@dataclass
class CheckContext:
    game: Game
    profiles: Mapping[str, StrategyProfile] = field(default_factory=dict)
    rewards: Mapping[str, RewardStructure] = field(default_factory=dict)
    tol: float = BOUND_TOL
    r_adversary: str = "hostile"
    mode: str = "min"
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for name, prof in self.profiles.items():
            prof.require_full(self.game)
        if self.r_adversary not in ("hostile", "any"):
            raise ValueError("r_adversary must be 'hostile' or 'any'")

    def sat(self, f: StateFormula) -> frozenset:
        return sat_set(self, f)


@dataclass(frozen=True)
class Verdict:
    formula: Any
    state: str
    truth: bool
    value: float | None = None
    witness: Any = None

    def to_dict(self) -> dict:
        out = {"formula": format_formula(self.formula), "state": self.state, "truth": self.truth}
        if self.value is not None:
            out["value"] = self.value
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _profile(ctx: CheckContext, name: str) -> StrategyProfile:
    try:
        return ctx.profiles[name]
    except KeyError:
        raise UnknownProfile(f"unknown profile {name!r}") from None


def _reward(ctx: CheckContext, name: str) -> RewardStructure:
    try:
        return ctx.rewards[name]
    except KeyError:
        raise UnknownReward(f"unknown reward structure {name!r}") from None


def eval_state(ctx: CheckContext, state: str, f: StateFormula) -> Verdict:
    game = ctx.game
    if state not in game.state_index:
        raise UnknownState(f"unknown state {state!r}")
    if isinstance(f, Const):
        return Verdict(f, state, f.value)
    if isinstance(f, Atom):
        if f.name not in game.atoms:
            raise UnknownAtom(f"unknown atom {f.name!r}")
        return Verdict(f, state, f.name in game.label_of(state))
    if isinstance(f, Not):
        return Verdict(f, state, not eval_state(ctx, state, f.arg).truth)
    if isinstance(f, And):
        truth = eval_state(ctx, state, f.left).truth and eval_state(ctx, state, f.right).truth
        return Verdict(f, state, truth)
    if isinstance(f, CoalitionP):
        res = game_value_probability(game, f.coalition, f.path, f.rel, f.bound,
                                     start=state, sat=ctx.sat, tol=ctx.tol)
        return Verdict(f, state, res.verdict, res.value, serial_policy(res.policy) or None)
    if isinstance(f, CoalitionR):
        res = robust_expected_reward(game, f.coalition, _reward(ctx, f.reward), f.path, f.rel,
                                     f.bound, adversary=ctx.r_adversary, start=state,
                                     sat=ctx.sat, tol=ctx.tol)
        return Verdict(f, state, res.verdict, res.value, serial_policy(res.policy) or None)
    if isinstance(f, CoalitionD):
        profile = _profile(ctx, f.profile)
        value = _degree(ctx, state, f, profile)
        return Verdict(f, state, compare(value, f.rel, f.bound, ctx.tol), value)
    raise TypeError(f"not a state formula: {f!r}")


def _degree(ctx: CheckContext, state: str, f: CoalitionD, profile: StrategyProfile) -> float:
    return bcr_degree(ctx.game, profile, f.path, f.agent, f.coalition, ctx.mode,
                      start=state, sat=ctx.sat)


def check(ctx: CheckContext, f: StateFormula) -> Verdict:
    return eval_state(ctx, ctx.game.initial, f)


def sat_set(ctx: CheckContext, f: StateFormula) -> frozenset:
    """States satisfying ``f``; memoised per formula in the context."""
    key = ("sat", f)
    if key not in ctx.cache:
        ctx.cache[key] = frozenset(s for s in ctx.game.states if eval_state(ctx, s, f).truth)
    return ctx.cache[key]
