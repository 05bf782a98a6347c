"""Seeded Monte Carlo estimates, used as an independent oracle."""

from __future__ import annotations

import math

import numpy as np

from .logic import Outcome
from .model import Game, RewardStructure, StrategyProfile, joint_weights
from .objectives import SatFn, compile_outcome

BLOCK = 10_000


def _block(game: Game, profile: StrategyProfile, mon, reward, n: int, rng, start: str) -> np.ndarray:
    k = mon.horizon
    n_states = len(game.states)
    # per state: cumulative over (joint action, successor) pairs
    tables = {}
    for i, s in enumerate(game.states):
        w = joint_weights(game, profile, s)
        pair = (w[:, None] * game.kernel(s)).ravel()
        tables[i] = (np.cumsum(pair), game.kernel(s).shape[1])
    ra = None
    if reward is not None:
        ra = {i: np.array([reward.action_reward(s, a) for a in game.joint_actions(s)])
              for i, s in enumerate(game.states)}
        rs = np.array([reward.state_reward(s) for s in game.states])
    paths = np.empty((n, k + 1), dtype=np.int64)
    acts = np.empty((n, k), dtype=np.int64)
    paths[:, 0] = game.state_index[start]
    for j in range(k):
        u = rng.random(n)
        cur = paths[:, j]
        for i in range(n_states):
            mask = cur == i
            if not mask.any():
                continue
            cum, width = tables[i]
            pick = np.searchsorted(cum, u[mask] * cum[-1], side="right")
            pick = np.minimum(pick, len(cum) - 1)
            acts[mask, j] = pick // width
            paths[mask, j + 1] = pick % width
    out = np.empty(n)
    for r in range(n):
        st = mon.start()
        verdict = None
        for j in range(k + 1):
            st = mon.update(st, j, game.states[paths[r, j]])
            verdict = mon.verdict(st)
            if verdict is not None:
                break
        if reward is None:
            out[r] = 1.0 if verdict else 0.0
        elif not verdict:
            out[r] = 0.0
        else:
            total = rs[paths[r]].sum()
            for j in range(k):
                total += ra[paths[r, j]][acts[r, j]]
            out[r] = total
    return out


def monte_carlo(game: Game, profile: StrategyProfile, outcome: Outcome, samples: int,
                seed: int = 0, *, reward: RewardStructure | None = None,
                start: str | None = None, sat: SatFn | None = None) -> tuple[float, float]:
    """Estimate of the satisfaction probability of ``outcome`` (or, with
    ``reward``, of the expected reward on satisfying histories) and its
    standard error.

    Sample blocks of fixed size draw from independent child streams of the
    master seed, so results depend only on ``(seed, samples)``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    profile.require_full(game)
    mon = compile_outcome(game, outcome, sat)
    n_blocks = math.ceil(samples / BLOCK)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    parts = []
    for b, child in enumerate(children):
        n = min(BLOCK, samples - b * BLOCK)
        parts.append(_block(game, profile, mon, reward, n, np.random.default_rng(child),
                            start or game.initial))
    values = np.concatenate(parts)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, stderr
