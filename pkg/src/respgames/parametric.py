"""Parametric strategy spaces: transition polynomials over action-probability
parameters, symbolic probabilities/payoffs/degrees and utilities."""

from __future__ import annotations

import itertools
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .engine import expected_reward
from .errors import MissingConstantStrategy, MissingParameter, ModelError, NonPolynomial
from .logic import TRUE, Always, Outcome, horizon
from .model import Game, RewardStructure, Strategy, StrategyProfile, validate_game, validate_profile
from .objectives import SatFn, compile_outcome
from .polynomial import Polynomial
from .responsibility import bcr_degree, subsets

ADMISSIBLE_TOL = 1e-9
GRID_STEPS = 20
GRID_CAP = 20_000
VERIFY_POINTS = 25
CANDIDATE_CAP = 4096


def parameter_name(agent: str, state: str, action: str) -> str:
    return f"x_{agent}_{state}_{action}"


@dataclass(frozen=True, eq=False)
class Psmas:
    """A game whose parametrised agents play symbolic memoryless strategies.

    ``parameters`` lists one name per (agent, state, available action).  In
    reduced form the polynomials only use ``variables``: the last available
    action of each (agent, state) is written as one minus the others, and
    single-action choices are the constant 1.
    """

    game: Game
    agents: tuple[str, ...]
    constants: StrategyProfile
    reduced: bool
    parameters: tuple[str, ...]
    bindings: dict
    variables: tuple[str, ...]
    action_polys: dict = field(repr=False)

    def action_poly(self, agent: str, state: str, action: str) -> Polynomial:
        if agent in self.agents:
            return self.action_polys[agent, state, action]
        return Polynomial.constant(self.constants[agent].prob(state, action), self.variables)

    def joint_weights(self, state: str, pure: Mapping | None = None,
                      symbolic: Sequence[str] | None = None) -> list[Polynomial]:
        """Weight polynomial per joint action at ``state``.

        ``pure`` maps adversary agents to ``{state: action}``; agents listed in
        neither ``pure`` nor ``symbolic`` (default: all) use their parametric
        or constant strategy.
        """
        g = self.game
        pure = pure or {}
        per_agent = []
        for ag in g.agents:
            acts = g.availability[state, ag]
            if ag in pure:
                chosen = pure[ag].get(state, acts[0])
                per_agent.append({a: (1.0 if a == chosen else 0.0) for a in acts})
            elif symbolic is not None and ag not in symbolic:
                raise ValueError(f"agent {ag!r} has no strategy")
            else:
                per_agent.append({a: self.action_poly(ag, state, a) for a in acts})
        out = []
        for joint in g._joint[state]:
            w: Polynomial | float = 1.0
            for d, a in zip(per_agent, joint):
                f = d[a]
                if isinstance(f, float):
                    if f == 0.0:
                        w = 0.0
                        break
                    continue
                w = f if isinstance(w, float) else w * f
            out.append(w if isinstance(w, Polynomial) else Polynomial.constant(w, self.variables))
        return out

    def transition(self, state: str, joint: Sequence[str], succ: str) -> Polynomial:
        joint = tuple(joint)
        idx = self.game._joint[state].index(joint)
        p = self.game.transitions[state, joint].get(succ, 0.0)
        return self.joint_weights(state)[idx].scale(p).extend(self.variables)

    @property
    def transitions(self) -> dict:
        out = {}
        for s in self.game.states:
            ws = self.joint_weights(s)
            for joint, w in zip(self.game._joint[s], ws):
                for t, p in self.game.transitions[s, joint].items():
                    out[s, joint, t] = w.scale(p).extend(self.variables)
        return out

    def points(self) -> list[tuple[str, str, tuple[str, ...]]]:
        """Parametrised (agent, state, actions) choices with at least two actions."""
        return [(ag, s, self.game.availability[s, ag]) for ag in self.agents
                for s in self.game.states if len(self.game.availability[s, ag]) > 1]


def build_psmas(game: Game, agents: Sequence[str] | None = None,
                constants: StrategyProfile | None = None, *, reduced: bool = False) -> Psmas:
    agents = tuple(game.agents) if agents is None else tuple(a for a in game.agents if a in set(agents))
    if not agents:
        raise ValueError("at least one agent must be parametrised")
    constants = constants or StrategyProfile()
    missing = [a for a in game.agents if a not in agents and a not in constants]
    if missing:
        raise MissingConstantStrategy(f"no constant strategy for {missing}")
    if constants.entries:
        validate_profile(game, constants.restrict([a for a in game.agents if a not in agents]))
    params, bindings = [], {}
    for ag in agents:
        for s in game.states:
            for a in game.availability[s, ag]:
                name = parameter_name(ag, s, a)
                if name in bindings:
                    raise ModelError(f"parameter name collision: {name}")
                bindings[name] = (ag, s, a)
                params.append(name)
    if reduced:
        variables = tuple(parameter_name(ag, s, a) for ag in agents for s in game.states
                          for a in game.availability[s, ag][:-1])
    else:
        variables = tuple(params)
    polys = {}
    for ag in agents:
        for s in game.states:
            acts = game.availability[s, ag]
            if not reduced:
                for a in acts:
                    polys[ag, s, a] = Polynomial.var(parameter_name(ag, s, a), variables)
            else:
                rest = Polynomial.constant(1.0, variables)
                for a in acts[:-1]:
                    x = Polynomial.var(parameter_name(ag, s, a), variables)
                    polys[ag, s, a] = x
                    rest = rest - x
                polys[ag, s, acts[-1]] = rest
    return Psmas(game, agents, constants, reduced, tuple(params), bindings, variables, polys)


# -- evaluations -----------------------------------------------------------------


def complete(psmas: Psmas, evaluation: Mapping[str, float]) -> dict:
    """Assignment of every parameter; in reduced form the last action of each
    choice is derived from the others when absent."""
    out = {}
    for ag in psmas.agents:
        for s in psmas.game.states:
            acts = psmas.game.availability[s, ag]
            names = [parameter_name(ag, s, a) for a in acts]
            for n in names[:-1]:
                if n not in evaluation:
                    raise MissingParameter(f"no value for parameter {n}")
                out[n] = float(evaluation[n])
            last = names[-1]
            if last in evaluation:
                out[last] = float(evaluation[last])
            elif psmas.reduced:
                out[last] = 1.0 - sum(out[n] for n in names[:-1])
            else:
                raise MissingParameter(f"no value for parameter {last}")
    return out


def admissible(psmas: Psmas, evaluation: Mapping[str, float],
               tol: float = ADMISSIBLE_TOL) -> tuple[bool, list[str]]:
    """Conditions: (1) transition values in [0,1], (2) parameters in [0,1],
    (3) per-choice parameter sums equal 1."""
    full = complete(psmas, evaluation)
    violations = []
    point = {v: full[v] for v in psmas.variables}
    for (s, joint, t), poly in psmas.transitions.items():
        val = poly.eval(point)
        if val < -tol or val > 1 + tol:
            violations.append(f"(1) transition {s},{','.join(joint)}->{t} = {val}")
    for name, val in full.items():
        if val < -tol or val > 1 + tol:
            violations.append(f"(2) parameter {name} = {val}")
    for ag in psmas.agents:
        for s in psmas.game.states:
            total = sum(full[parameter_name(ag, s, a)] for a in psmas.game.availability[s, ag])
            if abs(total - 1.0) > tol:
                violations.append(f"(3) parameters of {ag} at {s} sum to {total}")
    return not violations, violations


def to_profile(psmas: Psmas, evaluation: Mapping[str, float]) -> StrategyProfile:
    full = complete(psmas, evaluation)
    entries = {}
    for ag in psmas.game.agents:
        if ag in psmas.agents:
            choice = {s: {a: min(max(full[parameter_name(ag, s, a)], 0.0), 1.0)
                          for a in psmas.game.availability[s, ag]} for s in psmas.game.states}
            entries[ag] = Strategy(ag, choice)
        else:
            entries[ag] = psmas.constants[ag]
    return StrategyProfile(entries)


def induced_chain(psmas: Psmas, evaluation: Mapping[str, float]) -> Game:
    """The Markov chain obtained by substituting ``evaluation`` (a one-agent,
    one-action game), validated like any other game."""
    g = psmas.game
    point = {v: complete(psmas, evaluation)[v] for v in psmas.variables}
    trans = {}
    for s in g.states:
        dist: dict = {}
        for w, joint in zip(psmas.joint_weights(s), g._joint[s]):
            wv = w.eval(point)
            for t, p in g.transitions[s, joint].items():
                dist[t] = dist.get(t, 0.0) + wv * p
        trans[s, ("go",)] = {t: p for t, p in dist.items() if p != 0.0}
    return validate_game({
        "agents": ("env",), "states": g.states, "initial": g.initial,
        "actions": {"env": ("go",)}, "transitions": trans,
        "atoms": g.atoms, "labels": g.labels,
    })


# -- symbolic forward computations --------------------------------------------------


def _step_polys(psmas: Psmas, pure: Mapping | None = None) -> dict:
    out = {}
    g = psmas.game
    for s in g.states:
        row: dict = {}
        for w, joint in zip(psmas.joint_weights(s, pure), g._joint[s]):
            if w.is_zero():
                continue
            for t, p in g.transitions[s, joint].items():
                if p > 0:
                    term = w.scale(p)
                    row[t] = row[t] + term if t in row else term
        out[s] = row
    return out


def _forward_probability(psmas: Psmas, mon, steps: dict, start: str) -> Polynomial:
    k = mon.horizon
    zero = Polynomial(psmas.variables)
    mass = {(start, mon.start()): Polynomial.constant(1.0, psmas.variables)}
    total = zero
    for j in range(k + 1):
        nxt: dict = {}
        for (s, st), m in mass.items():
            st = mon.update(st, j, s)
            verdict = mon.verdict(st)
            if verdict is True:
                total = total + m
                continue
            if verdict is False:
                continue
            for t, p in steps[s].items():
                key = (t, st)
                term = m * p
                nxt[key] = nxt[key] + term if key in nxt else term
        mass = nxt
    return total.extend(psmas.variables)


def symbolic_sat_probability(psmas: Psmas, outcome: Outcome, *, start: str | None = None,
                             sat: SatFn | None = None) -> Polynomial:
    mon = compile_outcome(psmas.game, outcome, sat)
    return _forward_probability(psmas, mon, _step_polys(psmas), start or psmas.game.initial)


def symbolic_expected_payoff(psmas: Psmas, reward: RewardStructure, outcome: Outcome, *,
                             start: str | None = None, sat: SatFn | None = None) -> Polynomial:
    """Expected accumulated reward on histories satisfying ``outcome``, with
    the same index convention as the numeric engine."""
    g = psmas.game
    mon = compile_outcome(g, outcome, sat)
    k = mon.horizon
    one = Polynomial.constant(1.0, psmas.variables)
    zero = Polynomial(psmas.variables)
    # (state, status) -> (probability mass, reward-weighted mass)
    layer = {(start or g.initial, mon.start()): (one, zero)}
    total = zero
    weights = {s: psmas.joint_weights(s) for s in g.states}
    for j in range(k + 1):
        nxt: dict = {}
        for (s, st), (m, r) in layer.items():
            st = mon.update(st, j, s)
            verdict = mon.verdict(st)
            if verdict is False:
                continue
            r = r + m.scale(reward.state_reward(s))
            if j == k:
                if verdict is True:
                    total = total + r
                continue
            for w, joint in zip(weights[s], g._joint[s]):
                if w.is_zero():
                    continue
                ra = reward.action_reward(s, joint)
                mw = m * w
                rw = r * w + mw.scale(ra)
                for t, p in g.transitions[s, joint].items():
                    if p <= 0:
                        continue
                    key = (t, st)
                    pm, pr = nxt.get(key, (zero, zero))
                    nxt[key] = (pm + mw.scale(p), pr + rw.scale(p))
        layer = nxt
    return total.extend(psmas.variables)


# -- responsibility ----------------------------------------------------------------


def reachable_before(game: Game, k: int, start: str | None = None) -> list[str]:
    """States reachable at some position ``j < k`` in the support graph."""
    seen = {start or game.initial}
    frontier = set(seen)
    for _ in range(k - 1):
        nxt = set()
        for s in frontier:
            for a in game._joint[s]:
                nxt.update(t for t, p in game.transitions[s, a].items() if p > 0)
        frontier = nxt - seen
        seen |= nxt
    return [s for s in game.states if s in seen] if k > 0 else []


def sample_grid(psmas: Psmas, variables: Sequence[str], steps: int = GRID_STEPS,
                cap: int = GRID_CAP, seed: int = 0) -> list[dict]:
    """Admissible sample points: every choice simplex on a ``1/steps`` grid.

    Choices whose parameters are not in ``variables`` are ignored.  When the
    product grid exceeds ``cap`` a deterministic random subset is used.
    """
    wanted = set(variables)
    blocks = []
    for ag, s, acts in psmas.points():
        names = [parameter_name(ag, s, a) for a in acts]
        free = [n for n in names[:-1]] if psmas.reduced else names
        if not any(n in wanted for n in free):
            continue
        m = len(acts)
        pts = []
        for combo in itertools.product(range(steps + 1), repeat=m - 1):
            if sum(combo) <= steps:
                probs = [c / steps for c in combo] + [(steps - sum(combo)) / steps]
                pts.append(dict(zip(names, probs)))
        blocks.append(pts)
    size = 1
    for b in blocks:
        size *= len(b)
    if size <= cap:
        combos = itertools.product(*blocks)
    else:
        rng = np.random.default_rng(seed)
        combos = ([b[int(rng.integers(len(b)))] for b in blocks] for _ in range(cap))
    out = []
    for combo in combos:
        pt: dict = {}
        for d in combo:
            pt.update(d)
        out.append({v: pt.get(v, 0.0) for v in variables})
    return out


def _pure_responses(psmas: Psmas, adversaries: Sequence[str], states: Sequence[str]):
    g = psmas.game
    per = []
    for ag in adversaries:
        options = [g.availability[s, ag] for s in states]
        per.append([dict(zip(states, combo)) for combo in itertools.product(*options)])
    for combo in itertools.product(*per):
        yield dict(zip(adversaries, combo))


def _count_responses(psmas: Psmas, adversaries, states) -> int:
    n = 1
    for ag in adversaries:
        for s in states:
            n *= len(psmas.game.availability[s, ag])
    return n


def symbolic_value(psmas: Psmas, outcome: Outcome, coalition: Sequence[str], mode: str = "min",
                   *, sat: SatFn | None = None, verify: bool = True) -> Polynomial:
    """Coalition value as a polynomial, when one pure stationary response of
    the other agents is optimal across the whole parameter space."""
    g = psmas.game
    mon = compile_outcome(g, outcome, sat)
    adversaries = [a for a in g.agents if a not in set(coalition)]
    states = reachable_before(g, mon.horizon)
    if _count_responses(psmas, adversaries, states) > CANDIDATE_CAP:
        raise NonPolynomial("too many adversary responses to enumerate")
    cands = []
    for pure in _pure_responses(psmas, adversaries, states):
        cands.append(_forward_probability(psmas, mon, _step_polys(psmas, pure), g.initial))
    # dedupe identical candidates
    uniq: list[Polynomial] = []
    for c in cands:
        if not any(c.almost_equal(u, 1e-12) for u in uniq):
            uniq.append(c)
    used = sorted({v for c in uniq for v in c.occurring()}, key=psmas.variables.index)
    grid = sample_grid(psmas, used)
    vals = np.array([[c.eval(p) for p in grid] for c in uniq])
    best = vals.min(axis=0) if mode == "min" else vals.max(axis=0)
    winner = None
    for i, row in enumerate(vals):
        if np.all(np.abs(row - best) <= 1e-12):
            winner = i
            break
    if winner is None:
        raise NonPolynomial("the optimal adversary response changes across the parameter space")
    poly = uniq[winner]
    if verify:
        _verify_value(psmas, mon, coalition, mode, poly, grid)
    return poly


def _verify_value(psmas, mon, coalition, mode, poly, grid):
    from .engine import extremal_probability

    if not grid:
        grid = [{}]
    idx = np.linspace(0, len(grid) - 1, min(VERIFY_POINTS, len(grid))).round().astype(int)
    for i in idx:
        ev = fill(psmas, grid[int(i)])
        prof = to_profile(psmas, ev)
        num = extremal_probability(psmas.game, prof.restrict(coalition), mon, mode).value
        if abs(num - poly.eval({v: ev.get(v, 0.0) for v in psmas.variables})) > 1e-9:
            raise NonPolynomial("history-dependent adversaries beat every stationary response")


def fill(psmas: Psmas, point: Mapping[str, float]) -> dict:
    """Complete assignment from a partial one; untouched choices are uniform
    and, in reduced form, the last action absorbs the remaining mass."""
    ev = {}
    for ag in psmas.agents:
        for s in psmas.game.states:
            acts = psmas.game.availability[s, ag]
            names = [parameter_name(ag, s, a) for a in acts]
            given = [n for n in names if n in point]
            if not given:
                for n in names:
                    ev[n] = 1.0 / len(acts)
            elif psmas.reduced:
                for n in names[:-1]:
                    ev[n] = float(point.get(n, 0.0))
                ev[names[-1]] = 1.0 - sum(ev[n] for n in names[:-1])
            else:
                for n in names:
                    ev[n] = float(point.get(n, 0.0))
    return ev


def symbolic_responsibility(psmas: Psmas, outcome: Outcome, agent: str, mode: str = "min",
                            *, scope: Sequence[str] | None = None,
                            sat: SatFn | None = None) -> Polynomial:
    """Shapley degree of ``agent`` as a polynomial in the parameters.

    Raises :class:`NonPolynomial` when some coalition value is only piecewise
    polynomial."""
    g = psmas.game
    if set(psmas.agents) != set(g.agents):
        raise ValueError("every agent must be parametrised")
    members = tuple(g.agents) if scope is None else tuple(a for a in g.agents if a in set(scope))
    if agent not in members:
        from .errors import AgentNotInScope

        raise AgentNotInScope(f"agent {agent!r} is not in the scope")
    values = {c: symbolic_value(psmas, outcome, c, mode, sat=sat) for c in subsets(members)}
    n = len(members)
    others = tuple(a for a in members if a != agent)
    total = Polynomial(psmas.variables)
    for j in subsets(others):
        with_i = tuple(a for a in members if a in set(j) | {agent})
        weight = factorial(len(j)) * factorial(n - len(j) - 1) / factorial(n)
        total = total + (values[with_i] - values[j]).scale(weight)
    return total.extend(psmas.variables)


# -- utilities ----------------------------------------------------------------------


@dataclass(frozen=True)
class UtilityFunction:
    agent: str
    combined: Polynomial | Callable
    payoff: Polynomial | None = None
    responsibility: Polynomial | None = None
    lam: float = 1.0

    @property
    def symbolic(self) -> bool:
        return isinstance(self.combined, Polynomial)

    def __call__(self, point: Mapping[str, float]) -> float:
        if isinstance(self.combined, Polynomial):
            return self.combined.eval(point)
        return float(self.combined(point))


def _rewards_for(agents, rewards) -> dict:
    if isinstance(rewards, RewardStructure):
        return {a: rewards for a in agents}
    missing = [a for a in agents if a not in rewards]
    if missing:
        raise ValueError(f"no reward structure for {missing}")
    return dict(rewards)


def utility(psmas: Psmas, lam: float = 1.0, rewards=None, outcome: Outcome | None = None,
            mode: str = "min", *, payoff_path: Outcome | None = None,
            override: Mapping[str, Polynomial] | None = None,
            sat: SatFn | None = None) -> dict:
    """Per-agent ``payoff - lam * degree``.

    The payoff is the expected reward over all histories of the outcome's
    horizon unless ``payoff_path`` restricts it.  ``override`` supplies the
    combined polynomials verbatim.
    """
    if not np.isfinite(lam):
        raise ValueError("lambda must be finite")
    agents = psmas.game.agents
    if override is not None:
        return {a: UtilityFunction(a, override[a], lam=lam) for a in agents if a in override}
    if outcome is None:
        raise ValueError("an outcome is required")
    rewards = _rewards_for(agents, rewards)
    path = payoff_path or Always(horizon(outcome), TRUE)
    out = {}
    for a in agents:
        pay = symbolic_expected_payoff(psmas, rewards[a], path, sat=sat)
        if lam == 0:
            resp = Polynomial(psmas.variables)
        else:
            resp = symbolic_responsibility(psmas, outcome, a, mode, sat=sat)
        out[a] = UtilityFunction(a, pay - resp.scale(lam), pay, resp, lam)
    return out


def numeric_utilities(psmas: Psmas, lam: float = 1.0, rewards=None,
                      outcome: Outcome | None = None, mode: str = "min", *,
                      payoff_path: Outcome | None = None) -> dict:
    """Utilities evaluated pointwise by the numeric engines (fallback when a
    degree is not polynomial)."""
    agents = psmas.game.agents
    rewards = _rewards_for(agents, rewards)
    path = payoff_path or Always(horizon(outcome), TRUE)
    g = psmas.game

    def make(agent):
        memo: dict = {}

        def u(point):
            key = tuple(sorted(point.items()))
            if key in memo:
                return memo[key]
            ev = fill(psmas, point)
            prof = to_profile(psmas, ev)
            value = expected_reward(g, prof, rewards[agent], path)
            if lam:
                value -= lam * bcr_degree(g, prof, outcome, agent, None, mode)
            memo[key] = value
            return value

        return u

    return {a: UtilityFunction(a, make(a), lam=lam) for a in agents}
