"""Nash equilibria of parametric utilities by support enumeration.

For every support pattern the in-support actions of each choice must be
indifferent for their owner.  The resulting square system (one unknown per
in-support action beyond the first, per choice) is solved by damped Newton
from a deterministic grid of seeds; candidates are kept only when no pure
deviation pays more than ``eps``.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingParameter, NoSolutionFound
from .model import Game
from .parametric import Psmas, UtilityFunction, parameter_name, reachable_before
from .polynomial import Polynomial, parse_polynomial

DEVIATION_EPS = 1e-6
BR_TOL = 1e-9
RESIDUAL_TOL = 1e-10
MAX_ITER = 1000
SEED_STEP = 0.1
SEED_CAP = 2000
DEDUPE_TOL = 1e-6
POSITIVE_TOL = 1e-9
FD_STEP = 1e-7
MIN_DAMPING = 2.0 ** -12


@dataclass(frozen=True)
class Choice:
    """One agent's randomisation at one state.

    ``names[k]`` is the parameter holding the probability of ``actions[k]``;
    ``None`` marks the action whose probability is one minus the others.
    """

    agent: str
    state: str
    actions: tuple[str, ...]
    names: tuple[str | None, ...]

    @property
    def label(self) -> str:
        return f"{self.agent}@{self.state}"

    def assign(self, probs: Sequence[float]) -> dict:
        return {n: float(p) for n, p in zip(self.names, probs) if n is not None}

    def probabilities(self, point: Mapping[str, float]) -> list[float]:
        named = [point.get(n, 0.0) if n is not None else None for n in self.names]
        rest = 1.0 - sum(p for p in named if p is not None)
        return [rest if p is None else p for p in named]


@dataclass(frozen=True)
class StrategySpace:
    choices: tuple[Choice, ...]

    @property
    def agents(self) -> tuple[str, ...]:
        seen: list[str] = []
        for c in self.choices:
            if c.agent not in seen:
                seen.append(c.agent)
        return tuple(seen)

    def of(self, agent: str) -> list[Choice]:
        return [c for c in self.choices if c.agent == agent]

    def pure_point(self, picks: Mapping[Choice, str], base: Mapping[str, float]) -> dict:
        point = dict(base)
        for c, a in picks.items():
            point.update(c.assign([1.0 if b == a else 0.0 for b in c.actions]))
        return point


def space_from_psmas(psmas: Psmas, horizon: int,
                     utilities: Mapping[str, UtilityFunction] | None = None) -> StrategySpace:
    """Choices of the parametrised agents at states reachable before the
    horizon; with polynomial utilities, choices none of them depends on are
    dropped."""
    live = set(reachable_before(psmas.game, horizon))
    used = None
    if utilities and all(u.symbolic for u in utilities.values()):
        used = {v for u in utilities.values() for v in u.combined.occurring()}
    out = []
    for ag, s, acts in psmas.points():
        if s not in live:
            continue
        names = tuple(parameter_name(ag, s, a) for a in acts)
        if psmas.reduced:
            names = names[:-1] + (None,)
        if used is not None and not any(n in used for n in names if n is not None):
            continue
        out.append(Choice(ag, s, acts, names))
    return StrategySpace(tuple(out))


# -- evaluation helpers -----------------------------------------------------------


def _u(utility, point: Mapping[str, float]) -> float:
    if isinstance(utility, UtilityFunction):
        return utility(point)
    if isinstance(utility, Polynomial):
        return utility.eval(point)
    return float(utility(point))


def _base_point(space: StrategySpace, utilities: Mapping) -> dict:
    names = {n for c in space.choices for n in c.names if n is not None}
    for u in utilities.values():
        comb = u.combined if isinstance(u, UtilityFunction) else u
        if isinstance(comb, Polynomial):
            names.update(comb.variables)
    return {n: 0.0 for n in sorted(names)}


def best_response(utilities: Mapping, agent: str, evaluation: Mapping[str, float],
                  space: StrategySpace, tol: float = BR_TOL) -> tuple[float, list[dict]]:
    """Maximal utility of ``agent`` over its pure strategies against
    ``evaluation`` and every pure strategy within ``tol`` of it (as
    ``{state: action}`` maps)."""
    mine = space.of(agent)
    scores = []
    for combo in itertools.product(*(c.actions for c in mine)):
        point = space.pure_point(dict(zip(mine, combo)), evaluation)
        scores.append((_u(utilities[agent], point), {c.state: a for c, a in zip(mine, combo)}))
    best = max(v for v, _ in scores)
    return best, [s for v, s in scores if v >= best - tol]


def verify_ne(utilities: Mapping, evaluation: Mapping[str, float], space: StrategySpace,
              eps: float = DEVIATION_EPS) -> bool:
    for agent in utilities:
        if not space.of(agent):
            continue
        best, _ = best_response(utilities, agent, evaluation, space)
        if best - _u(utilities[agent], evaluation) > eps:
            return False
    return True


# -- solving ----------------------------------------------------------------------


@dataclass(frozen=True)
class NeSolution:
    params: dict
    support: dict
    residual: float
    utilities: dict
    verified: bool
    degenerate: bool = False
    probabilities: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "support": {k: list(v) for k, v in self.support.items()},
            "utilities": dict(self.utilities),
            "residual": self.residual,
            "verified": self.verified,
            "degenerate": self.degenerate,
        }


class _Pattern:
    """Unknowns and indifference residuals for one support pattern."""

    def __init__(self, space: StrategySpace, utilities: Mapping, supports, base):
        self.space = space
        self.utilities = utilities
        self.supports = supports
        self.base = base
        self.n = sum(len(s) - 1 for s in supports)

    def point(self, z: np.ndarray) -> dict:
        point = dict(self.base)
        i = 0
        for c, sup in zip(self.space.choices, self.supports):
            probs = [0.0] * len(c.actions)
            free = z[i:i + len(sup) - 1]
            i += len(sup) - 1
            for k, p in zip(sup[:-1], free):
                probs[k] = float(p)
            probs[sup[-1]] = 1.0 - float(np.sum(free))
            point.update(c.assign(probs))
        return point

    def residual(self, z: np.ndarray) -> np.ndarray:
        point = self.point(z)
        out = []
        for c, sup in zip(self.space.choices, self.supports):
            if len(sup) < 2:
                continue
            u = self.utilities[c.agent]
            vals = []
            for k in sup:
                pure = dict(point)
                pure.update(c.assign([1.0 if m == k else 0.0 for m in range(len(c.actions))]))
                vals.append(_u(u, pure))
            out.extend(vals[0] - v for v in vals[1:])
        return np.array(out, dtype=float)

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        jac = np.zeros((self.n, self.n))
        for k in range(self.n):
            e = np.zeros(self.n)
            e[k] = FD_STEP
            jac[:, k] = (self.residual(z + e) - self.residual(z - e)) / (2 * FD_STEP)
        return jac

    def seeds(self) -> list[np.ndarray]:
        levels = np.round(np.arange(0.0, 1.0 + 1e-12, SEED_STEP), 10)
        per_choice = []
        for sup in self.supports:
            m = len(sup) - 1
            if m == 0:
                continue
            per_choice.append([np.array(c) for c in itertools.product(levels, repeat=m)
                               if sum(c) <= 1.0 + 1e-12])
        combos = list(itertools.product(*per_choice))
        if len(combos) > SEED_CAP:
            idx = np.linspace(0, len(combos) - 1, SEED_CAP).round().astype(int)
            combos = [combos[i] for i in idx]
        return [np.concatenate(c) if c else np.zeros(0) for c in combos]

    def newton(self, z0: np.ndarray) -> np.ndarray | None:
        z = z0.astype(float)
        f = self.residual(z)
        norm = float(np.max(np.abs(f))) if f.size else 0.0
        for _ in range(MAX_ITER):
            if norm < RESIDUAL_TOL:
                return z
            jac = self.jacobian(z)
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
            t = 1.0
            while t > MIN_DAMPING:
                z_new = z + t * step
                f_new = self.residual(z_new)
                n_new = float(np.max(np.abs(f_new)))
                if n_new < norm:
                    z, f, norm = z_new, f_new, n_new
                    break
                t *= 0.5
            else:
                return None
            if not np.all(np.isfinite(z)) or np.max(np.abs(z)) > 1e6:
                return None
        return z if norm < RESIDUAL_TOL else None


def _supports(space: StrategySpace):
    per = []
    for c in space.choices:
        idx = range(len(c.actions))
        per.append([s for r in range(1, len(c.actions) + 1) for s in itertools.combinations(idx, r)])
    return itertools.product(*per)


def _valid(point, space, tol=POSITIVE_TOL) -> tuple[bool, dict]:
    probs = {}
    for c in space.choices:
        ps = c.probabilities(point)
        if min(ps) < -tol or max(ps) > 1 + tol:
            return False, probs
        probs[c.label] = ps
    return True, probs


def _solution(space, utilities, point, supports, residual, degenerate, eps) -> NeSolution:
    params = {n: point[n] for c in space.choices for n in c.names if n is not None}
    support = {c.label: [c.actions[k] for k in sup] for c, sup in zip(space.choices, supports)}
    probs = {}
    for c in space.choices:
        probs.setdefault(c.agent, {})[c.state] = dict(zip(c.actions, c.probabilities(point)))
    utils = {a: _u(u, point) for a, u in utilities.items()}
    return NeSolution(params, support, residual, utils, verify_ne(utilities, point, space, eps),
                      degenerate, probs)


def _pure_candidates(space, utilities, base, eps):
    """Best-response iteration from pure starting profiles."""
    found = []
    agents = space.agents
    for start in itertools.product(*(c.actions for c in space.choices)):
        picks = dict(zip(space.choices, start))
        for _ in range(100):
            point = space.pure_point(picks, base)
            moved = False
            for ag in agents:
                best, brs = best_response(utilities, ag, point, space)
                if best - _u(utilities[ag], point) > eps:
                    for c in space.of(ag):
                        picks[c] = brs[0][c.state]
                    moved = True
                    break
            if not moved:
                found.append(dict(picks))
                break
    return found


def solve_ne(utilities: Mapping, space: StrategySpace, *, eps: float = DEVIATION_EPS,
             require: bool = False) -> list[NeSolution]:
    """All equilibria found by support enumeration, sorted by parameters.

    Degenerate solutions (a singular indifference system) are reported once
    per support pattern.  With ``require`` an empty result raises
    :class:`NoSolutionFound`.
    """
    base = _base_point(space, utilities)
    symbolic = all(isinstance(u.combined if isinstance(u, UtilityFunction) else u, Polynomial)
                   for u in utilities.values())
    solutions: list[NeSolution] = []
    points: list[dict] = []

    def add(sol: NeSolution, point: dict) -> None:
        keys = sorted(sol.params)
        vec = np.array([sol.params[k] for k in keys])
        for other in solutions:
            if np.max(np.abs(vec - np.array([other.params[k] for k in keys])), initial=0.0) <= DEDUPE_TOL:
                return
        solutions.append(sol)
        points.append(point)

    for supports in _supports(space):
        pat = _Pattern(space, utilities, supports, base)
        degenerate_seen = False
        for seed in pat.seeds():
            z = pat.newton(seed) if pat.n else seed
            if z is None:
                continue
            point = pat.point(z)
            ok, probs = _valid(point, space)
            if not ok:
                continue
            positive = all(probs[c.label][k] > POSITIVE_TOL
                           for c, sup in zip(space.choices, supports) for k in sup)
            if not positive:
                continue
            degenerate = bool(pat.n and np.linalg.matrix_rank(pat.jacobian(z), tol=1e-8) < pat.n)
            if degenerate and degenerate_seen:
                continue
            res = float(np.max(np.abs(pat.residual(z)), initial=0.0))
            sol = _solution(space, utilities, point, supports, res, degenerate, eps)
            if not sol.verified:
                continue
            degenerate_seen = degenerate_seen or degenerate
            add(sol, point)

    if not symbolic:
        for picks in _pure_candidates(space, utilities, base, eps):
            point = space.pure_point(picks, base)
            supports = tuple((c.actions.index(picks[c]),) for c in space.choices)
            sol = _solution(space, utilities, point, supports, 0.0, False, eps)
            if sol.verified:
                add(sol, point)

    solutions.sort(key=lambda s: [s.params[k] for k in sorted(s.params)])
    if require and not solutions:
        raise NoSolutionFound("no equilibrium found")
    return solutions


def ne_report(solutions: Sequence[NeSolution]) -> dict:
    return {"solutions": [s.to_dict() for s in solutions]}


# -- utility files -------------------------------------------------------------------

_PARAM = re.compile(r"^param\s+([A-Za-z_]\w*)\s*=\s*(\S+)\s+(\S+)\s+(\S+)\s*$")
_UTIL = re.compile(r"^u\s+(\S+)\s*=\s*(.+)$")


@dataclass(frozen=True)
class UtilityFile:
    bindings: dict
    polynomials: dict
    space: StrategySpace


def parse_utility_file(text: str, game: Game | None = None) -> UtilityFile:
    """``param NAME = AGENT STATE ACTION`` lines bind variables to action
    probabilities; ``u AGENT = polynomial`` lines give utilities.  Each
    bound choice needs exactly one unbound action, whose probability is the
    complement.  Lines starting with ``#`` are comments."""
    bindings: dict = {}
    polys: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _PARAM.match(line)
        if m:
            name, ag, s, a = m.groups()
            if name in bindings:
                raise ValueError(f"line {lineno}: parameter {name} bound twice")
            bindings[name] = (ag, s, a)
            continue
        m = _UTIL.match(line)
        if m:
            ag, expr = m.groups()
            try:
                polys[ag] = parse_polynomial(expr)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            continue
        raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    if not polys:
        raise ValueError("no utility lines")
    groups: dict = {}
    for name, (ag, s, a) in bindings.items():
        groups.setdefault((ag, s), {})[a] = name
    choices = []
    for (ag, s), named in groups.items():
        if game is not None:
            if ag not in game.agents or s not in game.state_index:
                raise MissingParameter(f"binding refers to unknown agent/state {ag}/{s}")
            acts = tuple(game.availability[s, ag])
            unknown = set(named) - set(acts)
            if unknown:
                raise MissingParameter(f"actions {sorted(unknown)} not available to {ag} at {s}")
        else:
            acts = tuple(named) + ("~",)
        unbound = [a for a in acts if a not in named]
        if len(unbound) != 1:
            raise MissingParameter(f"choice {ag}@{s} needs exactly one unbound action")
        choices.append(Choice(ag, s, acts, tuple(named.get(a) for a in acts)))
    used = {v for p in polys.values() for v in p.occurring()}
    unbound_vars = used - set(bindings)
    if unbound_vars:
        raise MissingParameter(f"variables without a binding: {sorted(unbound_vars)}")
    return UtilityFile(bindings, polys, StrategySpace(tuple(choices)))


def utilities_from_file(uf: UtilityFile) -> dict:
    return {a: UtilityFunction(a, p) for a, p in uf.polynomials.items()}


Utility = Callable[[Mapping[str, float]], float]
