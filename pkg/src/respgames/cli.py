"""Command-line front end.

Exit codes: 0 true / found, 1 false, 2 input error, 3 no equilibrium.
Reports go to stdout (JSON with ``--format json``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .checker import CheckContext, check
from .engine import expected_reward, sat_probability
from .equilibrium import ne_report, parse_utility_file, solve_ne, space_from_psmas, utilities_from_file
from .errors import NonPolynomial, RespGamesError, UnknownProfile, UnknownReward
from .logic import horizon, parse_path_formula, parse_state_formula
from .modelfile import load_model, parse_profiles, serialize_model
from .parametric import build_psmas, numeric_utilities, utility
from .responsibility import DEFAULT_CAP, qualitative_bcr, responsibility_report
from .simulate import monte_carlo

EXIT_TRUE, EXIT_FALSE, EXIT_INPUT, EXIT_NO_NE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    return json.dumps(float(x))


def _envelope(args, result: dict) -> dict:
    data = Path(args.model).read_bytes()
    return {
        "tool": "respgames",
        "version": __version__,
        "command": args.command,
        "model": os.path.basename(args.model),
        "model_sha256": hashlib.sha256(data).hexdigest(),
        "result": result,
    }


def _emit(args, result: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(_envelope(args, result), indent=2, sort_keys=True))
    else:
        print(text)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("RESPGAMES_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def _load(args):
    model = load_model(args.model)
    profiles = dict(model.profiles)
    if getattr(args, "profiles", None):
        profiles.update(parse_profiles(Path(args.profiles).read_text(), model.game))
    return model, profiles


def _profile(profiles, name):
    if name not in profiles:
        raise UnknownProfile(f"unknown profile {name!r}")
    return profiles[name]


# -- subcommands ---------------------------------------------------------------------


def cmd_check(args) -> int:
    model, profiles = _load(args)
    game = model.game
    formula = parse_state_formula(args.formula, game.agents)
    ctx = CheckContext(game, profiles, model.rewards, r_adversary=args.r_adversary, mode=args.mode)
    verdict = check(ctx, formula)
    result = verdict.to_dict()
    lines = [f"formula: {result['formula']}", f"state: {verdict.state}",
             f"truth: {'true' if verdict.truth else 'false'}"]
    if verdict.value is not None:
        lines.append(f"value: {_num(verdict.value)}")
    _emit(args, result, "\n".join(lines))
    return EXIT_TRUE if verdict.truth else EXIT_FALSE


def cmd_resp(args) -> int:
    model, profiles = _load(args)
    game = model.game
    profile = _profile(profiles, args.profile)
    outcome = parse_path_formula(args.outcome, game.agents)
    agents = [args.agent] if args.agent else None
    report = responsibility_report(game, profile, outcome, agents, args.mode,
                                   cap=args.coalition_cap, threads=_threads(args))
    result = report.to_dict()
    lines = [f"mode: {report.mode}", f"horizon: {report.horizon}",
             f"upsilon: {_num(report.upsilon)}", "degrees:"]
    lines += [f"  {a}: {_num(d)}" for a, d in report.degrees.items()]
    lines.append("table:")
    lines += [f"  {{{', '.join(c)}}}: {_num(v)}" for c, v in report.table.rows()]
    _emit(args, result, "\n".join(lines))
    return EXIT_TRUE


def cmd_bcr(args) -> int:
    model, profiles = _load(args)
    game = model.game
    profile = _profile(profiles, args.profile)
    outcome = parse_path_formula(args.outcome, game.agents)
    truth, witness = qualitative_bcr(game, profile, outcome, args.agent)
    result = {"agent": args.agent, "responsible": truth,
              "witness": witness.to_dict() if witness else None}
    lines = [f"agent: {args.agent}", f"responsible: {'true' if truth else 'false'}"]
    if witness:
        h = witness.history
        steps = [h.states[0]] + [f"({','.join(a)}) {t}" for a, t in zip(h.joint_actions, h.states[1:])]
        lines.append(f"witness coalition: {{{', '.join(witness.coalition)}}}")
        lines.append(f"violating history: {' -> '.join(steps)}")
    _emit(args, result, "\n".join(lines))
    return EXIT_TRUE if truth else EXIT_FALSE


def _rewards(args, model):
    game = model.game
    if not args.reward:
        raise UsageError("--reward is required unless --utility-file is given")
    out = {}
    for item in args.reward:
        if "=" in item:
            agent, name = item.split("=", 1)
            targets = [agent]
        else:
            name, targets = item, list(game.agents)
        if name not in model.rewards:
            raise UnknownReward(f"unknown reward structure {name!r}")
        for agent in targets:
            if agent not in game.agents:
                raise UsageError(f"unknown agent {agent!r}")
            out[agent] = model.rewards[name]
    missing = [a for a in game.agents if a not in out]
    if missing:
        raise UsageError(f"no reward structure for {missing}")
    return out


def cmd_ne(args) -> int:
    model, _ = _load(args)
    game = model.game
    fallback = False
    if args.utility_file:
        uf = parse_utility_file(Path(args.utility_file).read_text(), game)
        utilities = utilities_from_file(uf)
        space = uf.space
    else:
        if not args.outcome:
            raise UsageError("--outcome is required unless --utility-file is given")
        outcome = parse_path_formula(args.outcome, game.agents)
        rewards = _rewards(args, model)
        psmas = build_psmas(game, reduced=True)
        try:
            utilities = utility(psmas, args.lam, rewards, outcome, args.mode)
        except NonPolynomial as exc:
            print(f"note: {exc}; using numeric utilities", file=sys.stderr)
            utilities = numeric_utilities(psmas, args.lam, rewards, outcome, args.mode)
            fallback = True
        space = space_from_psmas(psmas, horizon(outcome), utilities)
    solutions = solve_ne(utilities, space)
    result = ne_report(solutions)
    result["numeric_fallback"] = fallback
    if not fallback:
        result["utilities"] = {a: str(u.combined) for a, u in utilities.items()}
    lines = []
    if not fallback:
        lines += [f"u {a} = {u.combined}" for a, u in utilities.items()]
    lines.append(f"solutions: {len(solutions)}")
    for i, sol in enumerate(solutions, 1):
        params = ", ".join(f"{k}={_num(v)}" for k, v in sol.params.items())
        utils = ", ".join(f"{k}={_num(v)}" for k, v in sol.utilities.items())
        lines.append(f"  [{i}] {params}")
        lines.append(f"      utilities: {utils}")
        lines.append(f"      residual: {_num(sol.residual)} verified: "
                     f"{'true' if sol.verified else 'false'}"
                     + (" degenerate" if sol.degenerate else ""))
    _emit(args, result, "\n".join(lines))
    if not solutions:
        print("no equilibrium found", file=sys.stderr)
        return EXIT_NO_NE
    return EXIT_TRUE


def cmd_simulate(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    model, profiles = _load(args)
    game = model.game
    profile = _profile(profiles, args.profile)
    outcome = parse_path_formula(args.outcome, game.agents)
    reward = None
    if args.reward:
        if args.reward[0] not in model.rewards:
            raise UnknownReward(f"unknown reward structure {args.reward[0]!r}")
        reward = model.rewards[args.reward[0]]
    est, err = monte_carlo(game, profile, outcome, args.samples, args.seed, reward=reward)
    exact = (expected_reward(game, profile, reward, outcome) if reward
             else sat_probability(game, profile, outcome))
    z = abs(est - exact) / err if err > 0 else (0.0 if est == exact else float("inf"))
    result = {"estimate": est, "stderr": err, "analytic": exact, "z": z,
              "samples": args.samples, "seed": args.seed}
    text = "\n".join(f"{k}: {_num(v) if isinstance(v, float) else v}" for k, v in result.items())
    _emit(args, result, text)
    return EXIT_TRUE


def cmd_validate(args) -> int:
    model, profiles = _load(args)
    g = model.game
    result = {"valid": True, "agents": list(g.agents), "states": len(g.states),
              "profiles": sorted(profiles), "rewards": sorted(model.rewards)}
    text = (f"valid: {len(g.agents)} agents, {len(g.states)} states, "
            f"{len(profiles)} profiles, {len(model.rewards)} reward structures")
    _emit(args, result, text)
    return EXIT_TRUE


def cmd_fmt(args) -> int:
    model, profiles = _load(args)
    sys.stdout.write(serialize_model(model.game, profiles, model.rewards))
    return EXIT_TRUE


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="respgames", description="Responsibility in stochastic games.")
    p.add_argument("--version", action="version", version=f"respgames {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("model", help="model file")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--profiles", help="extra profile definitions")
        sp.add_argument("--threads", type=int, default=None)
        return sp

    sp = common(sub.add_parser("check", help="model-check a state formula at the initial state"))
    sp.add_argument("--formula", required=True)
    sp.add_argument("--mode", choices=("min", "max"), default="min")
    sp.add_argument("--r-adversary", choices=("hostile", "any"), default="hostile")
    sp.set_defaults(func=cmd_check)

    sp = common(sub.add_parser("resp", help="responsibility degrees and coalition values"))
    sp.add_argument("--profile", required=True)
    sp.add_argument("--outcome", required=True)
    sp.add_argument("--agent")
    sp.add_argument("--mode", choices=("min", "max"), default="min")
    sp.add_argument("--coalition-cap", type=int, default=DEFAULT_CAP)
    sp.set_defaults(func=cmd_resp)

    sp = common(sub.add_parser("bcr", help="qualitative responsibility with witness"))
    sp.add_argument("--profile", required=True)
    sp.add_argument("--outcome", required=True)
    sp.add_argument("--agent", required=True)
    sp.set_defaults(func=cmd_bcr)

    sp = common(sub.add_parser("ne", help="responsibility-aware Nash equilibria"))
    sp.add_argument("--outcome")
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--reward", action="append", help="NAME or AGENT=NAME (repeatable)")
    sp.add_argument("--utility-file")
    sp.add_argument("--mode", choices=("min", "max"), default="min")
    sp.set_defaults(func=cmd_ne)

    sp = common(sub.add_parser("simulate", help="Monte Carlo estimate against the exact value"))
    sp.add_argument("--profile", required=True)
    sp.add_argument("--outcome", required=True)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--reward", action="append", help="estimate expected reward instead")
    sp.set_defaults(func=cmd_simulate)

    sp = common(sub.add_parser("validate", help="validate a model file"))
    sp.set_defaults(func=cmd_validate)

    sp = common(sub.add_parser("fmt", help="print the model in canonical form"))
    sp.set_defaults(func=cmd_fmt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (RespGamesError, OSError, ValueError) as exc:
        violations = getattr(exc, "violations", None) or []
        print(f"error: {exc}", file=sys.stderr)
        for v in violations[1:]:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
