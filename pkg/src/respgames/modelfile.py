"""Reading and writing the line-oriented model format.

Example::

    agents A1 A2
    actions A1 { b1 nb1 }
    actions A2 { b2 nb2 }
    atoms init crash pass          # optional, defaults to the union of labels
    state s0 init { init }
    state s1 { crash }
    available s0 A1 { b1 nb1 }     # optional
    trans s0 (nb1,nb2) { s1:1.0 }
    trans s1 (*,*) { s1:1.0 }      # '*' expands to every available action
    reward r1 state s1 -3
    reward r1 action s0 (b1,*) 3   # state may be omitted or '*'
    profile p_nb { A1 s0 { nb1:1.0 } A2 s0 { nb2:1.0 } }

A statement ends at a newline outside braces, so blocks may span lines.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import ModelError, ModelSyntaxError
from .model import (
    ActionRule,
    Game,
    RewardStructure,
    StrategyProfile,
    make_profile,
    validate_game,
    validate_profile,
    validate_reward,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}(),:*])
    """,
    re.VERBOSE,
)

KEYWORDS = ("agents", "actions", "atoms", "state", "available", "trans", "reward", "profile")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    depth = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            if depth == 0:
                tokens.append(Token("nl", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "punct":
            ch = m.group()
            depth += {"{": 1, "}": -1}.get(ch, 0)
            tokens.append(Token(ch, ch, line, col))
        elif kind in ("num", "id"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class Model:
    """A parsed model file."""

    game: Game
    profiles: dict[str, StrategyProfile] = field(default_factory=dict)
    rewards: dict[str, RewardStructure] = field(default_factory=dict)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None) -> ModelSyntaxError:
        tok = tok or self.tok
        return ModelSyntaxError(message, tok.line, tok.column)

    def next(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind != kind:
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise self.error(f"expected {what or kind}, found {found}")
        return self.next()

    def ident(self, what: str = "identifier") -> str:
        return self.expect("id", what).text

    def number(self) -> float:
        return float(self.expect("num", "number").text)

    def end_statement(self) -> None:
        if self.tok.kind not in ("nl", "eof"):
            raise self.error(f"unexpected {self.tok.text!r} at end of statement")

    def ident_block(self) -> list[str]:
        self.expect("{")
        out = []
        while self.tok.kind != "}":
            out.append(self.ident())
            if self.tok.kind == ",":
                self.next()
        self.expect("}")
        return out

    def dist_block(self) -> list[tuple[str, float, Token]]:
        self.expect("{")
        out = []
        while self.tok.kind != "}":
            tok = self.tok
            name = self.ident()
            self.expect(":")
            out.append((name, self.number(), tok))
            if self.tok.kind == ",":
                self.next()
        self.expect("}")
        return out

    def pattern(self) -> list[str | None]:
        self.expect("(")
        out: list[str | None] = []
        while True:
            if self.tok.kind == "*":
                self.next()
                out.append(None)
            else:
                out.append(self.ident("action or '*'"))
            if self.tok.kind == ",":
                self.next()
                continue
            break
        self.expect(")")
        return out


def parse_model(text: str) -> Model:
    """Parse a model file; semantic checks are delegated to the model layer."""
    p = _Parser(text)
    agents: list[str] | None = None
    actions: dict[str, list[str]] = {}
    atoms: list[str] | None = None
    states: list[str] = []
    initial: str | None = None
    labels: dict[str, list[str]] = {}
    available: dict[str, dict[str, list[str]]] = {}
    trans_raw: list[tuple[str, list[str | None], list[tuple[str, float, Token]], Token]] = []
    reward_raw: list[tuple[str, Token, str, tuple]] = []
    profile_raw: list[tuple[str, Token, list[tuple[str, str, list[tuple[str, float, Token]]]]]] = []

    while True:
        while p.tok.kind == "nl":
            p.next()
        if p.tok.kind == "eof":
            break
        head = p.tok
        if head.kind != "id" or head.text not in KEYWORDS:
            raise p.error(f"expected a statement keyword, found {head.text!r}")
        p.next()
        kw = head.text
        if kw == "agents":
            if agents is not None:
                raise p.error("duplicate agents declaration", head)
            agents = []
            while p.tok.kind == "id":
                agents.append(p.next().text)
            if not agents:
                raise p.error("agents declaration lists no agents")
        elif kw == "actions":
            ag = p.ident("agent")
            if ag in actions:
                raise p.error(f"duplicate actions for {ag!r}", head)
            actions[ag] = p.ident_block()
        elif kw == "atoms":
            atoms = (atoms or [])
            while p.tok.kind == "id":
                atoms.append(p.next().text)
        elif kw == "state":
            name = p.ident("state")
            if name in states:
                raise p.error(f"duplicate state {name!r}", head)
            states.append(name)
            if p.tok.kind == "id" and p.tok.text == "init":
                p.next()
                if initial is not None:
                    raise p.error("more than one initial state", head)
                initial = name
            labels[name] = p.ident_block() if p.tok.kind == "{" else []
        elif kw == "available":
            s = p.ident("state")
            ag = p.ident("agent")
            available.setdefault(s, {})[ag] = p.ident_block()
        elif kw == "trans":
            s = p.ident("state")
            pat = p.pattern()
            trans_raw.append((s, pat, p.dist_block(), head))
        elif kw == "reward":
            name = p.ident("reward name")
            kind = p.ident("'state' or 'action'")
            if kind == "state":
                s = p.ident("state")
                reward_raw.append((name, head, "state", (s, p.number())))
            elif kind == "action":
                scope: str | None = None
                if p.tok.kind == "id":
                    scope = p.next().text
                elif p.tok.kind == "*":
                    p.next()
                pat = p.pattern()
                reward_raw.append((name, head, "action", (scope, tuple(pat), p.number())))
            else:
                raise p.error(f"expected 'state' or 'action', found {kind!r}")
        elif kw == "profile":
            name = p.ident("profile name")
            p.expect("{")
            entries = []
            while p.tok.kind != "}":
                ag = p.ident("agent")
                s = p.ident("state")
                entries.append((ag, s, p.dist_block()))
            p.expect("}")
            profile_raw.append((name, head, entries))
        p.end_statement()

    if agents is None:
        raise p.error("missing 'agents' declaration", p.toks[0])
    if not states:
        raise p.error("model declares no states", p.toks[0])

    # '*' expansion needs availability, so resolve it before building transitions
    avail_of = {}
    for s in states:
        for ag in agents:
            avail_of[s, ag] = available.get(s, {}).get(ag, actions.get(ag, []))
    transitions: dict[tuple[str, tuple[str, ...]], dict[str, float]] = {}
    for s, pat, dist, tok in trans_raw:
        if s not in states:
            raise ModelSyntaxError(f"transition from unknown state {s!r}", tok.line, tok.column)
        if len(pat) != len(agents):
            raise ModelSyntaxError(
                f"joint action has {len(pat)} components, expected {len(agents)}", tok.line, tok.column)
        choices = [avail_of[s, ag] if a is None else [a] for ag, a in zip(agents, pat)]
        succ: dict[str, float] = {}
        for t, prob, ttok in dist:
            if t in succ:
                raise ModelSyntaxError(f"duplicate successor {t!r}", ttok.line, ttok.column)
            succ[t] = prob
        for joint in itertools.product(*choices):
            if (s, joint) in transitions:
                raise ModelSyntaxError(
                    f"duplicate transition for {s} ({','.join(joint)})", tok.line, tok.column)
            transitions[s, joint] = dict(succ)

    game = validate_game({
        "agents": agents,
        "states": states,
        "initial": initial if initial is not None else states[0],
        "actions": actions,
        "availability": available,
        "transitions": transitions,
        "atoms": atoms,
        "labels": labels,
    })

    rewards: dict[str, RewardStructure] = {}
    builders: dict[str, tuple[dict[str, float], list[ActionRule]]] = {}
    for name, _tok, kind, data in reward_raw:
        state_r, rules = builders.setdefault(name, ({}, []))
        if kind == "state":
            s, v = data
            state_r[s] = state_r.get(s, 0.0) + v
        else:
            scope, pat, v = data
            rules.append(ActionRule(scope, pat, v))
    for name, (state_r, rules) in builders.items():
        rewards[name] = validate_reward(game, RewardStructure(name, state_r, tuple(rules)))

    profiles = _build_profiles(game, profile_raw)
    return Model(game, profiles, rewards)


def _build_profiles(game: Game, profile_raw) -> dict[str, StrategyProfile]:
    profiles = {}
    for name, tok, entries in profile_raw:
        if name in profiles:
            raise ModelSyntaxError(f"duplicate profile {name!r}", tok.line, tok.column)
        spec: dict[str, dict[str, dict[str, float]]] = {}
        for ag, s, dist in entries:
            spec.setdefault(ag, {})[s] = {a: prob for a, prob, _ in dist}
        try:
            profiles[name] = validate_profile(game, make_profile(game, spec))
        except ModelError as exc:
            raise type(exc)(f"profile {name!r}: {exc}") from exc
    return profiles


def parse_profiles(text: str, game: Game) -> dict[str, StrategyProfile]:
    """Parse a file holding only ``profile`` blocks against an existing game."""
    p = _Parser(text)
    raw = []
    while True:
        while p.tok.kind == "nl":
            p.next()
        if p.tok.kind == "eof":
            break
        head = p.tok
        if head.text != "profile":
            raise p.error(f"expected 'profile', found {head.text!r}")
        p.next()
        name = p.ident("profile name")
        p.expect("{")
        entries = []
        while p.tok.kind != "}":
            ag = p.ident("agent")
            s = p.ident("state")
            entries.append((ag, s, p.dist_block()))
        p.expect("}")
        p.end_statement()
        raw.append((name, head, entries))
    return _build_profiles(game, raw)


def _num(x: float) -> str:
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def _pat(pattern) -> str:
    return "(" + ",".join("*" if a is None else a for a in pattern) + ")"


def serialize_model(
    game: Game,
    profiles: Mapping[str, StrategyProfile] | None = None,
    rewards: Mapping[str, RewardStructure] | None = None,
) -> str:
    """Canonical text: one ``trans`` line per (state, joint action), no wildcards."""
    lines = ["agents " + " ".join(game.agents)]
    for ag in game.agents:
        lines.append(f"actions {ag} {{ {' '.join(game.actions[ag])} }}")
    lines.append("atoms " + " ".join(sorted(game.atoms)) if game.atoms else "atoms")
    for s in game.states:
        init = " init" if s == game.initial else ""
        labels = " ".join(sorted(game.label_of(s)))
        lines.append(f"state {s}{init} {{ {labels} }}" if labels else f"state {s}{init} {{ }}")
    for s in game.states:
        for ag in game.agents:
            if tuple(game.availability[s, ag]) != tuple(game.actions[ag]):
                lines.append(f"available {s} {ag} {{ {' '.join(game.availability[s, ag])} }}")
    for s in game.states:
        for joint in game.joint_actions(s):
            dist = " ".join(f"{t}:{_num(p)}" for t, p in game.transitions[s, joint].items())
            lines.append(f"trans {s} {_pat(joint)} {{ {dist} }}")
    for name, rs in (rewards or {}).items():
        if not rs.state_rewards and not rs.action_rules:
            # keeps the name declared; a zero entry is semantically neutral
            lines.append(f"reward {name} state {game.initial} 0")
        for s, v in rs.state_rewards.items():
            lines.append(f"reward {name} state {s} {_num(v)}")
        for rule in rs.action_rules:
            scope = rule.state if rule.state is not None else "*"
            lines.append(f"reward {name} action {scope} {_pat(rule.pattern)} {_num(rule.value)}")
    for name, prof in (profiles or {}).items():
        parts = []
        for ag, strat in prof.entries.items():
            for s in game.states:
                dist = " ".join(f"{a}:{_num(p)}" for a, p in strat.choice[s].items())
                parts.append(f"  {ag} {s} {{ {dist} }}")
        lines.append(f"profile {name} {{\n" + "\n".join(parts) + "\n}")
    return "\n".join(lines) + "\n"


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())
