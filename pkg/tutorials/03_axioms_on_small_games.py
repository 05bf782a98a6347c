"""Which attribution axioms survive on small hand-built games.

Efficiency holds by construction.  The three games below show that
sub-additivity, exact additivity and monotonicity can each fail once the
fixed coalition faces an adversary that reacts to the outcome.
"""

import itertools

from respgames import bcr_degree, make_profile, validate_game
from respgames.logic import And, Atom, Eventually, Next, Not

P, Q = Atom("p"), Atom("q")


def Or(a, b):
    return Not(And(Not(a), Not(b)))


def one_step(agents, actions, outcome_of, labels):
    """Single decision at ``s``; ``outcome_of`` maps a joint action to a
    distribution over absorbing states."""
    states = ["s"] + sorted({t for d in outcome_of.values() for t in d})
    trans = {}
    for joint in itertools.product(*(actions[a] for a in agents)):
        trans["s", joint] = outcome_of[joint]
        for t in states[1:]:
            trans[t, joint] = {t: 1.0}
    return validate_game({"agents": agents, "states": states, "initial": "s", "actions": actions,
                          "transitions": trans, "atoms": ["p", "q"], "labels": labels})


def show(title, game, profile, outcomes):
    print(title)
    for name, phi in outcomes:
        print(f"  {name:10s}", {a: round(bcr_degree(game, profile, phi, a), 4) for a in game.agents})


# one agent: switching to ``a`` cannot avoid either atom alone, but does avoid their union half the time
g = one_step(["A"], {"A": ["a", "d"]},
             {("a",): {"both": 0.5, "none": 0.5}, ("d",): {"onlyp": 0.5, "onlyq": 0.5}},
             {"both": ["p", "q"], "onlyp": ["p"], "onlyq": ["q"]})
prof = make_profile(g, {"A": {s: {"d": 1.0} for s in g.states}})
show("sub-additivity", g, prof, [("X p", Next(P)), ("X q", Next(Q)), ("X (p|q)", Next(Or(P, Q)))])

# two agents with disjoint, avoidable outcomes whose degrees still do not add up
acts = {"A1": ["a1", "b1"], "A2": ["a2", "b2"]}
g = one_step(["A1", "A2"], acts,
             {("a1", "a2"): {"P": 1.0}, ("a1", "b2"): {"P": 1.0}, ("b1", "a2"): {"Q": 1.0},
              ("b1", "b2"): {"Z": 1.0}},
             {"P": ["p"], "Q": ["q"]})
prof = make_profile(g, {"A1": {s: {"a1": 1.0} for s in g.states},
                        "A2": {s: {"a2": 1.0} for s in g.states}})
show("exact additivity", g, prof, [("X p", Next(P)), ("X q", Next(Q)), ("X (p|q)", Next(Or(P, Q)))])

# a later chance to avoid the outcome shifts blame between agents
trans = {}
for x, y in itertools.product(["a1", "b1"], ["g2", "h2"]):
    trans["s", (x, y)] = {"P": 1.0} if x == "a1" else {"m": 1.0}
    trans["m", (x, y)] = {"P": 1.0} if y == "g2" else {"Z": 1.0}
    trans["P", (x, y)] = {"P": 1.0}
    trans["Z", (x, y)] = {"Z": 1.0}
g = validate_game({"agents": ["A1", "A2"], "states": ["s", "m", "P", "Z"], "initial": "s",
                   "actions": {"A1": ["a1", "b1"], "A2": ["g2", "h2"]}, "transitions": trans,
                   "atoms": ["p", "q"], "labels": {"P": ["p"]}})
prof = make_profile(g, {"A1": {s: {"a1": 1.0} for s in g.states},
                        "A2": {s: {"g2": 1.0} for s in g.states}})
show("monotonicity", g, prof, [("F<=1 p", Eventually(1, P)), ("F<=2 p", Eventually(2, P))])
