import itertools
import json

import numpy as np
import pytest

from respgames.errors import AgentNotInScope, CoalitionTooLarge, PartialProfile
from respgames.logic import TRUE, Atom, Eventually, Next, any_of, label_evaluator, path_sat
from respgames.model import History, make_profile, pure_profile, validate_game
from respgames.responsibility import (
    attributable_value,
    bcr_degree,
    check_avoidable,
    check_disjoint,
    coalition_value,
    implies_on_support,
    qualitative_bcr,
    responsibility_report,
    subsets,
    value_table,
)

import properties as P
from oracles import (
    horizon_of,
    random_game,
    random_path,
    random_profile,
    shapley_by_permutations,
    support_histories,
    tree_extremal,
)

crash, pas = Atom("crash"), Atom("pass")
X_CRASH, X_PASS = Next(crash), Next(pas)


def values(table):
    return [table[c] for c in (("A1", "A2"), ("A1",), ("A2",), ())]


# -- running example ---------------------------------------------------------------


def test_not_brake_values_and_degrees(game, profiles):
    nb = profiles["p_nb"]
    t = value_table(game, nb, X_CRASH)
    assert values(t) == pytest.approx([1.0, 0.6, 0.2, 0.12], abs=1e-9)
    assert bcr_degree(game, nb, X_CRASH, "A1") == pytest.approx(0.64, abs=1e-9)
    assert bcr_degree(game, nb, X_CRASH, "A2") == pytest.approx(0.24, abs=1e-9)
    assert attributable_value(game, nb, X_CRASH) == pytest.approx(0.88, abs=1e-9)


def test_both_brake(game, profiles):
    b = profiles["p_brake"]
    assert values(value_table(game, b, X_CRASH)) == pytest.approx([0.12] * 4, abs=1e-9)
    assert values(value_table(game, b, X_PASS)) == pytest.approx([0.88, 0.8, 0.4, 0.0], abs=1e-9)
    assert [bcr_degree(game, b, X_CRASH, a) for a in game.agents] == pytest.approx([0, 0], abs=1e-9)
    assert [bcr_degree(game, b, X_PASS, a) for a in game.agents] == pytest.approx([0.64, 0.24], abs=1e-9)
    assert attributable_value(game, b, X_CRASH) == pytest.approx(0.0, abs=1e-12)


def test_both_brake_disjunction(game, profiles):
    b = profiles["p_brake"]
    either = any_of(X_CRASH, X_PASS)
    # every successor of s0 is labelled crash or pass, so v is 1 everywhere
    assert values(value_table(game, b, either)) == pytest.approx([1.0] * 4, abs=1e-9)
    for a in game.agents:
        d = bcr_degree(game, b, either, a)
        assert d == pytest.approx(0.0, abs=1e-9)
        assert d <= bcr_degree(game, b, X_CRASH, a) + bcr_degree(game, b, X_PASS, a) + 1e-9


def test_predicates_on_junction(game):
    assert check_disjoint(game, X_CRASH, X_PASS)
    assert not check_disjoint(game, X_CRASH, X_CRASH)
    assert not check_disjoint(game, X_CRASH, Eventually(2, crash))
    assert check_avoidable(game, X_CRASH)
    assert not check_avoidable(game, any_of(X_CRASH, X_PASS))
    assert not check_avoidable(game, Next(TRUE))


def test_horizon_extension_keeps_degrees(game, profiles):
    nb = profiles["p_nb"]
    for a in game.agents:
        assert bcr_degree(game, nb, X_CRASH, a) == pytest.approx(
            bcr_degree(game, nb, Eventually(2, crash), a), abs=1e-9)


def test_tautology_table(game, profiles):
    t = value_table(game, profiles["p_half"], Next(TRUE))
    assert all(v == 1.0 for _, v in t.rows())
    assert attributable_value(game, profiles["p_half"], Next(TRUE)) == 0.0


def test_single_agent_table():
    g = validate_game({"agents": ["A"], "states": ["u"], "initial": "u", "actions": {"A": ["a"]},
                       "transitions": {("u", ("a",)): {"u": 1.0}}})
    t = value_table(g, pure_profile(g, {"A": "a"}), Next(TRUE))
    assert [c for c, _ in t.rows()] == [(), ("A",)]


def test_row_order_and_report(game, profiles):
    rep = responsibility_report(game, profiles["p_nb"], X_CRASH)
    assert [c for c, _ in rep.table.rows()] == [(), ("A1",), ("A2",), ("A1", "A2")]
    data = json.loads(rep.to_json())
    assert set(data) == {"mode", "horizon", "upsilon", "degrees", "table"}
    assert data["degrees"]["A1"] == pytest.approx(0.64)
    assert data["table"][0] == {"coalition": [], "v": pytest.approx(0.12)}


def test_errors(game, profiles):
    nb = profiles["p_nb"]
    with pytest.raises(AgentNotInScope):
        bcr_degree(game, nb, X_CRASH, "A1", scope=["A2"])
    with pytest.raises(CoalitionTooLarge):
        value_table(game, nb, X_CRASH, cap=1)
    with pytest.raises(PartialProfile):
        value_table(game, nb.restrict(["A1"]), X_CRASH)
    with pytest.raises(ValueError):
        coalition_value(game, nb, X_CRASH, (), mode="avg")


def test_restricted_scope(game, profiles):
    nb = profiles["p_nb"]
    # with A2 outside the scope it is always adversarial: D = v({1}) - v({})
    assert bcr_degree(game, nb, X_CRASH, "A1", scope=["A1"]) == pytest.approx(0.6 - 0.12)


def test_max_mode(game, profiles):
    t = value_table(game, profiles["p_brake"], X_PASS, mode="max")
    assert values(t) == pytest.approx([0.88] * 4, abs=1e-9)
    t = value_table(game, profiles["p_nb"], X_CRASH, mode="max")
    assert values(t) == pytest.approx([1.0] * 4, abs=1e-9)


def test_threads_do_not_change_result(game, profiles):
    a = value_table(game, profiles["p_half"], Eventually(2, crash), threads=1)
    b = value_table(game, profiles["p_half"], Eventually(2, crash), threads=4)
    assert a.entries == b.entries


def test_start_state(game, profiles):
    assert coalition_value(game, profiles["p_nb"], X_CRASH, (), start="s1") == 1.0


# -- qualitative responsibility ----------------------------------------------------


def brute_bcr(game, profile, outcome, agent):
    holds = label_evaluator(game)
    k = horizon_of(outcome)
    idx = game.agent_index

    def violating(coal):
        def allowed(s, joint):
            return all(profile[a].prob(s, joint[idx[a]]) > 0 for a in coal)
        return [h for h in support_histories(game, k, allowed) if not path_sat(h, outcome, holds)]

    others = [a for a in game.agents if a != agent]
    for j in subsets(others):
        if not violating(set(j) | {agent}) and violating(set(j)):
            return True, j
    return False, None


def test_qualitative_examples(game, profiles):
    nb = profiles["p_nb"]
    ok, w = qualitative_bcr(game, nb, X_CRASH, "A1")
    assert ok and w.coalition == ("A2",)
    assert w.history == History.of("s0", ("b1", "nb2"), "s2")
    ok, w = qualitative_bcr(game, nb, X_CRASH, "A2")
    assert ok and w.coalition == ("A1",)
    assert not qualitative_bcr(game, profiles["p_brake"], X_CRASH, "A1")[0]
    with pytest.raises(AgentNotInScope):
        qualitative_bcr(game, nb, X_CRASH, "A7")


@pytest.mark.parametrize("seed", range(40))
def test_qualitative_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng)
    prof = random_profile(rng, g, pure_bias=0.7)
    path = random_path(rng)
    holds = label_evaluator(g)
    for agent in g.agents:
        ok, w = qualitative_bcr(g, prof, path, agent)
        ref_ok, ref_j = brute_bcr(g, prof, path, agent)
        assert ok == ref_ok
        if ok:
            assert w.coalition == ref_j and agent not in w.coalition
            assert not path_sat(w.history, path, holds)
            for s, joint in zip(w.history.states, w.history.joint_actions):
                assert all(prof[a].prob(s, joint[g.agent_index[a]]) > 0 for a in w.coalition)


# -- oracles -----------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(40))
def test_table_and_degrees_match_oracles(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng)
    prof = random_profile(rng, g)
    path = random_path(rng)
    t = value_table(g, prof, path)
    ref = {c: tree_extremal(g, prof.restrict(c), path) for c in subsets(g.agents)}
    for c, v in t.rows():
        assert v == pytest.approx(ref[c], abs=1e-9)
        assert -1e-9 <= v <= 1 + 1e-9
    for a in g.agents:
        assert bcr_degree(g, prof, path, a, table=t) == pytest.approx(
            shapley_by_permutations(ref, g.agents, a), abs=1e-9)


@pytest.mark.parametrize("seed", range(40))
def test_table_monotone_under_inclusion(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng)
    prof = random_profile(rng, g)
    t = value_table(g, prof, random_path(rng))
    for small, large in itertools.product(subsets(g.agents), repeat=2):
        if set(small) <= set(large):
            assert t[small] <= t[large] + 1e-12


@pytest.mark.parametrize("seed", range(30))
def test_disjoint_and_implication_match_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng)
    f1, f2 = random_path(rng), random_path(rng)
    holds = label_evaluator(g)
    k = max(horizon_of(f1), horizon_of(f2))
    hs = support_histories(g, k)
    assert check_disjoint(g, f1, f2) == (not any(path_sat(h, f1, holds) and path_sat(h, f2, holds) for h in hs))
    assert implies_on_support(g, f1, f2) == all(path_sat(h, f2, holds) for h in hs if path_sat(h, f1, holds))


# -- Shapley axioms that hold on random instances ------------------------------------


def suite_instance(seed):
    rng = np.random.default_rng(seed)
    g = random_game(rng)
    return g, random_profile(rng, g), random_path(rng)


@pytest.mark.parametrize("seed", range(0, 200, 5))
def test_efficiency(seed):
    assert P.check_efficiency(*suite_instance(seed))


@pytest.mark.parametrize("seed", range(0, 200, 5))
def test_non_negativity(seed):
    assert P.check_nonnegative(*suite_instance(seed))


@pytest.mark.parametrize("seed", range(0, 200, 5))
def test_null_player(seed):
    assert P.check_null_player(*suite_instance(seed)) is not False


@pytest.mark.parametrize("seed", range(40))
def test_symmetry(seed):
    rng = np.random.default_rng(seed)
    g, prof = P.symmetric_game(rng)
    assert P.check_symmetry(g, prof, random_path(rng)) is not False


def test_null_player_is_exactly_zero():
    # A2's action never matters
    g = validate_game({
        "agents": ["A1", "A2"], "states": ["s", "bad", "ok"], "initial": "s",
        "actions": {"A1": ["a", "b"], "A2": ["c", "d"]},
        "transitions": {**{("s", (x, y)): ({"bad": 1.0} if x == "a" else {"bad": 0.3, "ok": 0.7})
                           for x in "ab" for y in "cd"},
                        **{(t, (x, y)): {t: 1.0} for t in ("bad", "ok") for x in "ab" for y in "cd"}},
        "atoms": ["p"], "labels": {"bad": ["p"]}})
    prof = pure_profile(g, {"A1": "a", "A2": "c"})
    assert bcr_degree(g, prof, Next(Atom("p")), "A2") == 0.0
    assert bcr_degree(g, prof, Next(Atom("p")), "A1") == pytest.approx(0.7)


# -- counterexamples: properties that do not hold in general -----------------------


def one_step_game(agents, actions, outcome_of, labels):
    """``outcome_of(joint)`` names the successor of s0; successors self-loop."""
    succs = sorted(set(labels))
    transitions = {}
    for joint in itertools.product(*(actions[a] for a in agents)):
        transitions["s0", joint] = outcome_of(joint)
        for t in succs:
            transitions[t, joint] = {t: 1.0}
    return validate_game({"agents": agents, "states": ["s0"] + succs, "initial": "s0",
                          "actions": actions, "transitions": transitions,
                          "atoms": ["p", "q"], "labels": labels})


def test_subadditivity_counterexample():
    g = one_step_game(["A"], {"A": ["a", "d"]},
                      lambda j: {"both": 0.5, "none": 0.5} if j == ("a",) else {"onlyp": 0.5, "onlyq": 0.5},
                      {"both": ["p", "q"], "none": [], "onlyp": ["p"], "onlyq": ["q"]})
    sigma = pure_profile(g, {"A": "d"})
    p, q = Atom("p"), Atom("q")
    assert bcr_degree(g, sigma, Next(p), "A") == pytest.approx(0.0)
    assert bcr_degree(g, sigma, Next(q), "A") == pytest.approx(0.0)
    joined = bcr_degree(g, sigma, Next(P.Or(p, q)), "A")
    assert joined == pytest.approx(0.5)
    assert not P.check_subadditivity(g, sigma, Next(p), Next(q), Next(P.Or(p, q)))


def test_exact_additivity_counterexample():
    table = {("a1", "a2"): "P", ("a1", "b2"): "P", ("b1", "a2"): "Q", ("b1", "b2"): "Z"}
    g = one_step_game(["A1", "A2"], {"A1": ["a1", "b1"], "A2": ["a2", "b2"]},
                      lambda j: {table[j]: 1.0}, {"P": ["p"], "Q": ["q"], "Z": []})
    sigma = pure_profile(g, {"A1": "a1", "A2": "a2"})
    xp, xq, xj = Next(Atom("p")), Next(Atom("q")), Next(P.Or(Atom("p"), Atom("q")))
    assert check_disjoint(g, xp, xq) and check_avoidable(g, xj)
    dp = [bcr_degree(g, sigma, xp, a) for a in g.agents]
    dq = [bcr_degree(g, sigma, xq, a) for a in g.agents]
    dj = [bcr_degree(g, sigma, xj, a) for a in g.agents]
    assert dp == pytest.approx([1.0, 0.0]) and dq == pytest.approx([0.0, 0.0])
    assert dj == pytest.approx([0.5, 0.5])
    assert P.check_additivity(g, sigma, xp, xq, xj) is False


def test_monotonicity_counterexample():
    # A1 reaches p at once with a1; with b1 it goes to m where A2 decides
    transitions = {}
    for x, y in itertools.product(["a1", "b1"], ["g2", "h2"]):
        transitions["s0", (x, y)] = {"P": 1.0} if x == "a1" else {"m": 1.0}
        transitions["m", (x, y)] = {"P": 1.0} if y == "g2" else {"Z": 1.0}
        transitions["P", (x, y)] = {"P": 1.0}
        transitions["Z", (x, y)] = {"Z": 1.0}
    g = validate_game({"agents": ["A1", "A2"], "states": ["s0", "m", "P", "Z"], "initial": "s0",
                       "actions": {"A1": ["a1", "b1"], "A2": ["g2", "h2"]},
                       "transitions": transitions, "atoms": ["p"], "labels": {"P": ["p"]}})
    sigma = pure_profile(g, {"A1": "a1", "A2": "g2"})
    f1, f2 = Eventually(1, Atom("p")), Eventually(2, Atom("p"))
    assert implies_on_support(g, f1, f2) and check_avoidable(g, f2)
    d1 = [bcr_degree(g, sigma, f1, a) for a in g.agents]
    d2 = [bcr_degree(g, sigma, f2, a) for a in g.agents]
    assert d1 == pytest.approx([1.0, 0.0])
    assert d2 == pytest.approx([0.5, 0.5])
    assert P.check_monotonicity(g, sigma, f1, f2) is False
