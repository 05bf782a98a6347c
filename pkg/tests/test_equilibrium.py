import itertools
from pathlib import Path

import numpy as np
import pytest

from respgames.engine import expected_reward
from respgames.errors import MissingParameter, NoSolutionFound, NonPolynomial
from respgames.logic import TRUE, Always, Atom, Next
from respgames.model import pure_profile
from respgames.parametric import (
    UtilityFunction,
    build_psmas,
    numeric_utilities,
    parameter_name,
    utility,
)
from respgames.polynomial import Polynomial, parse_polynomial
from respgames.equilibrium import (
    Choice,
    StrategySpace,
    best_response,
    ne_report,
    parse_utility_file,
    solve_ne,
    space_from_psmas,
    utilities_from_file,
    verify_ne,
)

from test_parametric import crossing_game


@pytest.fixture(scope="module")
def utility_file(game, utility_path):
    uf = parse_utility_file(Path(utility_path).read_text(), game)
    return uf, utilities_from_file(uf)


def two_by_two(u1, u2):
    space = StrategySpace((Choice("A", "s", ("a1", "a2"), ("x", None)),
                           Choice("B", "s", ("b1", "b2"), ("y", None))))
    return {"A": UtilityFunction("A", u1), "B": UtilityFunction("B", u2)}, space


def test_unique_mixed_equilibrium(utility_file):
    uf, us = utility_file
    sols = solve_ne(us, uf.space)
    assert len(sols) == 1
    s = sols[0]
    assert s.params["x1"] == pytest.approx(5 / 12, abs=1e-6)
    assert s.params["x2"] == pytest.approx(0.625, abs=1e-6)
    assert s.verified and not s.degenerate and s.residual <= 1e-10
    assert verify_ne(us, s.params, uf.space)


def test_verify_rejects_non_equilibrium(utility_file):
    uf, us = utility_file
    assert not verify_ne(us, {"x1": 1.0, "x2": 1.0}, uf.space)
    consts, space = two_by_two(Polynomial.constant(2.0), Polynomial.constant(-1.0))
    assert verify_ne(consts, {"x": 0.3, "y": 0.9}, space)


def test_best_response_sets(utility_file):
    uf, us = utility_file
    best, brs = best_response(us, "A1", {"x1": 0.2, "x2": 0.625}, uf.space)
    assert best == pytest.approx(-0.75)
    assert sorted(b["s0"] for b in brs) == ["b1", "nb1"]
    best, brs = best_response(us, "A1", {"x1": 0.2, "x2": 0.0}, uf.space)
    assert brs == [{"s0": "b1"}] and best == pytest.approx(0.0)


def test_zero_utilities_give_degenerate_representatives():
    zero = Polynomial.constant(0.0)
    us, space = two_by_two(zero, zero)
    sols = solve_ne(us, space)
    assert sols and all(s.verified for s in sols)
    assert any(s.degenerate for s in sols)


def test_dominant_strategies():
    x, y = parse_polynomial("x"), parse_polynomial("y")
    us, space = two_by_two(x + y, x + y)
    sols = solve_ne(us, space)
    assert [(s.params["x"], s.params["y"]) for s in sols] == [(1.0, 1.0)]


def oracle_2x2(u1, u2):
    """Equilibria of a generic 2x2 game from the bimatrix payoffs."""
    a = np.array([[u1({"x": 1 - i, "y": 1 - j}) for j in range(2)] for i in range(2)])
    b = np.array([[u2({"x": 1 - i, "y": 1 - j}) for j in range(2)] for i in range(2)])
    out = []
    for i, j in itertools.product(range(2), repeat=2):
        if a[i, j] >= a[1 - i, j] and b[i, j] >= b[i, 1 - j]:
            out.append((1.0 - i, 1.0 - j))
    # column mix making row indifferent, and vice versa
    da = a[0, 0] - a[1, 0] - a[0, 1] + a[1, 1]
    db = b[0, 0] - b[0, 1] - b[1, 0] + b[1, 1]
    if da and db:
        y = (a[1, 1] - a[0, 1]) / da
        x = (b[1, 1] - b[1, 0]) / db
        if 0 < x < 1 and 0 < y < 1:
            out.append((float(x), float(y)))
    return sorted(out)


@pytest.mark.parametrize("seed", range(40))
def test_random_bimatrix_against_oracle(seed):
    rng = np.random.default_rng(seed)
    c1, c2 = rng.normal(size=4), rng.normal(size=4)
    u1 = parse_polynomial(f"{c1[0]} + {c1[1]}*x + {c1[2]}*y + {c1[3]}*x*y")
    u2 = parse_polynomial(f"{c2[0]} + {c2[1]}*x + {c2[2]}*y + {c2[3]}*x*y")
    us, space = two_by_two(u1, u2)
    sols = solve_ne(us, space)
    got = sorted((s.params["x"], s.params["y"]) for s in sols)
    want = oracle_2x2(u1, u2)
    assert len(got) == len(want)
    for g, w in zip(got, want):
        assert g == pytest.approx(w, abs=1e-6)
    assert all(s.verified and verify_ne(us, s.params, space) for s in sols)


def test_lambda_zero_against_pure_enumeration(junction, game):
    rewards = {"A1": junction.rewards["r1"], "A2": junction.rewards["r2"]}
    ps = build_psmas(game, reduced=True)
    us = utility(ps, 0, rewards, Next(Atom("crash")))
    space = space_from_psmas(ps, 1, us)
    sols = solve_ne(us, space)
    assert sols and all(s.verified for s in sols)
    # independent check: pure equilibria of the one-shot game via the engine
    acts = {a: game.availability["s0", a] for a in game.agents}
    pay = {}
    for joint in itertools.product(*acts.values()):
        prof = pure_profile(game, dict(zip(game.agents, joint)))
        pay[joint] = [expected_reward(game, prof, rewards[a], Always(1, TRUE)) for a in game.agents]
    pure_ne = set()
    for joint in pay:
        stable = all(pay[joint][i] >= max(pay[joint[:i] + (b,) + joint[i + 1:]][i] for b in acts[a]) - 1e-9
                     for i, a in enumerate(game.agents))
        if stable:
            pure_ne.add(joint)
    found_pure = set()
    for s in sols:
        joint = []
        for a in game.agents:
            probs = s.probabilities[a]["s0"]
            top = max(probs, key=probs.get)
            if probs[top] < 1 - 1e-9:
                break
            joint.append(top)
        else:
            found_pure.add(tuple(joint))
    assert found_pure == pure_ne


def test_numeric_fallback_solutions_are_verified():
    g = crossing_game()
    ps = build_psmas(g, reduced=True)
    out = Atom("p")
    rewards = {}
    from respgames.model import RewardStructure
    for a in g.agents:
        rewards[a] = RewardStructure("r", {"ok": 1.0})
    with pytest.raises(NonPolynomial):
        utility(ps, 1.0, rewards, Next(out))
    us = numeric_utilities(ps, 1.0, rewards, Next(out))
    space = space_from_psmas(ps, 1)
    sols = solve_ne(us, space)
    assert sols
    for s in sols:
        assert s.verified and verify_ne(us, s.params, space)
        assert s.utilities["A1"] == pytest.approx(us["A1"](s.params))


def test_require_raises_when_search_is_empty(monkeypatch, utility_file):
    import respgames.equilibrium as eq
    uf, us = utility_file
    assert solve_ne(us, uf.space, require=True)
    monkeypatch.setattr(eq, "_supports", lambda space: iter(()))
    assert solve_ne(us, uf.space) == []
    with pytest.raises(NoSolutionFound):
        solve_ne(us, uf.space, require=True)


def test_report_is_serialisable(utility_file):
    import json
    uf, us = utility_file
    rep = ne_report(solve_ne(us, uf.space))
    assert json.loads(json.dumps(rep))["solutions"][0]["verified"] is True


@pytest.mark.parametrize("text,exc", [
    ("", ValueError),
    ("param x = A1 s0 b1\n", ValueError),
    ("bogus line\n", ValueError),
    ("param x = A1 s0 b1\nparam x = A2 s0 b2\nu A1 = x\n", ValueError),
    ("u A1 = x +\n", ValueError),
    ("u A1 = x\n", MissingParameter),
    ("param x = A9 s0 b1\nu A1 = x\n", MissingParameter),
    ("param x = A1 s0 zz\nu A1 = x\n", MissingParameter),
    ("param x = A1 s0 b1\nparam y = A1 s0 nb1\nu A1 = x\n", MissingParameter),
])
def test_utility_file_errors(game, text, exc):
    with pytest.raises(exc):
        parse_utility_file(text, game)


def test_utility_file_comments_and_space(game):
    uf = parse_utility_file("# header\nparam z = A1 s0 b1  # braking\nu A1 = z\n", game)
    (c,) = uf.space.choices
    assert c.actions == ("b1", "nb1") and c.names == ("z", None)
