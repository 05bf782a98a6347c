"""Acceptance criteria 1-10.

Each criterion is a function returning ``(passed, detail)``; the matching
test prints one ``CRITERION n: PASS|FAIL`` line and then asserts.  Running
this file directly prints all ten lines without pytest.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from respgames.checker import CheckContext, check
from respgames.engine import expected_reward, extremal_probability, sat_probability
from respgames.equilibrium import parse_utility_file, solve_ne
from respgames.errors import NonPolynomial
from respgames.fixtures import data_path
from respgames.logic import Atom, Eventually, Next, any_of, parse_state_formula
from respgames.matrix import matrix_game_value
from respgames.model import StrategyProfile, make_profile
from respgames.modelfile import load_model
from respgames.parametric import (
    build_psmas,
    fill,
    symbolic_expected_payoff,
    symbolic_responsibility,
    symbolic_sat_probability,
    to_profile,
    utility,
)
from respgames.responsibility import (
    attributable_value,
    bcr_degree,
    check_avoidable,
    check_disjoint,
    value_table,
)

from oracles import brute_sat_probability, random_game, random_path, random_profile, random_reward
from properties import run_suite
from test_simulate import mc_trial

TOL = 1e-9
CRASH, PASS = Next(Atom("crash")), Next(Atom("pass"))
ALL, ONE, TWO, NOBODY = ("A1", "A2"), ("A1",), ("A2",), ()


def fixture():
    model = load_model(data_path("junction.csg"))
    return model, model.game, model.profiles


def close(a, b, tol=TOL):
    return abs(a - b) <= tol


def table_is(table, values, tol=TOL):
    got = [table[c] for c in (ALL, ONE, TWO, NOBODY)]
    return all(close(g, v, tol) for g, v in zip(got, values)), got


def degrees(game, prof, outcome):
    return [bcr_degree(game, prof, outcome, a) for a in game.agents]


# -- criteria ----------------------------------------------------------------------


def criterion_1():
    _, g, profs = fixture()
    ok_table, got = table_is(value_table(g, profs["p_nb"], CRASH), (1.0, 0.6, 0.2, 0.12))
    d = degrees(g, profs["p_nb"], CRASH)
    ok = ok_table and close(d[0], 0.64) and close(d[1], 0.24)
    return ok, f"v={got} D={d}"


def criterion_2():
    _, g, profs = fixture()
    u = attributable_value(g, profs["p_nb"], CRASH)
    return close(u, 0.88), f"upsilon={u}"


def criterion_3():
    _, g, profs = fixture()
    p = profs["p_brake"]
    ok1, t_crash = table_is(value_table(g, p, CRASH), (0.12,) * 4)
    ok2, t_pass = table_is(value_table(g, p, PASS), (0.88, 0.8, 0.4, 0.0))
    d_crash, d_pass = degrees(g, p, CRASH), degrees(g, p, PASS)
    d_or = degrees(g, p, any_of(CRASH, PASS))
    ok3 = all(close(x, 0.0) for x in d_crash)
    ok4 = close(d_pass[0], 0.64) and close(d_pass[1], 0.24)
    ok5 = all(close(x, 0.0) for x in d_or)
    ok6 = all(o <= c + q + TOL for o, c, q in zip(d_or, d_crash, d_pass))
    return all((ok1, ok2, ok3, ok4, ok5, ok6)), (
        f"v_crash={t_crash} v_pass={t_pass} D_crash={d_crash} D_pass={d_pass} D_or={d_or}")


def criterion_4():
    _, g, _ = fixture()
    dis = check_disjoint(g, CRASH, PASS)
    avo = check_avoidable(g, any_of(CRASH, PASS))
    return dis is True and avo is False, f"disjoint={dis} avoidable={avo}"


def criterion_5():
    _, g, profs = fixture()
    p = profs["p_nb"]
    a, b = degrees(g, p, CRASH), degrees(g, p, Eventually(2, Atom("crash")))
    ok = all(close(x, y) for x, y in zip(a, b)) and close(a[0], 0.64) and close(a[1], 0.24)
    return ok, f"D_X={a} D_F2={b}"


def criterion_6():
    model, g, profs = fixture()
    f = parse_state_formula('<<A1,A2>> D<=0 [BCR(A1,p_brake,F<=2 "crash")]', g.agents)
    v = check(CheckContext(g, profs, model.rewards), f)
    return v.truth is True and v.state == "s0", f"truth={v.truth} value={v.value}"


def criterion_7():
    _, g, _ = fixture()
    uf = parse_utility_file(data_path("junction_utilities.txt").read_text(), g)
    psmas = build_psmas(g, reduced=True)
    utilities = utility(psmas, 1.0, override=uf.polynomials)
    sols = solve_ne(utilities, uf.space)
    ok = (len(sols) == 1 and sols[0].verified
          and abs(sols[0].params["x1"] - 5 / 12) <= 1e-4
          and abs(sols[0].params["x2"] - 0.625) <= 1e-6)
    return ok, f"solutions={[s.params for s in sols]}"


def criterion_8():
    results = run_suite(200)
    ok = all(r.ok for r in results.values())
    parts = [f"{r.name}: {len(r.failures)}/{r.checked} failed"
             + (f" (seeds {r.failures[:5]})" if r.failures else "") for r in results.values()]
    return ok, "; ".join(parts)


def _symbolic_coherence(game, path, reward, rng, points=20):
    ps = build_psmas(game, reduced=True)
    sat = symbolic_sat_probability(ps, path)
    pay = symbolic_expected_payoff(ps, reward, path)
    deg = {}
    for a in game.agents:
        try:
            deg[a] = symbolic_responsibility(ps, path, a)
        except NonPolynomial:
            pass
    worst = 0.0
    for _ in range(points):
        ev = {}
        for ag, s, acts in ps.points():
            ev.update({f"x_{ag}_{s}_{a}": float(p)
                       for a, p in zip(acts, rng.dirichlet(np.ones(len(acts))))})
        ev = fill(ps, ev)
        prof, pt = to_profile(ps, ev), {v: ev[v] for v in ps.variables}
        worst = max(worst, abs(sat(pt) - sat_probability(game, prof, path)),
                    abs(pay(pt) - expected_reward(game, prof, reward, path)))
        for a, d in deg.items():
            worst = max(worst, abs(d(pt) - bcr_degree(game, prof, path, a)))
    return worst


def criterion_9():
    worst_enum = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        g = random_game(rng, max_agents=2)
        prof, path = random_profile(rng, g), random_path(rng)
        worst_enum = max(worst_enum, abs(sat_probability(g, prof, path) - brute_sat_probability(g, prof, path)))
    model, g, _ = fixture()
    rng = np.random.default_rng(2024)
    worst_sym = max(_symbolic_coherence(g, path, model.rewards["r1"], rng)
                    for path in (CRASH, PASS, Eventually(2, Atom("crash"))))
    for seed in range(12):
        r = np.random.default_rng(seed)
        rg = random_game(r, max_agents=2, max_states=3)
        worst_sym = max(worst_sym, _symbolic_coherence(rg, random_path(r), random_reward(r, rg), r))
    hits = 0
    for seed in range(100):
        est, err, exact = mc_trial(seed)
        hits += abs(est - exact) <= 4 * err if err > 0 else est == exact
    ok = worst_enum <= 1e-12 and worst_sym <= 1e-9 and hits >= 99
    return ok, f"enum_gap={worst_enum:.3g} symbolic_gap={worst_sym:.3g} mc_hits={hits}/100"


def criterion_10():
    worst_gap = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        rows, cols = rng.integers(2, 5, size=2)
        m = rng.normal(size=(rows, cols))
        v, x, y = matrix_game_value(m)
        worst_gap = max(worst_gap, float((m @ y).max() - (x @ m).min()))
    outside = 0
    for seed in range(30):
        rng = np.random.default_rng(seed)
        g = random_game(rng)
        prof, path = random_profile(rng, g), random_path(rng)
        keep = [a for a in g.agents if rng.random() < 0.5]
        fixed = prof.restrict(keep)
        lo = extremal_probability(g, fixed, path, "min").value
        hi = extremal_probability(g, fixed, path, "max").value
        free = [a for a in g.agents if a not in keep]
        for _ in range(100):
            other = random_profile(rng, g, free) if free else StrategyProfile()
            full = make_profile(g, {**{a: dict(fixed[a].choice) for a in keep},
                                    **{a: dict(other[a].choice) for a in free}})
            p = sat_probability(g, full, path)
            outside += not (lo - TOL <= p <= hi + TOL)
    return worst_gap <= 1e-9 and outside == 0, f"max_gap={worst_gap:.3g} outside_bracket={outside}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def report(n):
    ok, detail = CRITERIA[n - 1]()
    return ok, f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    ok, line = report(n)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for n in range(1, 11):
        ok, line = report(n)
        failed += not ok
        print(line)
    sys.exit(1 if failed else 0)
