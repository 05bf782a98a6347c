"""Responsibility-aware equilibria on the junction.

The bundled utility file holds hand-written polynomials for the two drivers.
They are not the polynomials the model's own reward structures and degrees
produce, so both are solved here side by side.
"""

from respgames import build_psmas, load_model, parse_path_formula, parse_utility_file, solve_ne, utility
from respgames.equilibrium import space_from_psmas, utilities_from_file
from respgames.fixtures import data_path

model = load_model(data_path("junction.csg"))
game = model.game

uf = parse_utility_file(data_path("junction_utilities.txt").read_text(), game)
print("utility file:")
for agent, poly in uf.polynomials.items():
    print(f"  u {agent} = {poly}")
for sol in solve_ne(utilities_from_file(uf), uf.space):
    print("  equilibrium", {k: round(v, 5) for k, v in sol.params.items()}, "verified" if sol.verified else "")

outcome = parse_path_formula('X "crash"', game.agents)
psmas = build_psmas(game, reduced=True)
rewards = {"A1": model.rewards["r1"], "A2": model.rewards["r2"]}
for lam in (0.0, 1.0, 10.0):
    us = utility(psmas, lam, rewards, outcome)
    space = space_from_psmas(psmas, 1, us)
    print(f"derived utilities, lambda={lam}:")
    for agent, u in us.items():
        print(f"  u {agent} = {u.combined}")
    for sol in solve_ne(us, space):
        params = {k: round(v, 5) for k, v in sol.params.items()}
        print("  equilibrium", params, "degenerate" if sol.degenerate else "")
