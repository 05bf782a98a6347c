"""Monte Carlo estimates next to the exact values."""

from respgames import expected_reward, load_model, monte_carlo, parse_path_formula, sat_probability
from respgames.fixtures import data_path

model = load_model(data_path("junction.csg"))
game = model.game
outcome = parse_path_formula('F<=2 "crash"', game.agents)

for name, profile in model.profiles.items():
    for n in (1_000, 100_000):
        est, err = monte_carlo(game, profile, outcome, n, seed=7)
        exact = sat_probability(game, profile, outcome)
        print(f"{name:8s} n={n:<7d} estimate={est:.4f} +- {err:.4f}  exact={exact:.4f}")

reward = model.rewards["r1"]
true_path = parse_path_formula("X true", game.agents)
est, err = monte_carlo(game, model.profiles["p_half"], true_path, 50_000, seed=1, reward=reward)
print(f"r1 under p_half: {est:.4f} +- {err:.4f}  exact="
      f"{expected_reward(game, model.profiles['p_half'], reward, true_path):.4f}")
