import numpy as np
import pytest

from respgames.engine import expected_reward, sat_probability
from respgames.logic import TRUE, Atom, Next
from respgames.model import make_profile
from respgames.simulate import monte_carlo

from oracles import random_game, random_path, random_profile, random_reward

X_CRASH = Next(Atom("crash"))


def within(est, err, exact, sigmas):
    if err == 0.0:
        return abs(est - exact) <= 1e-9
    return abs(est - exact) <= sigmas * err


def mc_trial(seed, samples=2000):
    """One seeded run on a random instance: (estimate, stderr, analytic)."""
    rng = np.random.default_rng(10_000 + seed)
    g = random_game(rng)
    prof = random_profile(rng, g)
    path = random_path(rng)
    if seed % 2:
        r = random_reward(rng, g)
        est, err = monte_carlo(g, prof, path, samples, seed, reward=r)
        return est, err, expected_reward(g, prof, r, path)
    est, err = monte_carlo(g, prof, path, samples, seed)
    return est, err, sat_probability(g, prof, path)


def test_deterministic_outcome(game, profiles):
    assert monte_carlo(game, profiles["p_nb"], X_CRASH, 100_000) == (1.0, 0.0)


def test_both_brake(game, profiles):
    est, err = monte_carlo(game, profiles["p_brake"], X_CRASH, 100_000, seed=42)
    assert within(est, err, 0.12, 3)


def test_half_profile(game):
    prof = make_profile(game, {"A1": {"s0": {"b1": 0.5, "nb1": 0.5}},
                               "A2": {"s0": {"b2": 0.5, "nb2": 0.5}}})
    est, err = monte_carlo(game, prof, X_CRASH, 100_000, seed=3)
    assert within(est, err, sat_probability(game, prof, X_CRASH), 3)


def test_reward_estimate(junction, game, profiles):
    r1 = junction.rewards["r1"]
    est, err = monte_carlo(game, profiles["p_brake"], Next(TRUE), 50_000, seed=1, reward=r1)
    assert within(est, err, 2.64, 4)


def test_same_seed_same_result(game, profiles):
    a = monte_carlo(game, profiles["p_half"], X_CRASH, 25_000, seed=9)
    b = monte_carlo(game, profiles["p_half"], X_CRASH, 25_000, seed=9)
    c = monte_carlo(game, profiles["p_half"], X_CRASH, 25_000, seed=10)
    assert a == b and a != c


def test_invalid_sample_count(game, profiles):
    with pytest.raises(ValueError):
        monte_carlo(game, profiles["p_half"], X_CRASH, 0)


def test_four_sigma_coverage():
    hits = sum(within(*mc_trial(seed), 4) for seed in range(100))
    assert hits >= 99
