import numpy as np
import pytest

from respgames.matrix import MatrixGame, matrix_game_value

from oracles import lp_value

JUNCTION_STEP = np.array([[0.12, 0.2], [0.6, 1.0]])


def gap(m, v, x, y):
    lower = float((x @ m).min())
    upper = float((m @ y).max())
    return max(abs(lower - v), abs(upper - v))


def test_constant():
    v, x, y = matrix_game_value(np.array([[3.5]]))
    assert v == 3.5 and x.tolist() == [1.0] and y.tolist() == [1.0]


def test_matching_pennies():
    v, x, y = matrix_game_value(MatrixGame(np.array([[1.0, -1.0], [-1.0, 1.0]])))
    assert abs(v) <= 1e-12
    assert np.allclose(x, [0.5, 0.5], atol=1e-12) and np.allclose(y, [0.5, 0.5], atol=1e-12)


def test_junction_step_game_row_minimising():
    # A1 minimises crash probability against a maximising A2: saddle at (b1, nb2)
    v, x, y = matrix_game_value(-JUNCTION_STEP)
    assert -v == pytest.approx(0.2, abs=1e-12)
    assert x.tolist() == [1.0, 0.0] and y.tolist() == [0.0, 1.0]


def test_junction_step_game_joint_minimum():
    # with both agents minimising together the best entry is (b1, b2)
    assert JUNCTION_STEP.min() == 0.12


def test_rejects_bad_payoff():
    with pytest.raises(ValueError):
        MatrixGame(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        MatrixGame(np.zeros((0, 2)))


@pytest.mark.parametrize("seed", range(100))
def test_random_matrices(seed):
    rng = np.random.default_rng(seed)
    rows, cols = rng.integers(2, 5, size=2)
    m = rng.normal(size=(rows, cols))
    v, x, y = matrix_game_value(m)
    assert gap(m, v, x, y) <= 1e-9
    assert m.min() - 1e-12 <= v <= m.max() + 1e-12
    assert abs(v - lp_value(m)) <= 1e-8
    assert abs(x.sum() - 1) <= 1e-12 and abs(y.sum() - 1) <= 1e-12
    assert x.min() >= 0 and y.min() >= 0
