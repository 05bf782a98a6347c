"""Zero-sum matrix games (row player maximises)."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

_SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class MatrixGame:
    payoff: np.ndarray
    rows: Sequence = field(default=())
    cols: Sequence = field(default=())

    def __post_init__(self):
        m = np.asarray(self.payoff, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise ValueError("payoff must be a non-empty 2-d matrix")
        if not np.all(np.isfinite(m)):
            raise ValueError("payoff entries must be finite")
        object.__setattr__(self, "payoff", m)


def _security(m, x, y):
    return float((x @ m).min()), float((m @ y).max())


def _equalise(sub: np.ndarray):
    """Solve for the mixture over rows of ``sub`` equalising all columns."""
    k = sub.shape[0]
    a = np.zeros((k + 1, k + 1))
    a[:k, :k] = sub.T if sub.shape[1] == k else np.zeros((k, k))
    a[:k, k] = -1.0
    a[k, :k] = 1.0
    b = np.zeros(k + 1)
    b[k] = 1.0
    try:
        sol = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return None
    return sol[:k]


def _solve_lp(m: np.ndarray) -> np.ndarray:
    """Optimal mixed strategy of the maximising row player."""
    rows, cols = m.shape
    c = np.zeros(rows + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-m.T, np.ones((cols, 1))])
    a_eq = np.zeros((1, rows + 1))
    a_eq[0, :rows] = 1.0
    bounds = [(0, None)] * rows + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(cols), A_eq=a_eq, b_eq=[1.0], bounds=bounds,
                  method="highs", options={"primal_feasibility_tolerance": 1e-10,
                                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"matrix game LP failed: {res.message}")
    x = np.clip(res.x[:rows], 0.0, None)
    return x / x.sum()


def matrix_game_value(game: MatrixGame | np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Value and optimal mixed strategies ``(v, x, y)`` with
    ``max_x min_y x'My = v``.

    Pure saddle points are detected first (ties go to the lowest index).
    Otherwise both players' linear programmes are solved and the solutions
    polished by re-solving the equalising system on the detected supports.
    """
    m = game.payoff if isinstance(game, MatrixGame) else np.asarray(game, dtype=float)
    rows, cols = m.shape
    row_min = m.min(axis=1)
    col_max = m.max(axis=0)
    lo, hi = row_min.max(), col_max.min()
    if hi - lo <= 0.0:
        x = np.zeros(rows)
        y = np.zeros(cols)
        x[int(np.argmax(row_min))] = 1.0
        y[int(np.argmin(col_max))] = 1.0
        return float(lo), x, y

    x = _solve_lp(m)
    y = _solve_lp(-m.T)
    x, y = _polish(m, x, y)
    lower, upper = _security(m, x, y)
    return 0.5 * (lower + upper), x, y


def _polish(m, x, y):
    sx = np.flatnonzero(x > _SUPPORT_TOL)
    sy = np.flatnonzero(y > _SUPPORT_TOL)
    best = (x, y)
    lower, upper = _security(m, x, y)
    gap = upper - lower
    if len(sx) == len(sy):
        sub = m[np.ix_(sx, sy)]
        px = _equalise(sub)
        py = _equalise(-sub.T)
        if px is not None and py is not None and px.min() >= 0 and py.min() >= 0:
            nx = np.zeros_like(x)
            ny = np.zeros_like(y)
            nx[sx] = px
            ny[sy] = py
            lo2, hi2 = _security(m, nx, ny)
            if hi2 - lo2 < gap:
                best = (nx, ny)
    return best
