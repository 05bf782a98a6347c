"""Responsibility attribution, model checking and equilibria for concurrent
stochastic games."""

__version__ = "0.1.0"

from .checker import CheckContext, Verdict, check, eval_state, sat_set
from .engine import (
    expected_reward,
    extremal_probability,
    game_value_probability,
    path_probability,
    robust_expected_reward,
    sat_probability,
)
from .equilibrium import (
    NeSolution,
    StrategySpace,
    best_response,
    parse_utility_file,
    solve_ne,
    space_from_psmas,
    verify_ne,
)
from .logic import any_of, horizon, parse_formula, parse_path_formula, parse_state_formula, path_sat
from .matrix import MatrixGame, matrix_game_value
from .model import (
    Game,
    History,
    RewardStructure,
    Strategy,
    StrategyProfile,
    joint_actions,
    make_profile,
    pure_profile,
    reward_of,
    validate_game,
)
from .modelfile import Model, load_model, parse_model, serialize_model
from .parametric import (
    Psmas,
    UtilityFunction,
    admissible,
    build_psmas,
    symbolic_expected_payoff,
    symbolic_responsibility,
    symbolic_sat_probability,
    utility,
)
from .polynomial import Polynomial, parse_polynomial
from .responsibility import (
    CoalitionValueTable,
    ResponsibilityReport,
    attributable_value,
    bcr_degree,
    check_avoidable,
    check_disjoint,
    coalition_value,
    qualitative_bcr,
    responsibility_report,
    value_table,
)
from .simulate import monte_carlo

__all__ = [name for name in dir() if not name.startswith("_")]
