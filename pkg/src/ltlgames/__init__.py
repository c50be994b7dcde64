"""
Worst-case optimal strategies for LTL objectives on turn-based stochastic games.

The pipeline is: game (:mod:`.game`) x parity automaton (:mod:`.automata`)
gives a product game (:mod:`.product`); adding a priority reward machine
(:mod:`.prm`) gives a discounted priority game (:mod:`.priority`) on which
minimax-Q (:mod:`.learner`) or value iteration (:mod:`.analysis`) runs.
Learned choices become finite-memory strategies (:mod:`.strategy`).
"""

from .analysis import (
    discounted_value_vi, evaluate_pair, induce_mc, maximin_bounds, parity_best_response, parity_value_exact,
    worst_case_value,
)
from .automata import Dpa, check_equivalence_bounded, load_hoa, to_hoa
from .errors import CapExceeded, FormatError
from .game import GridSpec, StochasticGame, build_gridworld, load_game, load_grid, parse_game
from .learner import LearnSchedule, make_rng, minimax_q_train
from .ltl import parse_ltl
from .prm import Prm
from .priority import PriorityGame, build_priority
from .product import ProductGame, build_product
from .strategy import FiniteMemoryStrategy, evaluate_worst_case, induce_strategy, simulate

__version__ = "0.1.0"

__all__ = [
    "CapExceeded", "Dpa", "FiniteMemoryStrategy", "FormatError", "GridSpec", "LearnSchedule", "PriorityGame",
    "Prm", "ProductGame", "StochasticGame", "build_gridworld", "build_priority", "build_product",
    "check_equivalence_bounded", "discounted_value_vi", "evaluate_pair", "evaluate_worst_case", "induce_mc",
    "induce_strategy", "load_game", "load_grid", "load_hoa", "make_rng", "maximin_bounds", "minimax_q_train",
    "parity_best_response", "parity_value_exact", "parse_game", "parse_ltl", "simulate", "to_hoa",
    "worst_case_value",
]
