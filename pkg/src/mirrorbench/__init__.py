"""Configurable mirror descent and baselines for small extensive-form games."""

from .bregman import Exp, NegEntropy, NegPower, Power, bregman_div, parse_family
from .errors import ConfigurationError, DomainError, GameError, GameFileError, MirrorBenchError, SolverError
from .game.policy import JointPolicy
from .game.tree import GameTree, count_decision_points
from .games import load_game, list_games
from .gmd import GMDConfig, GMDState, gmd_step, gmd_update
from .harness import ExperimentConfig, load_config, run
from .measures import Measure, cce_gap, mcc_nash_conv, nash_conv, opt_gap, social_welfare
from .meta import MCConfig, mc_update
from .solvers import CFRSolver, CMDSolver, GMDSolver, MMDSolver, check_game, check_policy

__version__ = "0.1.0"

__all__ = [
    "CFRSolver", "CMDSolver", "ConfigurationError", "DomainError", "Exp", "ExperimentConfig",
    "GMDConfig", "GMDSolver", "GMDState", "GameError", "GameFileError", "GameTree", "JointPolicy",
    "MCConfig", "MMDSolver", "Measure", "MirrorBenchError", "NegEntropy", "NegPower", "Power",
    "SolverError", "bregman_div", "cce_gap", "check_game", "check_policy", "count_decision_points",
    "gmd_step", "gmd_update", "list_games", "load_config", "load_game", "mc_update", "mcc_nash_conv",
    "nash_conv", "opt_gap", "parse_family", "run", "social_welfare",
]
