"""Extensive-form game representation and exact traversals."""

from .policy import JointPolicy, uniform_flat
from .transforms import apply_team_rewards, fix_player_policy
from .traversal import best_response, expected_values, q_values
from .tree import (ChanceNode, DecisionNode, GameTree, InfoState, TerminalNode, chance,
                   count_decision_points, decision, terminal)

__all__ = [
    "ChanceNode", "DecisionNode", "GameTree", "InfoState", "JointPolicy", "TerminalNode",
    "apply_team_rewards", "best_response", "chance", "count_decision_points", "decision",
    "expected_values", "fix_player_policy", "q_values", "terminal", "uniform_flat",
]
