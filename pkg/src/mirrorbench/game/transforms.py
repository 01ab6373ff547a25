"""Tree rewrites used to derive the single-agent and team variants."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, GameError
from .tree import ChanceNode, DecisionNode, GameTree, TerminalNode


def validate_partition(teams, player_count: int) -> list:
    teams = [sorted(int(p) for p in team) for team in teams]
    flat = sorted(p for team in teams for p in team)
    if any(len(t) == 0 for t in teams) or flat != list(range(player_count)):
        raise ConfigurationError(
            f"teams {teams} do not partition the players 0..{player_count - 1}")
    return teams


def _map_tree(node, on_terminal, on_decision=None):
    if isinstance(node, TerminalNode):
        return on_terminal(node)
    if isinstance(node, ChanceNode):
        return ChanceNode(tuple((p, _map_tree(c, on_terminal, on_decision)) for p, c in node.outcomes),
                          node.label)
    if on_decision is not None:
        replaced = on_decision(node)
        if replaced is not None:
            return replaced
    return DecisionNode(node.player, node.infostate,
                        tuple((a, _map_tree(c, on_terminal, on_decision)) for a, c in node.actions))


def apply_team_rewards(tree: GameTree, teams, name: str | None = None) -> GameTree:
    """Replace each team member's payoff with the team average.

    Structure and infostates are untouched; only terminal payoffs change.
    """
    teams = validate_partition(teams, tree.player_count)

    def share(node):
        pay = np.array(node.payoffs)
        out = pay.copy()
        for team in teams:
            out[team] = pay[team].sum() / len(team)
        return TerminalNode(tuple(float(x) for x in out))

    new = GameTree(_map_tree(tree.root, share), tree.player_count, name or f"{tree.name}[teams]")
    new.teams = teams
    return new


def fix_player_policy(tree: GameTree, player: int, policy: dict, drop_payoff: bool = True,
                      name: str | None = None) -> GameTree:
    """Turn ``player``'s decisions into chance nodes following ``policy``.

    Args:
        policy: ``infostate key -> probability vector`` for every infostate of
            ``player``.
        drop_payoff: remove the fixed player's payoff column and renumber the
            remaining players (``p > player`` becomes ``p - 1``). If ``False``
            the player keeps its index and simply never acts.
    """
    if not 0 <= player < tree.player_count:
        raise ConfigurationError(f"player {player} outside 0..{tree.player_count - 1}")
    if drop_payoff and tree.player_count == 1:
        raise ConfigurationError("cannot drop the only player")
    missing = [i.key for i in tree.player_infostates(player) if i.key not in policy]
    if missing:
        raise ConfigurationError(f"policy for player {player} misses infostate {missing[0]!r}")

    def on_terminal(node):
        if not drop_payoff:
            return TerminalNode(node.payoffs)
        return TerminalNode(tuple(x for i, x in enumerate(node.payoffs) if i != player))

    def on_decision(node):
        if node.player == player:
            probs = np.asarray(policy[node.infostate], dtype=float)
            if probs.shape != (len(node.actions),):
                raise ConfigurationError(
                    f"policy for {node.infostate!r} has {probs.size} entries, expected {len(node.actions)}")
            kids = [_map_tree(c, on_terminal, on_decision) for _, c in node.actions]
            return ChanceNode(tuple(zip((float(p) for p in probs), kids)),
                              f"fixed:{player}:{node.infostate}")
        if drop_payoff and node.player > player:
            return DecisionNode(node.player - 1, node.infostate,
                                tuple((a, _map_tree(c, on_terminal, on_decision)) for a, c in node.actions))
        return None

    count = tree.player_count - 1 if drop_payoff else tree.player_count
    try:
        return GameTree(_map_tree(tree.root, on_terminal, on_decision), count,
                        name or f"{tree.name}[fixed {player}]")
    except GameError as exc:
        raise ConfigurationError(f"fixed policy is not a distribution: {exc}") from exc
