"""Tiny Hanabi and matrix games written as small trees."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from ..game.tree import GameTree, chance, decision, terminal

# Default payoff tensors, indexed (card of player 0, card of player 1,
# action of player 0, action of player 1). Preset a is the classic signalling
# matrix; b and c are illustrative placeholders. Optimal values are always
# obtained by exhaustive enumeration.
TINY_HANABI_PRESETS = {
    # classic three-action signalling matrix
    "a": dict(num_chance=2, num_actions=3, payoff=[
        10, 0, 0, 4, 8, 4, 10, 0, 0,
        0, 0, 10, 4, 8, 4, 0, 0, 10,
        0, 0, 10, 4, 8, 4, 0, 0, 0,
        10, 0, 0, 4, 8, 4, 10, 0, 0,
    ]),
    # player 1 must guess player 0's card; action 0 of player 0 is cheaper
    "b": dict(num_chance=2, num_actions=2, payoff=[
        3 * (a2 == c1) + (a1 == 0)
        for c1 in range(2) for c2 in range(2) for a1 in range(2) for a2 in range(2)
    ]),
    # player 1 must play the parity of both cards; signalling costs 1
    "c": dict(num_chance=2, num_actions=2, payoff=[
        4 * (a2 == (c1 ^ c2)) - (a1 == 1)
        for c1 in range(2) for c2 in range(2) for a1 in range(2) for a2 in range(2)
    ]),
}


def tiny_hanabi(num_chance: int = 2, num_actions: int = 3, payoff=None, name: str | None = None) -> GameTree:
    """Two-player common-payoff signalling game.

    Chance deals one of ``num_chance`` cards to each player; player 0 acts
    seeing only its card, then player 1 acts seeing its card and player 0's
    action. Both receive ``payoff[c0, c1, a0, a1]``.
    """
    c, k = int(num_chance), int(num_actions)
    if c < 1 or k < 1:
        raise ConfigurationError("num_chance and num_actions must be positive")
    if payoff is None:
        preset = next((p for p in TINY_HANABI_PRESETS.values()
                       if p["num_chance"] == c and p["num_actions"] == k), None)
        if preset is None:
            raise ConfigurationError(f"no default payoff for num_chance={c}, num_actions={k}")
        payoff = preset["payoff"]
    tensor = np.asarray(payoff, dtype=float)
    if tensor.size != c * c * k * k:
        raise ConfigurationError(
            f"payoff needs {c * c * k * k} entries for num_chance={c}, num_actions={k}, got {tensor.size}")
    tensor = tensor.reshape(c, c, k, k)
    if not np.all(np.isfinite(tensor)):
        raise ConfigurationError("payoff entries must be finite")

    def p1(c0, c1, a0):
        return decision(1, f"p1|card:{c1}|seen:{a0}",
                        [(str(a1), terminal([tensor[c0, c1, a0, a1]] * 2)) for a1 in range(k)])

    def p0(c0, c1):
        return decision(0, f"p0|card:{c0}", [(str(a0), p1(c0, c1, a0)) for a0 in range(k)])

    root = chance([(1.0 / c, chance([(1.0 / c, p0(c0, c1)) for c1 in range(c)], "deal1"))
                   for c0 in range(c)], "deal0")
    tree = GameTree(root, 2, name or f"tiny_hanabi(num_chance={c},num_actions={k})")
    tree.payoff_tensor = tensor
    return tree


def tiny_hanabi_preset(which: str) -> GameTree:
    try:
        preset = TINY_HANABI_PRESETS[which]
    except KeyError:
        raise ConfigurationError(f"unknown tiny hanabi preset {which!r}") from None
    return tiny_hanabi(**preset, name=f"tiny_hanabi_game_{which}")


def matrix_game(payoffs, name: str = "matrix_game") -> GameTree:
    """Two-player normal-form game as a depth-2 tree with hidden first move.

    ``payoffs[i][j]`` is the payoff vector when row ``i`` meets column ``j``.
    """
    arr = np.asarray(payoffs, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ConfigurationError("matrix game payoffs must have shape (rows, cols, 2)")
    rows, cols = arr.shape[:2]
    root = decision(0, "row", [
        (f"r{i}", decision(1, "col", [(f"c{j}", terminal(arr[i, j])) for j in range(cols)]))
        for i in range(rows)])
    return GameTree(root, 2, name)


def matching_pennies() -> GameTree:
    """Player 0 wins 1 on a match, player 1 wins 1 otherwise."""
    m = [[(1, -1), (-1, 1)], [(-1, 1), (1, -1)]]
    root = decision(0, "row", [
        (face, decision(1, "col", [(g, terminal(m[i][j])) for j, g in enumerate("HT")]))
        for i, face in enumerate("HT")])
    return GameTree(root, 2, "matching_pennies")
