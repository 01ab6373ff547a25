"""Imperfect-information Goofspiel, sequentialized.

Every player holds cards ``1..cards``; each turn a prize card is revealed and
all players bid one card simultaneously. The simultaneous bids are encoded by
letting players bid in seat order while hiding earlier bids: a player's
infostate only records the prize cards seen, its own bids and who won each
turn (``-`` for a tie, in which case the prize is discarded). When every player
has a single card left the last turn is played automatically.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import ConfigurationError
from ..game.tree import GameTree, chance, decision, terminal

POINT_ORDERS = ("descending", "ascending", "random")
RETURNS = ("win_loss", "point_difference", "total_points")


def _returns(points, kind):
    points = np.asarray(points, dtype=float)
    n = len(points)
    if kind == "total_points":
        return points.tolist()
    if kind == "point_difference":
        return (points - points.mean()).tolist()
    best = points.max()
    winners = np.flatnonzero(points == best)
    if len(winners) == n:
        return [0.0] * n
    out = np.full(n, -1.0 / (n - len(winners)))
    out[winners] = 1.0 / len(winners)
    return out.tolist()


def goofspiel(players: int = 2, cards: int = 3, point_order: str = "descending",
              returns: str = "win_loss") -> GameTree:
    n, m = int(players), int(cards)
    if n < 2:
        raise ConfigurationError("goofspiel needs at least 2 players")
    if m < 1:
        raise ConfigurationError("goofspiel needs at least one card")
    if point_order not in POINT_ORDERS:
        raise ConfigurationError(f"point_order must be one of {POINT_ORDERS}, got {point_order!r}")
    if returns not in RETURNS:
        raise ConfigurationError(f"returns must be one of {RETURNS}, got {returns!r}")

    def resolve(bids, prize, points):
        top = max(bids)
        who = [i for i, b in enumerate(bids) if b == top]
        points = list(points)
        if len(who) == 1:
            points[who[0]] += prize
            return who[0], points
        return -1, points

    def info_key(i, prizes, own_bids, winners):
        seen = ",".join(map(str, prizes))
        mine = ",".join(map(str, own_bids))
        won = ",".join("-" if w < 0 else str(w) for w in winners)
        return f"p{i}|prizes:{seen}|bids:{mine}|won:{won}"

    def turn(hands, prizes_left, prizes, bids_hist, winners, points):
        if len(hands[0]) == 1:
            # forced last turn
            bids = [h[0] for h in hands]
            _, points = resolve(bids, prizes_left[0], points)
            return terminal(_returns(points, returns))
        if point_order == "random" and len(prizes_left) > 1:
            return chance([(1.0 / len(prizes_left),
                            bid(hands, [p for p in prizes_left if p != prize], prizes + [prize],
                                bids_hist, winners, points, prize, []))
                           for prize in prizes_left], "prize")
        prize = prizes_left[0]
        return bid(hands, prizes_left[1:], prizes + [prize], bids_hist, winners, points, prize, [])

    def bid(hands, prizes_left, prizes, bids_hist, winners, points, prize, current):
        i = len(current)
        if i == n:
            who, pts = resolve(current, prize, points)
            new_hands = [[c for c in h if c != b] for h, b in zip(hands, current)]
            new_hist = [bh + [b] for bh, b in zip(bids_hist, current)]
            return turn(new_hands, prizes_left, prizes, new_hist, winners + [who], pts)
        key = info_key(i, prizes, bids_hist[i], winners)
        return decision(i, key, [(str(c), bid(hands, prizes_left, prizes, bids_hist, winners, points,
                                              prize, current + [c])) for c in hands[i]])

    deck = list(range(1, m + 1))
    order = deck[::-1] if point_order == "descending" else deck
    hands = [list(deck) for _ in range(n)]
    root = turn(hands, order, [], [[] for _ in range(n)], [], [0] * n)
    name = f"goofspiel(players={n},cards={m},point_order={point_order},returns={returns})"
    return GameTree(root, n, name)


def decision_point_grid(players=(2, 3), cards=(2, 3, 4), orders=POINT_ORDERS):
    """Decision-point counts over a small parameter grid, used to pin configurations."""
    out = {}
    for n, m, o in itertools.product(players, cards, orders):
        tree = goofspiel(n, m, o)
        out[(n, m, o)] = tree.n_infostates
    return out
