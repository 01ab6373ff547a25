"""Kuhn poker (N players) and two-player Leduc poker."""

from __future__ import annotations

import itertools

from ..errors import ConfigurationError
from ..game.tree import GameTree, chance, decision, terminal

RANKS = "JQKA"


def kuhn_poker(players: int = 2) -> GameTree:
    """Kuhn poker with ``players + 1`` cards, ante 1 and a single bet of 1.

    Players act in seat order. Until someone bets, each player may pass
    (``p``) or bet (``b``); after the first bet every other player, in seat
    order starting after the bettor, either folds (``p``) or calls (``b``).
    Infostate keys are ``"<card>|<public history>"``.
    """
    n = int(players)
    if n < 2:
        raise ConfigurationError(f"kuhn_poker needs at least 2 players, got {players}")
    cards = list(range(n + 1))
    deals = list(itertools.permutations(cards, n))
    prob = 1.0 / len(deals)

    def card_name(c):
        return RANKS[c] if n + 1 <= len(RANKS) else str(c)

    def payoff(deal, history):
        if "b" not in history:
            active, contrib = list(range(n)), [1] * n
        else:
            first = history.index("b")
            active = [first]
            for k, act in enumerate(history[first + 1:]):
                if act == "b":
                    active.append((first + 1 + k) % n)
            contrib = [2 if i in active else 1 for i in range(n)]
        pot = sum(contrib)
        winner = max(active, key=lambda i: deal[i])
        return [(pot if i == winner else 0) - contrib[i] for i in range(n)]

    def node(deal, history):
        if "b" not in history:
            if len(history) == n:
                return terminal(payoff(deal, history))
            player = len(history)
        else:
            first = history.index("b")
            responses = len(history) - first - 1
            if responses == n - 1:
                return terminal(payoff(deal, history))
            player = (first + 1 + responses) % n
        key = f"{card_name(deal[player])}|{history}"
        return decision(player, key, [(a, node(deal, history + a)) for a in "pb"])

    root = chance([(prob, node(deal, "")) for deal in deals], "deal")
    return GameTree(root, n, f"kuhn_poker(players={n})")


def leduc_poker(players: int = 2) -> GameTree:
    """Two-player Leduc poker.

    Six cards (three ranks, two suits), ante 1, raise sizes 2 then 4, at most
    two raises per round. ``c`` checks/calls, ``r`` raises and ``f`` folds; a
    fold is only legal when facing a raise. A pair with the public card beats
    any unpaired hand, otherwise the higher rank wins and equal ranks split.
    Infostate keys carry the private card, the public card (second round)
    and the betting history of each round.
    """
    if int(players) != 2:
        raise ConfigurationError("leduc_poker is only implemented for 2 players")
    deck = list(range(6))
    rank = [c // 2 for c in deck]
    raise_size = (2, 4)

    def card_name(c):
        return f"{RANKS[rank[c]]}{'sh'[c % 2]}"

    def showdown(priv, public, contrib):
        def strength(c):
            return (1 if rank[c] == rank[public] else 0, rank[c])
        s0, s1 = strength(priv[0]), strength(priv[1])
        if s0 == s1:
            return [0.0, 0.0]
        win = 0 if s0 > s1 else 1
        out = [0.0, 0.0]
        out[win] = contrib[1 - win]
        out[1 - win] = -contrib[1 - win]
        return out

    def key(player, priv, public, hists):
        if public is None:
            return f"{card_name(priv[player])}||{hists[0]}"
        return f"{card_name(priv[player])}|{card_name(public)}|{hists[0]}|{hists[1]}"

    def betting(priv, public, rnd, hists, contrib):
        hist = hists[rnd]
        player = len(hist) % 2
        facing = contrib[1 - player] > contrib[player]
        raises = hist.count("r")
        actions = []
        # call / check
        new = list(contrib)
        new[player] = contrib[1 - player]
        round_over = len(hist) >= 1
        if round_over:
            actions.append(("c", after_round(priv, public, rnd, hists, "c", new)))
        else:
            actions.append(("c", betting(priv, public, rnd, _extend(hists, rnd, "c"), new)))
        if facing:
            out = [0.0, 0.0]
            out[player] = -contrib[player]
            out[1 - player] = contrib[player]
            actions.append(("f", terminal(out)))
        if raises < 2:
            new = list(contrib)
            new[player] = contrib[1 - player] + raise_size[rnd]
            actions.append(("r", betting(priv, public, rnd, _extend(hists, rnd, "r"), new)))
        return decision(player, key(player, priv, public, hists), actions)

    def after_round(priv, public, rnd, hists, act, contrib):
        hists = _extend(hists, rnd, act)
        if rnd == 1:
            return terminal(showdown(priv, public, contrib))
        rest = [c for c in deck if c not in priv]
        return chance([(1.0 / len(rest), betting(priv, c, 1, hists, contrib)) for c in rest],
                      "public")

    deals = list(itertools.permutations(deck, 2))
    root = chance([(1.0 / len(deals), betting(d, None, 0, ("", ""), [1, 1])) for d in deals], "deal")
    return GameTree(root, 2, "leduc_poker(players=2)")


def _extend(hists, rnd, act):
    out = list(hists)
    out[rnd] += act
    return tuple(out)
