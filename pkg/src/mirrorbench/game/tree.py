"""Immutable extensive-form game trees.

A :class:`GameTree` is built from nested :class:`ChanceNode`,
:class:`DecisionNode` and :class:`TerminalNode` objects. On construction the
tree is validated and compiled into flat numpy arrays (breadth-first node
order, one edge per child) so that reach, value and best-response passes in
:mod:`mirrorbench.game.traversal` run level by level without Python recursion.

Players are numbered ``0 .. player_count - 1``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from ..errors import GameError

CHANCE, DECISION, TERMINAL = 0, 1, 2
PROB_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class ChanceNode:
    outcomes: tuple  # ((probability, child), ...)
    label: str = ""

    kind = CHANCE

    def children(self):
        return tuple(child for _, child in self.outcomes)


@dataclass(frozen=True, eq=False)
class DecisionNode:
    player: int
    infostate: str
    actions: tuple  # ((action label, child), ...)

    kind = DECISION

    def children(self):
        return tuple(child for _, child in self.actions)


@dataclass(frozen=True, eq=False)
class TerminalNode:
    payoffs: tuple

    kind = TERMINAL

    def children(self):
        return ()


Node = Union[ChanceNode, DecisionNode, TerminalNode]


def chance(outcomes, label: str = "") -> ChanceNode:
    return ChanceNode(tuple((float(p), c) for p, c in outcomes), label)


def decision(player: int, infostate: str, actions) -> DecisionNode:
    return DecisionNode(int(player), str(infostate), tuple((str(a), c) for a, c in actions))


def terminal(payoffs: Sequence[float]) -> TerminalNode:
    return TerminalNode(tuple(float(x) for x in payoffs))


@dataclass
class InfoState:
    """One decision point: a (player, key) pair and the nodes it groups."""

    player: int
    key: str
    actions: tuple
    index: int
    offset: int
    own_depth: int
    nodes: list = field(default_factory=list, repr=False)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def slots(self) -> slice:
        return slice(self.offset, self.offset + len(self.actions))


class GameTree:
    """Validated, compiled extensive-form game.

    Args:
        root: root node.
        player_count: number of players; every terminal payoff vector must
            have this length.
        name: free-form name used in logs and CSV output.
        discount: kept for completeness of the model; finite-horizon trees
            only support ``1.0``.
    """

    def __init__(self, root: Node, player_count: int, name: str = "game", discount: float = 1.0):
        if int(player_count) < 1:
            raise GameError(f"player_count must be positive, got {player_count}")
        if discount != 1.0:
            raise GameError("only undiscounted (discount=1) finite-horizon trees are supported")
        self.root = root
        self.player_count = int(player_count)
        self.name = name
        self.discount = 1.0
        self.teams = None
        self._compile()

    # ------------------------------------------------------------------ build
    def _compile(self) -> None:
        n_players = self.player_count
        nodes: list = []
        depth: list = []
        edge_parent: list = []
        edge_prob: list = []
        edge_owner: list = []
        edge_action: list = []
        node_info: list = []
        infostates: dict = {}
        order: list = []
        own_seq: list = []  # per node: tuple of (infostate index, action) for every player

        queue = deque([(self.root, 0, tuple(() for _ in range(n_players)))])
        seen = set()
        while queue:
            node, d, seqs = queue.popleft()
            if id(node) in seen:
                raise GameError("node object reused: the game graph must be a tree")
            seen.add(id(node))
            idx = len(nodes)
            nodes.append(node)
            depth.append(d)
            if d > 10_000:
                raise GameError("tree too deep")
            info_idx = -1
            if isinstance(node, TerminalNode):
                if len(node.payoffs) != n_players:
                    raise GameError(
                        f"terminal payoff vector has length {len(node.payoffs)}, expected {n_players}")
                if not all(np.isfinite(node.payoffs)):
                    raise GameError("terminal payoffs must be finite")
            elif isinstance(node, ChanceNode):
                if not node.outcomes:
                    raise GameError(f"chance node {node.label!r} has no outcomes")
                probs = np.array([p for p, _ in node.outcomes], dtype=float)
                if np.any(probs < 0) or not np.all(np.isfinite(probs)):
                    raise GameError(f"chance node {node.label!r} has a negative probability")
                if abs(probs.sum() - 1.0) > PROB_ATOL:
                    raise GameError(
                        f"chance node {node.label!r} probabilities sum to {probs.sum():.15g}, not 1")
                for p, child in node.outcomes:
                    edge_parent.append(idx)
                    edge_prob.append(float(p))
                    edge_owner.append(-1)
                    edge_action.append(-1)
                    queue.append((child, d + 1, seqs))
            elif isinstance(node, DecisionNode):
                p = node.player
                if not 0 <= p < n_players:
                    raise GameError(f"decision node owner {p} outside 0..{n_players - 1}")
                if not node.actions:
                    raise GameError(f"decision node {node.infostate!r} has no actions")
                labels = tuple(a for a, _ in node.actions)
                if len(set(labels)) != len(labels):
                    raise GameError(f"duplicate action labels at infostate {node.infostate!r}")
                key = (p, node.infostate)
                info = infostates.get(key)
                if info is None:
                    info = InfoState(p, node.infostate, labels, len(order), 0, len(seqs[p]))
                    infostates[key] = info
                    order.append(info)
                    own_seq.append(seqs[p])
                else:
                    if info.actions != labels:
                        raise GameError(
                            f"perfect recall violated at infostate {node.infostate!r} of player {p}: "
                            f"action sets {info.actions} and {labels} differ")
                    if own_seq[info.index] != seqs[p]:
                        raise GameError(
                            f"perfect recall violated at infostate {node.infostate!r} of player {p}: "
                            "members have different own action histories")
                info.nodes.append(node)
                info_idx = info.index
                for a, (_, child) in enumerate(node.actions):
                    edge_parent.append(idx)
                    edge_prob.append(0.0)
                    edge_owner.append(p)
                    edge_action.append(a)
                    child_seqs = seqs[:p] + (seqs[p] + ((info.index, a),),) + seqs[p + 1:]
                    queue.append((child, d + 1, child_seqs))
            else:
                raise GameError(f"unknown node type {type(node).__name__}")
            node_info.append(info_idx)

        offset = 0
        for info in order:
            info.offset = offset
            offset += info.n_actions

        self.nodes = nodes
        self.infostates = order
        self.infostate_index = infostates
        self.n_nodes = len(nodes)
        self.n_slots = offset
        self.n_infostates = len(order)

        self.depth = np.asarray(depth, dtype=np.int64)
        self.node_kind = np.array([n.kind for n in nodes], dtype=np.int8)
        self.node_infostate = np.asarray(node_info, dtype=np.int64)
        self.payoffs = np.zeros((self.n_nodes, n_players))
        term = np.flatnonzero(self.node_kind == TERMINAL)
        if len(term):
            self.payoffs[term] = np.array([nodes[i].payoffs for i in term])
        self.terminal_index = term

        self.edge_parent = np.asarray(edge_parent, dtype=np.int64)
        self.edge_child = np.arange(1, len(edge_parent) + 1, dtype=np.int64)
        self.edge_prob = np.asarray(edge_prob, dtype=float)
        self.edge_owner = np.asarray(edge_owner, dtype=np.int64)
        self.edge_action = np.asarray(edge_action, dtype=np.int64)
        self.n_edges = len(edge_parent)

        dec = np.flatnonzero(self.edge_owner >= 0)
        self.decision_edges = dec
        self.decision_edge_owner = self.edge_owner[dec]
        parent_info = self.node_infostate[self.edge_parent[dec]]
        self.decision_edge_slot = np.array(
            [order[i].offset for i in parent_info], dtype=np.int64) + self.edge_action[dec]

        self.infostate_offset = np.array([i.offset for i in order], dtype=np.int64)
        self.infostate_size = np.array([i.n_actions for i in order], dtype=np.int64)
        self.infostate_player = np.array([i.player for i in order], dtype=np.int64)
        self.infostate_own_depth = np.array([i.own_depth for i in order], dtype=np.int64)
        self.slot_infostate = np.repeat(np.arange(self.n_infostates), self.infostate_size)
        # first member node of each infostate; perfect recall gives every member
        # the same own reach, so this node represents the whole infostate
        first = np.full(self.n_infostates, -1, dtype=np.int64)
        members = np.flatnonzero(self.node_infostate >= 0)
        first[self.node_infostate[members[::-1]]] = members[::-1]
        self.infostate_node = first
        self.slot_player = self.infostate_player[self.slot_infostate]

        # level structure: nodes and parent-grouped edges per depth
        self.max_depth = int(self.depth.max()) if self.n_nodes else 0
        levels = []
        for d in range(self.max_depth):
            e = np.flatnonzero(self.depth[self.edge_parent] == d)
            if len(e) == 0:
                levels.append(None)
                continue
            e0, e1 = int(e[0]), int(e[-1]) + 1
            parents = self.edge_parent[e0:e1]
            starts = np.flatnonzero(np.r_[True, parents[1:] != parents[:-1]])
            levels.append((e0, e1, starts, parents[starts]))
        self.levels = levels

    # ------------------------------------------------------------ inspection
    def __repr__(self) -> str:
        return (f"GameTree(name={self.name!r}, players={self.player_count}, "
                f"nodes={self.n_nodes}, decision_points={self.n_infostates})")

    def player_infostates(self, player: int) -> list:
        return [i for i in self.infostates if i.player == player]

    def infostate(self, player: int, key: str) -> InfoState:
        try:
            return self.infostate_index[(player, key)]
        except KeyError:
            raise KeyError(f"player {player} has no infostate {key!r}") from None

    def walk(self) -> Iterator[Node]:
        """Yield nodes in breadth-first order."""
        return iter(self.nodes)

    def is_constant_sum(self, atol: float = 1e-9):
        """Return the constant payoff sum if every terminal shares it, else ``None``."""
        sums = self.payoffs[self.terminal_index].sum(axis=1)
        if len(sums) and np.ptp(sums) <= atol:
            return float(sums[0])
        return None


def count_decision_points(tree: GameTree) -> dict:
    """Number of distinct (player, infostate key) pairs, per player and in total."""
    counts = {p: 0 for p in range(tree.player_count)}
    for info in tree.infostates:
        counts[info.player] += 1
    counts["total"] = tree.n_infostates
    return counts
