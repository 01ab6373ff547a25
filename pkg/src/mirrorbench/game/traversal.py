"""Expected values, counterfactual Q-values and exact best responses.

Every routine works level by level on the arrays compiled by
:class:`~mirrorbench.game.tree.GameTree`; the public functions at the bottom
accept a :class:`~mirrorbench.game.policy.JointPolicy` (or an already
flattened policy vector) and return plain numpy / dict results.

Q-values use counterfactual weighting: for an infostate of player ``i`` the
contribution of each member node is weighted by the reach probability of
chance and all *other* players, never by ``i``'s own probabilities.
"""

from __future__ import annotations

import numpy as np

from .policy import JointPolicy


def as_flat(tree, joint) -> np.ndarray:
    if isinstance(joint, JointPolicy):
        return joint.to_flat(tree)
    flat = np.asarray(joint, dtype=float)
    if flat.shape != (tree.n_slots,):
        raise ValueError(f"expected a JointPolicy or a flat vector of {tree.n_slots} entries")
    return flat


def edge_weights(tree, flat) -> np.ndarray:
    w = tree.edge_prob.copy()
    w[tree.decision_edges] = flat[tree.decision_edge_slot]
    return w


def node_values(tree, w) -> np.ndarray:
    """Bottom-up expected payoff of every node, shape ``(n_nodes, players)``.

    ``w`` holds one weight per edge, either shared by all payoff columns
    (shape ``(n_edges,)``) or column-specific (shape ``(n_edges, players)``).
    """
    values = tree.payoffs.copy()
    shared = w.ndim == 1
    for level in reversed(tree.levels):
        if level is None:
            continue
        e0, e1, starts, parents = level
        child = values[e0 + 1:e1 + 1]
        contrib = child * (w[e0:e1, None] if shared else w[e0:e1])
        values[parents] = np.add.reduceat(contrib, starts, axis=0)
    return values


def reach_probabilities(tree, w):
    """Top-down counterfactual and own reach, each shape ``(n_nodes, players)``.

    Column ``i`` of the counterfactual reach multiplies chance and every
    player except ``i``; column ``i`` of the own reach multiplies only ``i``'s
    action probabilities. Their product is the full reach.
    """
    n = tree.player_count
    cf_factor = np.repeat(w[:, None], n, axis=1)
    own_factor = np.ones((tree.n_edges, n))
    dec, owner = tree.decision_edges, tree.decision_edge_owner
    cf_factor[dec, owner] = 1.0
    own_factor[dec, owner] = w[dec]
    cf = np.ones((tree.n_nodes, n))
    own = np.ones((tree.n_nodes, n))
    for level in tree.levels:
        if level is None:
            continue
        e0, e1, _, _ = level
        parent = tree.edge_parent[e0:e1]
        cf[e0 + 1:e1 + 1] = cf[parent] * cf_factor[e0:e1]
        own[e0 + 1:e1 + 1] = own[parent] * own_factor[e0:e1]
    return cf, own


def counterfactual_reach(tree, w) -> np.ndarray:
    return reach_probabilities(tree, w)[0]


def _slot_q(tree, cf, values) -> np.ndarray:
    dec, owner = tree.decision_edges, tree.decision_edge_owner
    parent = tree.edge_parent[dec]
    child = tree.edge_child[dec]
    weights = cf[parent, owner] * values[child, owner]
    return np.bincount(tree.decision_edge_slot, weights=weights, minlength=tree.n_slots)


def flat_q_values(tree, flat, cf=None) -> np.ndarray:
    """Counterfactual Q-value of every slot for the slot's owner."""
    w = edge_weights(tree, flat)
    if cf is None:
        cf = counterfactual_reach(tree, w)
    return _slot_q(tree, cf, node_values(tree, w))


def flat_expected_values(tree, flat) -> np.ndarray:
    return node_values(tree, edge_weights(tree, flat))[0].copy()


def segment_argmax(tree, values) -> np.ndarray:
    """Index (within each infostate) of the first maximal entry."""
    offsets, seg = tree.infostate_offset, tree.slot_infostate
    best = np.maximum.reduceat(values, offsets)
    local = np.arange(tree.n_slots) - offsets[seg]
    cand = np.where(values >= best[seg], local, np.iinfo(np.int64).max)
    return np.minimum.reduceat(cand, offsets)


def flat_best_response(tree, flat, cf=None):
    """Deterministic best response of every player against ``flat``.

    Returns ``(br_flat, br_values, values)`` where ``br_flat`` carries, in
    each player's own slots, that player's best response; ``br_values[i]`` is
    ``V_i(BR_i x pi_-i)`` and ``values[i]`` is ``V_i(pi)``.

    Infostates are resolved in decreasing own-depth order (perfect recall makes
    the number of the owner's earlier actions well defined), so each decision
    sees already-optimised continuation values.
    """
    n = tree.player_count
    w = edge_weights(tree, flat)
    if cf is None:
        cf = counterfactual_reach(tree, w)
    values = node_values(tree, w)[0].copy()
    if tree.n_infostates == 0:
        return flat.copy(), values.copy(), values
    W = np.repeat(w[:, None], n, axis=1)
    dec, owner = tree.decision_edges, tree.decision_edge_owner
    slot_of_edge = tree.decision_edge_slot
    br = flat.copy()
    own_depth = tree.infostate_own_depth
    seg = tree.slot_infostate
    slot_depth = own_depth[seg]
    local = np.arange(tree.n_slots) - tree.infostate_offset[seg]
    edge_depth = slot_depth[slot_of_edge]
    for d in range(int(own_depth.max()), -1, -1):
        V = node_values(tree, W)
        choice = segment_argmax(tree, _slot_q(tree, cf, V))
        at_d = slot_depth == d
        br[at_d] = (local[at_d] == choice[seg[at_d]]).astype(float)
        sel = edge_depth == d
        W[dec[sel], owner[sel]] = br[slot_of_edge[sel]]
    br_values = node_values(tree, W)[0]
    br_values = np.array([br_values[i] for i in range(n)])
    return br, br_values, values


# ---------------------------------------------------------------- public API
def expected_values(tree, joint) -> np.ndarray:
    """``V_i(root, joint)`` for every player."""
    return flat_expected_values(tree, as_flat(tree, joint))


def q_values(tree, joint, player: int) -> dict:
    """Counterfactual Q-vectors for every infostate of ``player``."""
    q = flat_q_values(tree, as_flat(tree, joint))
    return {info.key: q[info.slots].copy() for info in tree.infostates if info.player == player}


def best_response(tree, joint, player: int):
    """Exact deterministic best response of ``player``.

    Returns:
        ``(policy, value)``: ``policy`` maps each of ``player``'s infostate keys
        to a one-hot vector, ``value`` is the best-response value.
    """
    if not 0 <= player < tree.player_count:
        raise ValueError(f"player {player} outside 0..{tree.player_count - 1}")
    br, br_values, _ = flat_best_response(tree, as_flat(tree, joint))
    policy = {info.key: br[info.slots].copy() for info in tree.infostates if info.player == player}
    return policy, float(br_values[player])
