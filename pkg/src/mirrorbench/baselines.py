"""Reference algorithms: magnetic mirror descent (KL and Euclidean) and CFR / CFR+.

The single-infostate functions (:func:`mmd_eu_step`, :func:`mmd_kl_step`,
:func:`magnet_update`) have segmented counterparts that update every
infostate of a game at once; :class:`MMDState` and :class:`RegretState` carry
the per-run data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .game.policy import uniform_flat
from .game.traversal import edge_weights, flat_q_values, reach_probabilities, node_values, _slot_q


@dataclass
class MMDConfig:
    xi: float = 1.0
    eta: float = 0.1
    eta_tilde: float = 0.05
    zeta: float = 1e-10

    def __post_init__(self):
        for name in ("xi", "eta", "zeta"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.eta_tilde <= 1:
            raise ConfigurationError(f"eta_tilde must lie in [0, 1], got {self.eta_tilde}")


# ------------------------------------------------------ segmented primitives
def _segments(n, offsets):
    if offsets is None:
        return np.array([0]), np.zeros(n, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    sizes = np.diff(np.append(offsets, n))
    return offsets, np.repeat(np.arange(len(offsets)), sizes)


def mmd_eu_update(Q, pi_k, rho, config: MMDConfig, offsets=None):
    """Euclidean MMD closed form with the shifted-mean dual and ``zeta``-guarded projection."""
    Q, pi_k, rho = (np.asarray(v, dtype=float) for v in (Q, pi_k, rho))
    offsets, seg = _segments(Q.size, offsets)
    sizes = np.bincount(seg)
    lam = np.add.reduceat(Q, offsets) / sizes
    inv_eta = 1.0 / config.eta
    raw = (config.xi * rho + inv_eta * pi_k + Q - lam[seg]) / (config.xi + inv_eta)
    pos = np.maximum(0.0, raw)
    return (pos + config.zeta) / (np.add.reduceat(pos, offsets)[seg] + config.zeta)


def mmd_kl_update(Q, pi_k, rho, config: MMDConfig, offsets=None):
    """KL MMD: ``pi ∝ exp((Q + xi ln rho + ln(pi_k)/eta) / (xi + 1/eta))``."""
    Q, pi_k, rho = (np.asarray(v, dtype=float) for v in (Q, pi_k, rho))
    offsets, seg = _segments(Q.size, offsets)
    inv_eta = 1.0 / config.eta
    logits = (Q + config.xi * np.log(rho) + inv_eta * np.log(pi_k)) / (config.xi + inv_eta)
    logits -= np.maximum.reduceat(logits, offsets)[seg]
    e = np.exp(logits)
    return e / np.add.reduceat(e, offsets)[seg]


def _check_simplex(name, v):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or np.any(v < 0) or abs(v.sum() - 1) > 1e-9:
        raise ConfigurationError(f"{name} must be a probability vector")
    return v


def mmd_eu_step(Q, pi_k, rho, config: MMDConfig | None = None) -> np.ndarray:
    config = config or MMDConfig()
    pi_k, rho = _check_simplex("pi_k", pi_k), _check_simplex("rho", rho)
    if np.shape(Q) != pi_k.shape or rho.shape != pi_k.shape:
        raise ConfigurationError("Q, pi_k and rho must have the same length")
    return mmd_eu_update(Q, pi_k, rho, config)


def mmd_kl_step(Q, pi_k, rho, config: MMDConfig | None = None) -> np.ndarray:
    config = config or MMDConfig()
    pi_k, rho = _check_simplex("pi_k", pi_k), _check_simplex("rho", rho)
    if np.any(pi_k <= 0) or np.any(rho <= 0):
        raise ConfigurationError("pi_k and rho must be strictly positive")
    if np.shape(Q) != pi_k.shape or rho.shape != pi_k.shape:
        raise ConfigurationError("Q, pi_k and rho must have the same length")
    return mmd_kl_update(Q, pi_k, rho, config)


def magnet_update(rho, pi_new, eta_tilde: float) -> np.ndarray:
    """Moving magnet: ``(1 - eta_tilde) rho + eta_tilde pi_new``."""
    return (1.0 - eta_tilde) * np.asarray(rho, dtype=float) + eta_tilde * np.asarray(pi_new, dtype=float)


class MMDState:
    """Current policy and magnet of an MMD run over a whole game."""

    def __init__(self, tree, kind: str = "kl", config: MMDConfig | None = None, initial=None, mask=None):
        if kind not in ("kl", "eu"):
            raise ConfigurationError(f"MMD kind must be 'kl' or 'eu', got {kind!r}")
        self.tree = tree
        self.kind = kind
        self.config = config or MMDConfig()
        self.policy = uniform_flat(tree) if initial is None else np.array(initial, dtype=float)
        self.magnet = self.policy.copy()
        # slots allowed to move; others stay fixed (used by the team best response)
        self.mask = None if mask is None else np.asarray(mask, dtype=bool)
        self.k = 1

    def step(self) -> np.ndarray:
        tree = self.tree
        q = flat_q_values(tree, self.policy)
        update = mmd_kl_update if self.kind == "kl" else mmd_eu_update
        new = update(q, self.policy, self.magnet, self.config, tree.infostate_offset)
        if self.mask is not None:
            new = np.where(self.mask, new, self.policy)
        self.magnet = magnet_update(self.magnet, new, self.config.eta_tilde)
        self.policy = new
        self.k += 1
        return new


# ------------------------------------------------------------------- CFR
class RegretState:
    """Cumulative regrets and average-policy weights for CFR and CFR+."""

    def __init__(self, tree):
        self.tree = tree
        self.regret = np.zeros(tree.n_slots)
        self.avg_weight = np.zeros(tree.n_slots)
        self.t = 0

    def current_policy(self) -> np.ndarray:
        tree = self.tree
        pos = np.maximum(self.regret, 0.0)
        total = np.add.reduceat(pos, tree.infostate_offset)[tree.slot_infostate] if tree.n_slots else pos
        return np.where(total > 0, pos / np.where(total > 0, total, 1.0), uniform_flat(tree))

    def average_policy(self) -> np.ndarray:
        tree = self.tree
        if not tree.n_slots:
            return np.zeros(0)
        total = np.add.reduceat(self.avg_weight, tree.infostate_offset)[tree.slot_infostate]
        return np.where(total > 0, self.avg_weight / np.where(total > 0, total, 1.0), uniform_flat(tree))


def _own_reach(tree, flat):
    _, own = reach_probabilities(tree, edge_weights(tree, flat))
    return own[tree.infostate_node, tree.infostate_player][tree.slot_infostate]


def _instant_regret(tree, flat, cf=None):
    w = edge_weights(tree, flat)
    if cf is None:
        cf, _ = reach_probabilities(tree, w)
    q = _slot_q(tree, cf, node_values(tree, w))
    v = np.add.reduceat(flat * q, tree.infostate_offset)[tree.slot_infostate]
    return q - v


def cfr_iteration(tree, state: RegretState, plus: bool = False):
    """One CFR (simultaneous, uniform averaging) or CFR+ (alternating,
    regret flooring, linear averaging) iteration.

    Returns ``(current, average)`` flat policies after the update.
    """
    if tree.n_slots == 0:
        state.t += 1
        return np.zeros(0), np.zeros(0)
    state.t += 1
    t = state.t
    if not plus:
        sigma = state.current_policy()
        state.avg_weight += _own_reach(tree, sigma) * sigma
        state.regret += _instant_regret(tree, sigma)
    else:
        for player in range(tree.player_count):
            mine = tree.slot_player == player
            if not mine.any():
                continue
            sigma = state.current_policy()
            state.avg_weight[mine] += t * (_own_reach(tree, sigma) * sigma)[mine]
            r = _instant_regret(tree, sigma)
            state.regret[mine] = np.maximum(state.regret[mine] + r[mine], 0.0)
    return state.current_policy(), state.average_policy()
