"""Uniform step/evaluate drivers over every supported algorithm.

A driver advances one iteration per :meth:`step` and exposes the policy that
should be evaluated (the average policy for CFR-type methods, the last
iterate otherwise) plus the weight vector in use, if any.
"""

from __future__ import annotations

import numpy as np

from .baselines import MMDConfig, MMDState, RegretState, cfr_iteration
from .errors import ConfigurationError
from .game.traversal import flat_q_values
from .gmd import GMDConfig, GMDState, alpha_schedule, gmd_step
from .meta import CMDRun, MCConfig

ALGORITHMS = ("CMD", "GMD", "GMD-LD", "GMD-ISR", "MMD-KL", "MMD-EU", "CFR", "CFR+")


def canonical_algorithm(name: str) -> str:
    key = str(name).upper().replace("_", "-")
    key = {"CFRPLUS": "CFR+", "CFR-PLUS": "CFR+", "GMD-LINEAR": "GMD-LD"}.get(key, key)
    if key not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {name!r}; use one of {ALGORITHMS}")
    return key


class Driver:
    alpha = None

    def step(self) -> None:
        raise NotImplementedError

    @property
    def policy(self) -> np.ndarray:
        raise NotImplementedError


class CMDDriver(Driver):
    def __init__(self, tree, gmd_config, mc_config, objective, initial=None):
        self.run = CMDRun(tree, gmd_config, mc_config, objective, initial)

    def step(self):
        self.run.step()

    @property
    def policy(self):
        return self.run.policy

    @property
    def alpha(self):
        return self.run.alpha

    @property
    def evaluations(self):
        return self.run.evaluations


class GMDDriver(Driver):
    """GMD with a fixed-form weight schedule (history weights only; the magnet weight stays fixed)."""

    def __init__(self, tree, config: GMDConfig, schedule="uniform", K=None, initial=None):
        self.tree = tree
        self.config = config
        self.schedule = schedule
        self.K = K
        self.state = GMDState.for_tree(tree, config.M, config.family, initial)
        self.alpha = config.full_alpha()

    def _alpha(self, k):
        cfg = self.config
        if self.schedule == "uniform":
            return None
        hist = alpha_schedule(self.schedule, k, cfg.M, self.K, cfg.iota)
        return np.concatenate([[cfg.alpha_magnet], hist]) if cfg.magnet else hist

    def step(self):
        k = self.state.k
        explicit = self._alpha(k)
        q = flat_q_values(self.tree, self.state.current)
        gmd_step(self.state, q, self.config, alpha=explicit)
        if explicit is None:
            count = self.state.count
            hist = self.config.alpha if count >= self.config.M else np.full(self.config.M, 1.0 / count)
            self.alpha = np.concatenate([[self.config.alpha_magnet], hist]) if self.config.magnet else hist
        else:
            self.alpha = explicit

    @property
    def policy(self):
        return self.state.current


class MMDDriver(Driver):
    def __init__(self, tree, kind, config: MMDConfig, initial=None):
        self.state = MMDState(tree, kind, config, initial)

    def step(self):
        self.state.step()

    @property
    def policy(self):
        return self.state.policy


class CFRDriver(Driver):
    def __init__(self, tree, plus: bool):
        self.tree = tree
        self.plus = plus
        self.state = RegretState(tree)
        self._average = None

    def step(self):
        _, self._average = cfr_iteration(self.tree, self.state, self.plus)

    @property
    def policy(self):
        return self.state.average_policy() if self._average is None else self._average


def make_driver(tree, algorithm, gmd_config=None, mc_config=None, mmd_config=None, objective=None,
                K=None, initial=None) -> Driver:
    """Build the driver for ``algorithm`` (see :data:`ALGORITHMS`).

    ``objective`` maps ``(tree, flat policy)`` to the value the CMD
    meta-controller minimizes; it is required for CMD only.
    """
    algorithm = canonical_algorithm(algorithm)
    gmd_config = gmd_config or GMDConfig()
    if algorithm == "CMD":
        if objective is None:
            raise ConfigurationError("CMD needs an objective for its meta-controller")
        return CMDDriver(tree, gmd_config, mc_config or MCConfig(), objective, initial)
    if algorithm.startswith("GMD"):
        schedule = {"GMD": "uniform", "GMD-LD": "linear_decay", "GMD-ISR": "inverse_sqrt"}[algorithm]
        if schedule == "linear_decay" and not K:
            raise ConfigurationError("GMD-LD needs the iteration budget K")
        return GMDDriver(tree, gmd_config, schedule, K, initial)
    if algorithm.startswith("MMD"):
        return MMDDriver(tree, "kl" if algorithm == "MMD-KL" else "eu", mmd_config or MMDConfig(), initial)
    return CFRDriver(tree, plus=algorithm == "CFR+")
