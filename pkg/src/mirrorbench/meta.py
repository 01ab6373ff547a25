"""Zero-order meta-controllers for the GMD weight vector and the CMD loop.

Five controllers share one interface, :func:`mc_update`:

* ``DRS``: paired perturbations ``alpha +/- mu u``, step ``-sum sgn(delta_j) u_j``
* ``RS``: same pairs, step ``-sum delta_j u_j``
* ``GLD``: one-sided candidates ``alpha + u_j`` on random radii, keep the best
* ``GLDS``: one-sided candidates compared to the current policy, step ``-sum delta_j u_j``
* ``DGLDS``: as GLDS with ``sgn(delta_j)``

For DRS and RS the aggregated step is multiplied by ``MCConfig.scale``
before clipping (the GLD family already moves by radii in ``[r_low, r_high]``).
By default the scale is ``mu``; ``step_scale=1.0`` applies the raw step, which on
Kuhn poker makes the weights jump between the clip bounds.

All random directions are drawn before any evaluation, so the evaluation order
cannot influence the draws.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, MirrorBenchError
from .game.traversal import flat_q_values
from .gmd import GMDConfig, GMDState, gmd_step
from .records import IterationRecord

log = logging.getLogger(__name__)

KINDS = ("DRS", "RS", "GLD", "GLDS", "DGLDS")


@dataclass
class MCConfig:
    kind: str = "DRS"
    D: int = 5
    kappa: int = 10
    mu: float = 0.05
    r_low: float = 0.01
    r_high: float = 0.05
    iota: float = 1e-6
    seed: int = 0
    # multiplier on the aggregated step; None means "use mu", 1.0 is the raw step
    step_scale: float | None = None

    def __post_init__(self):
        self.kind = str(self.kind).upper()
        if self.kind not in KINDS:
            raise ConfigurationError(f"meta-controller kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.D) < 1 or int(self.kappa) < 1:
            raise ConfigurationError("D and kappa must be positive integers")
        self.D, self.kappa = int(self.D), int(self.kappa)
        if not self.mu > 0:
            raise ConfigurationError("mu must be positive")
        if not 0 < self.r_low <= self.r_high:
            raise ConfigurationError("need 0 < r_low <= r_high")
        if not 0 < self.iota < 1:
            raise ConfigurationError("iota must lie in (0, 1)")
        if self.step_scale is not None and not self.step_scale > 0:
            raise ConfigurationError("step_scale must be positive")

    @property
    def scale(self) -> float:
        return self.mu if self.step_scale is None else float(self.step_scale)


def sgn(z) -> int:
    return 1 if z > 0 else (-1 if z < 0 else 0)


def clip_unit(z, iota: float):
    """Clip every entry into ``[iota, 1]``."""
    out = np.clip(z, iota, 1.0)
    return float(out) if np.ndim(z) == 0 else out


def sample_directions(config: MCConfig, dim: int, rng) -> np.ndarray:
    """Perturbation directions, shape ``(D, dim)``."""
    if config.kind in ("DRS", "RS"):
        return rng.standard_normal((config.D, dim))
    v = rng.standard_normal((config.D, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = rng.uniform(config.r_low, config.r_high, size=(config.D, 1))
    return r * v


def mc_update(kind, alpha, evaluate, config: MCConfig, rng, current=None):
    """One meta-controller update of ``alpha``.

    Args:
        evaluate: maps a candidate weight vector to the measure (lower is
            better) of the joint policy GMD would produce with it.
        current: measure of the current policy, needed by GLDS/DGLDS. A
            float, a zero-argument callable, or ``None`` to call
            ``evaluate(None)``.

    Returns:
        ``(new alpha, number of evaluations)``. If an evaluation raises, the
        update is abandoned and ``alpha`` is returned unchanged.
    """
    kind = str(kind).upper()
    if kind not in KINDS:
        raise ConfigurationError(f"unknown meta-controller {kind!r}")
    alpha = np.asarray(alpha, dtype=float)
    iota = config.iota
    u = sample_directions(MCConfig(kind, config.D, config.kappa, config.mu, config.r_low,
                                   config.r_high, iota), alpha.size, rng)
    used = 0
    try:
        if kind in ("DRS", "RS"):
            delta = np.empty(config.D)
            for j in range(config.D):
                plus = evaluate(clip_unit(alpha + config.mu * u[j], iota))
                minus = evaluate(clip_unit(alpha - config.mu * u[j], iota))
                used += 2
                delta[j] = plus - minus
            coef = np.array([sgn(d) for d in delta], dtype=float) if kind == "DRS" else delta
            step = -config.scale * (coef @ u)
        else:
            values = np.empty(config.D)
            for j in range(config.D):
                values[j] = evaluate(clip_unit(alpha + u[j], iota))
                used += 1
            if kind == "GLD":
                step = u[int(np.argmin(values))]
            else:
                if current is None:
                    base = evaluate(None)
                elif callable(current):
                    base = current()
                else:
                    base = float(current)
                used += 1
                delta = values - base
                coef = np.array([sgn(d) for d in delta], dtype=float) if kind == "DGLDS" else delta
                step = -(coef @ u)
    except (MirrorBenchError, ArithmeticError, ValueError) as exc:
        log.warning("meta-controller evaluation failed (%s); keeping alpha", exc)
        return alpha.copy(), used
    if not np.all(np.isfinite(step)):
        log.warning("meta-controller produced a non-finite step; keeping alpha")
        return alpha.copy(), used
    return clip_unit(alpha + step, iota), used


def warmup_alpha(k: int, dim: int) -> np.ndarray:
    """Weights used while fewer than ``M`` policies are stored: ``1/k`` everywhere."""
    return np.full(dim, 1.0 / k)


class CMDRun:
    """State of a configurable mirror descent run on one game.

    Args:
        measure: ``(tree, flat policy) -> float`` to minimize.
    """

    def __init__(self, tree, gmd_config: GMDConfig, mc_config: MCConfig, measure, initial=None,
                 measure_name: str = "measure"):
        self.tree = tree
        self.gmd_config = gmd_config
        self.mc_config = mc_config
        self.measure = measure
        self.measure_name = measure_name
        self.state = GMDState.for_tree(tree, gmd_config.M, gmd_config.family, initial)
        self.alpha = gmd_config.full_alpha()
        self.rng = np.random.default_rng(mc_config.seed)
        self.k = 1
        self.evaluations = 0

    @property
    def policy(self) -> np.ndarray:
        return self.state.current

    def candidate(self, q, alpha) -> np.ndarray:
        """Joint policy GMD would produce from the current state with ``alpha`` (no side effects)."""
        return gmd_step(self.state, q, self.gmd_config, alpha=alpha, commit=False)

    def step(self) -> np.ndarray:
        tree, cfg, mc = self.tree, self.gmd_config, self.mc_config
        k = self.k
        flat = self.state.current
        q = flat_q_values(tree, flat)
        if k <= cfg.M:
            self.alpha = warmup_alpha(k, cfg.dim)
        elif k % mc.kappa == 0:

            def evaluate(a):
                if a is None:
                    return self.measure(tree, flat)
                return self.measure(tree, self.candidate(q, a))

            self.alpha, used = mc_update(mc.kind, self.alpha, evaluate, mc, self.rng)
            self.evaluations += used
        new = gmd_step(self.state, q, cfg, alpha=self.alpha)
        self.k += 1
        return new


def cmd_iteration(run: CMDRun, evaluate_record: bool = True):
    """Advance ``run`` by one CMD iteration.

    Returns ``(new flat joint policy, IterationRecord or None)``; the record
    carries the iteration index that produced the new policy and its measure.
    """
    t0 = time.perf_counter()
    k = run.k
    new = run.step()
    if not evaluate_record:
        return new, None
    value = float(run.measure(run.tree, new))
    return new, IterationRecord(k, run.measure_name, value, tuple(float(a) for a in run.alpha),
                                time.perf_counter() - t0)
