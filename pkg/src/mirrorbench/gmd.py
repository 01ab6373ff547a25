"""Generalized mirror descent (GMD).

One GMD step at an infostate solves

    max_pi  <Q, pi> - sum_tau alpha_tau * D_phi(pi, pi_{k-tau}) - alpha_m * D_phi(pi, rho)

over the probability simplex. Writing ``phi(pi) = sum_a psi(pi(a))`` the
optimality conditions collapse to a single scalar equation in the dual
variable ``lambda``::

    sum_a psi'^{-1}((A(a) - lambda) / B) = 1,
    A = Q + sum_tau alpha_tau psi'(pi_{k-tau}) + alpha_m psi'(rho),
    B = sum_tau alpha_tau + alpha_m.

The solver below handles every infostate of a game in one vectorized pass:
each segment keeps its own bracket and takes safeguarded Newton steps, falling
back to bisection whenever a Newton step leaves the bracket.

For families whose derivative stays finite at zero (``power`` and ``exp``)
the inverse is extended by ``0`` below ``psi'(0)``. That is the exact
solution of the nonnegativity-constrained problem; the other families never
reach the boundary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bregman import ConvexFamily, parse_family
from .errors import ConfigurationError, SolverError
from .game.policy import JointPolicy, uniform_flat
from .game.traversal import as_flat, flat_q_values

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
_INNER_TOL = 1e-12
_MAX_BISECTIONS = 200
SCHEDULES = ("uniform", "linear_decay", "inverse_sqrt")


# ---------------------------------------------------------------- evaluators
def _inv(family: ConvexFamily, x):
    """``psi'^{-1}`` extended by zero below ``psi'(0)`` where that is finite."""
    p0 = family.prime_at_zero
    if np.isfinite(p0):
        return np.where(x > p0, family.psi_prime_inv(np.maximum(x, p0)), 0.0)
    return family.psi_prime_inv(x)


def _inv_deriv(family: ConvexFamily, x):
    p0 = family.prime_at_zero
    if np.isfinite(p0):
        inside = x > p0
        return np.where(inside, family.psi_prime_inv_deriv(np.where(inside, x, p0 + 1.0)), 0.0)
    return family.psi_prime_inv_deriv(x)


# ------------------------------------------------------------------- config
@dataclass
class GMDConfig:
    """Settings of a GMD update.

    ``alpha`` holds the ``M`` history weights (most recent first); the magnet
    weight is separate. When ``alpha`` is omitted every history weight is
    ``1/M``.
    """

    family: object = "entropy"
    M: int = 1
    alpha: object = None
    magnet: bool = True
    alpha_magnet: float = 0.1
    epsilon: float = 1e-10
    iota: float = 1e-6
    newton_iters: int = 50
    newton_init: str = "max"
    warm_start: bool = True
    seed: int = 0
    schedule: str = "uniform"
    _rng: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.family = parse_family(self.family)
        self.M = int(self.M)
        if self.M < 1:
            raise ConfigurationError(f"M must be a positive integer, got {self.M}")
        if not 0 < self.iota < 1:
            raise ConfigurationError(f"iota must lie in (0, 1), got {self.iota}")
        if self.alpha is None:
            self.alpha = np.full(self.M, 1.0 / self.M)
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        if self.alpha.shape != (self.M,):
            raise ConfigurationError(f"alpha needs {self.M} entries, got {self.alpha.size}")
        if np.any(self.alpha < self.iota) or np.any(self.alpha > 1):
            raise ConfigurationError(f"alpha entries must lie in [iota, 1], got {self.alpha.tolist()}")
        if self.magnet and not self.iota <= self.alpha_magnet <= 1:
            raise ConfigurationError(f"alpha_magnet must lie in [iota, 1], got {self.alpha_magnet}")
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if int(self.newton_iters) < 1:
            raise ConfigurationError("newton_iters must be a positive integer")
        self.newton_iters = int(self.newton_iters)
        if self.newton_init not in ("max", "random"):
            raise ConfigurationError("newton_init must be 'max' or 'random'")
        if self.schedule not in SCHEDULES:
            raise ConfigurationError(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")

    @property
    def dim(self) -> int:
        """Length of the full weight vector: magnet first (if enabled), then history."""
        return self.M + int(self.magnet)

    def full_alpha(self) -> np.ndarray:
        if self.magnet:
            return np.concatenate([[self.alpha_magnet], self.alpha])
        return self.alpha.copy()

    def rng(self):
        if self._rng is None:
            self._rng = np.random.default_rng(self.seed)
        return self._rng


def split_alpha(alpha, magnet: bool):
    """Return ``(magnet weight or 0, history weights)`` from a full weight vector."""
    alpha = np.asarray(alpha, dtype=float)
    if magnet:
        return float(alpha[0]), alpha[1:]
    return 0.0, alpha


def alpha_schedule(kind: str, k: int, dim: int, K: int | None = None, iota: float = 1e-6) -> np.ndarray:
    """Heuristic weight vectors for fixed-schedule GMD.

    ``uniform`` keeps every weight at ``1/dim``; ``linear_decay`` shrinks that
    value linearly to ``iota`` at iteration ``K``; ``inverse_sqrt`` uses
    ``1/sqrt(k)``.
    """
    if kind == "uniform":
        value = 1.0 / dim
    elif kind == "linear_decay":
        if not K:
            raise ConfigurationError("linear_decay needs the total iteration count K")
        value = (1.0 / dim) * (1.0 - (k - 1) / K)
    elif kind == "inverse_sqrt":
        value = 1.0 / np.sqrt(k)
    else:
        raise ConfigurationError(f"unknown schedule {kind!r}")
    return np.full(dim, float(np.clip(value, iota, 1.0)))


# -------------------------------------------------------------------- state
class GMDState:
    """History buffers, magnet and warm-start duals for a set of infostates.

    The state is laid out as contiguous segments (one per infostate) of a
    flat vector, exactly like :class:`~mirrorbench.game.tree.GameTree` slots.
    A ring buffer keeps the last ``M`` policies together with their
    ``psi'`` images so that assembling ``A`` costs one weighted sum.
    """

    def __init__(self, offsets, n_slots, initial, M, family):
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.n_slots = int(n_slots)
        self.sizes = np.diff(np.append(self.offsets, self.n_slots))
        self.seg = np.repeat(np.arange(len(self.offsets)), self.sizes)
        self.M = int(M)
        self.family = parse_family(family)
        initial = np.asarray(initial, dtype=float)
        if initial.shape != (self.n_slots,):
            raise ConfigurationError(f"initial policy must have {self.n_slots} entries")
        if np.any(initial <= 0):
            raise ConfigurationError("initial policy must be strictly positive")
        self.buffer = np.zeros((self.M, self.n_slots))
        self.prime = np.zeros((self.M, self.n_slots))
        self.head = 0
        self.count = 0
        self.magnet = initial.copy()
        self.magnet_prime = self.family.psi_prime(self.magnet)
        self.lam = np.full(len(self.offsets), np.nan)
        self.k = 1
        self.push(initial)

    @classmethod
    def for_tree(cls, tree, M, family, initial=None) -> "GMDState":
        init = uniform_flat(tree) if initial is None else as_flat(tree, initial)
        return cls(tree.infostate_offset, tree.n_slots, init, M, family)

    @classmethod
    def single(cls, policy, M, family) -> "GMDState":
        policy = np.asarray(policy, dtype=float)
        return cls([0], policy.size, policy, M, family)

    @property
    def current(self) -> np.ndarray:
        return self.buffer[self.head]

    def history(self) -> list:
        """Stored policies, most recent first."""
        return [self.buffer[(self.head - t) % self.M] for t in range(self.count)]

    def _order(self):
        return (self.head - np.arange(self.count)) % self.M

    def push(self, policy) -> None:
        self.head = (self.head + 1) % self.M if self.count else 0
        self.buffer[self.head] = policy
        self.prime[self.head] = self.family.psi_prime(policy)
        self.count = min(self.count + 1, self.M)

    def copy(self) -> "GMDState":
        new = object.__new__(GMDState)
        new.__dict__.update(self.__dict__)
        for name in ("buffer", "prime", "magnet", "magnet_prime", "lam"):
            setattr(new, name, getattr(self, name).copy())
        return new


# ---------------------------------------------------------------- operations
def assemble_kkt(Q, history, alpha, family, magnet=None):
    """Return ``(A, B)`` for one infostate.

    ``history`` lists past policies most recent first and ``alpha`` the
    matching weights; ``magnet`` is an optional ``(policy, weight)`` pair.
    """
    family = parse_family(family)
    Q = np.asarray(Q, dtype=float)
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if len(history) == 0:
        raise ConfigurationError("history must hold at least one policy")
    if len(history) != len(alpha):
        raise ConfigurationError(f"{len(history)} history policies but {len(alpha)} weights")
    A = Q.copy()
    B = 0.0
    for a_t, pi in zip(alpha, history):
        pi = np.asarray(pi, dtype=float)
        if pi.shape != Q.shape:
            raise ConfigurationError("history policy and Q differ in length")
        A += a_t * family.psi_prime(_strictly_positive(pi, family))
        B += float(a_t)
    if magnet is not None:
        rho, weight = magnet
        A += weight * family.psi_prime(_strictly_positive(np.asarray(rho, dtype=float), family))
        B += float(weight)
    if not B > 0:
        raise ConfigurationError("the weights must sum to a positive B")
    return A, B


def _strictly_positive(pi, family):
    if np.any(pi <= 0):
        from .errors import DomainError

        raise DomainError(family, float(pi[pi <= 0][0]), "history policies must be strictly positive")
    return pi


def solve_lambda(A, B, family, offsets, seg=None, lam0=None, newton_iters=50,
                 tol=RESIDUAL_TOL, rng=None):
    """Dual variables for every segment of ``A``.

    Each segment's root lies in ``[max A - B psi'(1), max A - B psi'(1/n)]``:
    at the left end the largest action alone gets probability one, at the
    right end every action gets at most ``1/n``. Iterates never leave that
    bracket, which keeps every evaluation inside the family's domain.

    Args:
        B: scalar or one value per segment.
        lam0: optional starting points (warm start); ``nan`` or out-of-bracket
            entries fall back to the right end of the bracket.
        rng: when given, starting points are drawn uniformly in the bracket.

    Raises:
        SolverError: if some segment's residual exceeds ``tol`` after
            ``newton_iters`` safeguarded Newton steps plus bisection.
    """
    family = parse_family(family)
    A = np.asarray(A, dtype=float)
    offsets = np.asarray(offsets, dtype=np.int64)
    n_seg = len(offsets)
    sizes = np.diff(np.append(offsets, A.size))
    if seg is None:
        seg = np.repeat(np.arange(n_seg), sizes)
    Bs = np.broadcast_to(np.asarray(B, dtype=float), (n_seg,)).astype(float)
    if not np.all(np.isfinite(A)) or not np.all(Bs > 0):
        raise SolverError("non-finite A or non-positive B passed to the dual solver",
                          {"A": A.tolist(), "B": Bs.tolist()})
    a_max = np.maximum.reduceat(A, offsets)
    lo = a_max - Bs * family.psi_prime(1.0)
    hi = a_max - Bs * family.psi_prime(1.0 / sizes)
    if rng is not None:
        lam = lo + rng.random(n_seg) * (hi - lo)
    elif lam0 is None:
        lam = hi.copy()
    else:
        lam0 = np.asarray(lam0, dtype=float)
        lam = np.where(np.isfinite(lam0) & (lam0 >= lo) & (lam0 <= hi), lam0, hi)
    b_slot = Bs[seg]
    width_tol = 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(a_max))
    active = np.ones(n_seg, dtype=bool)
    for it in range(newton_iters + _MAX_BISECTIONS):
        x = (A - lam[seg]) / b_slot
        g = np.add.reduceat(_inv(family, x), offsets) - 1.0
        lo = np.where(g > 0, lam, lo)
        hi = np.where(g < 0, lam, hi)
        dg = -np.add.reduceat(_inv_deriv(family, x), offsets) / Bs
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = g / dg
        # converged: tiny residual, collapsed bracket, or a sub-ulp Newton correction
        active = (np.abs(g) > _INNER_TOL) & (hi - lo > width_tol) & ~(np.abs(delta) <= width_tol)
        if not active.any():
            break
        step = lam - delta
        ok = (it < newton_iters) & np.isfinite(step) & (dg < -1e-14) & (step >= lo) & (step <= hi)
        proposal = np.where(ok, step, 0.5 * (lo + hi))
        lam = np.where(active, proposal, lam)
    x = (A - lam[seg]) / b_slot
    residual = np.abs(np.add.reduceat(_inv(family, x), offsets) - 1.0)
    if np.any(residual > tol):
        worst = int(np.argmax(residual))
        raise SolverError(
            f"dual solve did not converge: residual {residual[worst]:.3e} at segment {worst}",
            {"segment": worst, "residual": float(residual[worst]), "lambda": float(lam[worst]),
             "bracket": (float(lo[worst]), float(hi[worst])), "family": family.spec()})
    return lam


def newton_lambda(A, B, family, C=50, tol=RESIDUAL_TOL, lam0=None, rng=None) -> float:
    """Solve ``sum_a psi'^{-1}((A(a) - lambda)/B) = 1`` for one infostate."""
    A = np.asarray(A, dtype=float).reshape(-1)
    if A.size == 0:
        raise ConfigurationError("A must contain at least one action")
    start = None if lam0 is None else np.array([lam0], dtype=float)
    return float(solve_lambda(A, B, family, [0], lam0=start, newton_iters=C, tol=tol, rng=rng)[0])


def raw_policy(A, B, lam, family) -> np.ndarray:
    """``psi'^{-1}((A - lambda)/B)`` elementwise (zero below ``psi'(0)`` for power/exp)."""
    family = parse_family(family)
    return np.asarray(_inv(family, (np.asarray(A, dtype=float) - lam) / B), dtype=float)


def project(pi_raw, epsilon: float) -> np.ndarray:
    """Floor every entry at ``epsilon`` and renormalize."""
    floored = np.maximum(epsilon, np.asarray(pi_raw, dtype=float))
    return floored / floored.sum()


def project_segments(pi_raw, epsilon, offsets, seg) -> np.ndarray:
    floored = np.maximum(epsilon, pi_raw)
    return floored / np.add.reduceat(floored, offsets)[seg]


def _weights(state: GMDState, config: GMDConfig, alpha):
    """History and magnet weights actually applied at this step."""
    if alpha is None:
        w_m = config.alpha_magnet if config.magnet else 0.0
        w_h = config.alpha[:state.count]
        if state.count < config.M:
            w_h = np.full(state.count, 1.0 / state.count)
    else:
        w_m, w_h = split_alpha(alpha, config.magnet)
        if w_h.size < state.count:
            raise ConfigurationError(f"alpha covers {w_h.size} history entries, state holds {state.count}")
        w_h = w_h[:state.count]
    return float(w_m), np.asarray(w_h, dtype=float)


def gmd_step(state: GMDState, Q, config: GMDConfig, alpha=None, commit: bool = True) -> np.ndarray:
    """One GMD update of every segment in ``state``.

    ``alpha`` optionally overrides the configured weights (full vector, magnet
    first when enabled). With ``commit=False`` the state is left untouched,
    which is how candidate weight vectors are evaluated without cloning.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (state.n_slots,):
        raise ConfigurationError(f"Q must have {state.n_slots} entries, got {Q.shape}")
    family = config.family
    if family != state.family:
        raise ConfigurationError("state and config use different convex families")
    w_m, w_h = _weights(state, config, alpha)
    A = Q + w_h @ state.prime[state._order()]
    B = float(w_h.sum())
    if config.magnet:
        A = A + w_m * state.magnet_prime
        B += w_m
    rng = config.rng() if config.newton_init == "random" else None
    lam0 = state.lam if config.warm_start else None
    lam = solve_lambda(A, B, family, state.offsets, state.seg, lam0=lam0,
                       newton_iters=config.newton_iters, rng=rng)
    pi = project_segments(_inv(family, (A - lam[state.seg]) / B), config.epsilon,
                          state.offsets, state.seg)
    if commit:
        state.push(pi)
        state.lam = lam
        state.k += 1
    return pi


def gmd_update(tree, joint, state: GMDState, config: GMDConfig, alpha=None, commit: bool = True):
    """Simultaneous GMD step at every infostate of ``tree``.

    Q-values of all players are computed from the same pre-update ``joint``.
    The result has the type of ``joint`` (flat vector or :class:`JointPolicy`).
    """
    flat = as_flat(tree, joint)
    q = flat_q_values(tree, flat)
    new = gmd_step(state, q, config, alpha=alpha, commit=commit)
    return JointPolicy.from_flat(tree, new) if isinstance(joint, JointPolicy) else new
