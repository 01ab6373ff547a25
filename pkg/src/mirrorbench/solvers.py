"""Estimator-style front end over the drivers in :mod:`mirrorbench.algorithms`.

Each solver follows the scikit-learn conventions: constructor arguments are
stored untouched, ``fit`` takes the game in place of a data matrix and
learned state gets a trailing underscore::

    >>> solver = CFRSolver(n_iter=200, plus=True).fit("kuhn_poker")
    >>> solver.score() > -0.01
    True
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .algorithms import make_driver
from .baselines import MMDConfig
from .errors import ConfigurationError
from .game.policy import JointPolicy, check_flat_policy
from .game.traversal import as_flat
from .game.tree import GameTree
from .games.registry import GameSpec, load_game
from .gmd import GMDConfig
from .measures import Measure
from .meta import MCConfig
from .records import IterationRecord


def check_game(game) -> GameTree:
    """Return a compiled game from a tree, a spec string/mapping or a game-file path."""
    if game is None:
        raise ConfigurationError("a game is required")
    if isinstance(game, GameTree):
        return game
    if isinstance(game, (str, dict, GameSpec)) or hasattr(game, "__fspath__"):
        return load_game(game)
    raise ConfigurationError(f"cannot interpret {type(game).__name__} as a game")


def check_policy(game, policy, floor: float = 0.0) -> np.ndarray:
    """Validate ``policy`` against ``game`` and return its flat vector."""
    tree = check_game(game)
    if isinstance(policy, dict):
        policy = JointPolicy.from_dict(policy)
    try:
        flat = as_flat(tree, policy)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    check_flat_policy(tree, flat, floor=floor)
    return flat


class _Solver(BaseEstimator):
    _algorithm = None

    def _make_driver(self, tree, measure):
        raise NotImplementedError

    def _default_measure(self, tree):
        if self.measure is not None:
            return self.measure
        if getattr(tree, "category", None) in ("single-agent", "cooperative"):
            return "optgap"
        return "nashconv"

    # -------------------------------------------------------------- fitting
    def fit(self, X, y=None):
        """Run ``n_iter`` iterations from scratch on game ``X``."""
        tree = check_game(X)
        if int(self.n_iter) < 0:
            raise ConfigurationError("n_iter must be nonnegative")
        self.game_ = tree
        self.measure_ = Measure(self._default_measure(tree)).resolve(tree)
        self.driver_ = self._make_driver(tree, self.measure_)
        self.history_ = []
        self.n_iter_ = 0
        self._advance(int(self.n_iter))
        return self

    def partial_fit(self, X=None, y=None, n_steps: int = 1):
        """Continue for ``n_steps`` iterations (starting a fresh run when unfitted)."""
        if not hasattr(self, "driver_"):
            tree = check_game(X)
            self.game_ = tree
            self.measure_ = Measure(self._default_measure(tree)).resolve(tree)
            self.driver_ = self._make_driver(tree, self.measure_)
            self.history_ = []
            self.n_iter_ = 0
        elif X is not None and X is not self.game_ and check_game(X).n_slots != self.game_.n_slots:
            raise ConfigurationError("partial_fit was given a different game; call fit instead")
        self._advance(int(n_steps))
        return self

    def _advance(self, steps):
        every = max(1, int(self.eval_every))
        for _ in range(steps):
            self.driver_.step()
            self.n_iter_ += 1
            if self.n_iter_ % every == 0:
                self._record()
        if steps and (not self.history_ or self.history_[-1].iteration != self.n_iter_):
            self._record()

    def _record(self):
        alpha = self.driver_.alpha
        snap = () if alpha is None else tuple(float(a) for a in alpha)
        value = float(self.measure_(self.game_, self.driver_.policy))
        self.history_.append(IterationRecord(self.n_iter_, self.measure_.kind, value, snap))

    # ----------------------------------------------------------- accessors
    def _check_fitted(self):
        if not hasattr(self, "driver_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    @property
    def policy_(self) -> JointPolicy:
        self._check_fitted()
        return JointPolicy.from_flat(self.game_, self.driver_.policy)

    @property
    def alpha_(self):
        self._check_fitted()
        alpha = self.driver_.alpha
        return None if alpha is None else np.array(alpha, dtype=float)

    def predict(self, X=None):
        """Action probabilities.

        ``X`` may be ``None`` (the whole flat policy), or a list of
        ``(player, infostate key)`` pairs, answered row by row.
        """
        self._check_fitted()
        flat = np.array(self.driver_.policy, dtype=float)
        if X is None:
            return flat
        out = []
        for player, key in X:
            info = self.game_.infostate(int(player), str(key))
            out.append(flat[info.slots])
        return out

    def score(self, X=None, y=None) -> float:
        """Negated measure (for welfare the welfare itself): higher is better."""
        self._check_fitted()
        tree = self.game_ if X is None else check_game(X)
        return -float(self.measure_.objective(tree, self.driver_.policy))


class GMDSolver(_Solver):
    """Generalized mirror descent with a fixed weight vector or a fixed-form schedule."""

    def __init__(self, n_iter=1000, family="entropy", M=1, alpha=None, magnet=None, alpha_magnet=0.1,
                 schedule="uniform", epsilon=1e-10, newton_iters=50, measure=None, eval_every=10,
                 random_state=0):
        self.n_iter = n_iter
        self.family = family
        self.M = M
        self.alpha = alpha
        self.magnet = magnet
        self.alpha_magnet = alpha_magnet
        self.schedule = schedule
        self.epsilon = epsilon
        self.newton_iters = newton_iters
        self.measure = measure
        self.eval_every = eval_every
        self.random_state = random_state

    def _gmd_config(self, tree, measure):
        magnet = self.magnet if self.magnet is not None else measure.kind not in ("optgap",)
        return GMDConfig(family=self.family, M=self.M, alpha=self.alpha, magnet=magnet,
                         alpha_magnet=self.alpha_magnet, epsilon=self.epsilon,
                         newton_iters=self.newton_iters, seed=int(self.random_state or 0))

    def _make_driver(self, tree, measure):
        name = {"uniform": "GMD", "linear_decay": "GMD-LD", "inverse_sqrt": "GMD-ISR"}.get(self.schedule)
        if name is None:
            raise ConfigurationError(f"unknown schedule {self.schedule!r}")
        return make_driver(tree, name, self._gmd_config(tree, measure), K=max(int(self.n_iter), 1))


class CMDSolver(GMDSolver):
    """GMD whose weights are tuned online by a zero-order meta-controller."""

    def __init__(self, n_iter=1000, family="entropy", M=1, magnet=None, alpha_magnet=0.1, controller="DRS",
                 D=5, kappa=10, mu=0.05, r_low=0.01, r_high=0.05, step_scale=None, iota=1e-6,
                 epsilon=1e-10, newton_iters=50, measure=None, eval_every=10, random_state=0):
        self.n_iter = n_iter
        self.family = family
        self.M = M
        self.magnet = magnet
        self.alpha_magnet = alpha_magnet
        self.controller = controller
        self.D = D
        self.kappa = kappa
        self.mu = mu
        self.r_low = r_low
        self.r_high = r_high
        self.step_scale = step_scale
        self.iota = iota
        self.epsilon = epsilon
        self.newton_iters = newton_iters
        self.measure = measure
        self.eval_every = eval_every
        self.random_state = random_state

    alpha = None
    schedule = "uniform"

    def _make_driver(self, tree, measure):
        mc = MCConfig(kind=self.controller, D=self.D, kappa=self.kappa, mu=self.mu, r_low=self.r_low,
                      r_high=self.r_high, iota=self.iota, seed=int(self.random_state or 0),
                      step_scale=self.step_scale)
        return make_driver(tree, "CMD", self._gmd_config(tree, measure), mc, objective=measure.objective)


class MMDSolver(_Solver):
    """Magnetic mirror descent, ``kind`` is ``"kl"`` or ``"eu"``."""

    def __init__(self, n_iter=1000, kind="kl", xi=1.0, eta=0.1, eta_tilde=0.05, measure=None, eval_every=10):
        self.n_iter = n_iter
        self.kind = kind
        self.xi = xi
        self.eta = eta
        self.eta_tilde = eta_tilde
        self.measure = measure
        self.eval_every = eval_every

    def _make_driver(self, tree, measure):
        kind = str(self.kind).lower()
        if kind not in ("kl", "eu"):
            raise ConfigurationError(f"kind must be 'kl' or 'eu', got {self.kind!r}")
        return make_driver(tree, f"MMD-{kind.upper()}", mmd_config=MMDConfig(self.xi, self.eta, self.eta_tilde))


class CFRSolver(_Solver):
    """Counterfactual regret minimization; ``plus=True`` selects CFR+.

    ``policy_`` is the average policy, which is the one that converges.
    """

    def __init__(self, n_iter=1000, plus=True, measure=None, eval_every=10):
        self.n_iter = n_iter
        self.plus = plus
        self.measure = measure
        self.eval_every = eval_every

    def _make_driver(self, tree, measure):
        return make_driver(tree, "CFR+" if self.plus else "CFR")
