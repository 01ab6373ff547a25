"""Separable convex mirror maps and their Bregman divergences.

Each :class:`ConvexFamily` provides ``psi`` together with its derivative, the
inverse of the derivative and the derivative of that inverse. A policy's
mirror map is the coordinate sum ``phi(pi) = sum_a psi(pi[a])``.

Evaluators accept scalars or numpy arrays and raise :class:`DomainError` on
out-of-domain input instead of clamping.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError


class ConvexFamily:
    """Base class; subclasses implement the four evaluators."""

    name = "family"

    def psi(self, x):
        raise NotImplementedError

    def psi_prime(self, x):
        raise NotImplementedError

    def psi_prime_inv(self, y):
        raise NotImplementedError

    def psi_prime_inv_deriv(self, y):
        raise NotImplementedError

    # psi'(0+); -inf when the derivative blows up at zero (the solution is
    # then interior and the nonnegativity constraint never binds)
    prime_at_zero = -np.inf

    def _check_unit(self, x, allow_zero=False):
        arr = np.asarray(x, dtype=float)
        bad = (arr < 0) | (arr > 1 + 1e-12) | ~np.isfinite(arr) if allow_zero else \
            (arr <= 0) | (arr > 1 + 1e-12) | ~np.isfinite(arr)
        if np.any(bad):
            raise DomainError(self, _first(arr, bad))
        return arr

    def phi(self, pi):
        return float(np.sum(self.psi(pi)))

    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"ConvexFamily({self.spec()})"

    def __eq__(self, other):
        return isinstance(other, ConvexFamily) and self.spec() == other.spec()

    def __hash__(self):
        return hash(self.spec())


def _first(arr, mask):
    return float(np.asarray(arr)[np.asarray(mask)].flat[0]) if np.ndim(arr) else float(arr)


def _out(arr, value):
    return float(value) if np.ndim(arr) == 0 else value


@dataclass(frozen=True, eq=False, repr=False)
class Power(ConvexFamily):
    """``psi(x) = x**n`` with ``n > 1``; ``n = 2`` gives the Euclidean geometry."""

    n: float = 2.0
    name = "power"

    def __post_init__(self):
        if not self.n > 1:
            raise ConfigurationError(f"power family needs n > 1, got {self.n}")

    prime_at_zero = 0.0

    def psi(self, x):
        x = self._check_unit(x, allow_zero=True)
        return _out(x, x ** self.n)

    def psi_prime(self, x):
        x = self._check_unit(x, allow_zero=True)
        return _out(x, self.n * x ** (self.n - 1))

    def psi_prime_inv(self, y):
        y = np.asarray(y, dtype=float)
        bad = (y < 0) | ~np.isfinite(y)
        if np.any(bad):
            raise DomainError(self, _first(y, bad))
        return _out(y, (y / self.n) ** (1.0 / (self.n - 1)))

    def psi_prime_inv_deriv(self, y):
        y = np.asarray(y, dtype=float)
        bad = ~np.isfinite(y) | (y < 0) | ((y == 0) & (self.n > 2))
        if np.any(bad):
            raise DomainError(self, _first(y, bad))
        return _out(y, (y / self.n) ** ((2 - self.n) / (self.n - 1)) / (self.n * (self.n - 1)))

    def spec(self):
        return f"power:n={self.n:g}"


@dataclass(frozen=True, eq=False, repr=False)
class NegEntropy(ConvexFamily):
    """``psi(x) = x ln x``; its Bregman divergence is the KL divergence."""

    name = "entropy"

    def psi(self, x):
        x = self._check_unit(x, allow_zero=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)
        return _out(x, val)

    def psi_prime(self, x):
        x = self._check_unit(x)
        return _out(x, np.log(x) + 1.0)

    def psi_prime_inv(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(np.isnan(y)):
            raise DomainError(self, _first(y, np.isnan(y)))
        return _out(y, np.exp(y - 1.0))

    psi_prime_inv_deriv = psi_prime_inv

    def spec(self):
        return "entropy"


@dataclass(frozen=True, eq=False, repr=False)
class NegPower(ConvexFamily):
    """``psi(x) = -x**n`` with ``0 < n < 1``."""

    n: float = 0.1
    name = "negpower"

    def __post_init__(self):
        if not 0 < self.n < 1:
            raise ConfigurationError(f"negpower family needs 0 < n < 1, got {self.n}")

    def psi(self, x):
        x = self._check_unit(x, allow_zero=True)
        return _out(x, -(x ** self.n))

    def psi_prime(self, x):
        x = self._check_unit(x)
        return _out(x, -self.n * x ** (self.n - 1))

    def _check_neg(self, y):
        y = np.asarray(y, dtype=float)
        bad = (y >= 0) | ~np.isfinite(y)
        if np.any(bad):
            raise DomainError(self, _first(y, bad))
        return y

    def psi_prime_inv(self, y):
        y = self._check_neg(y)
        return _out(y, (-y / self.n) ** (1.0 / (self.n - 1)))

    def psi_prime_inv_deriv(self, y):
        y = self._check_neg(y)
        return _out(y, (-y / self.n) ** ((2 - self.n) / (self.n - 1)) / (self.n * (1 - self.n)))

    def spec(self):
        return f"negpower:n={self.n:g}"


@dataclass(frozen=True, eq=False, repr=False)
class Exp(ConvexFamily):
    """``psi(x) = exp(k x)`` with ``k > 0``."""

    k: float = 1.0
    name = "exp"

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigurationError(f"exp family needs k > 0, got {self.k}")

    @property
    def prime_at_zero(self):
        return self.k

    def psi(self, x):
        x = self._check_unit(x, allow_zero=True)
        return _out(x, np.exp(self.k * x))

    def psi_prime(self, x):
        x = self._check_unit(x, allow_zero=True)
        return _out(x, self.k * np.exp(self.k * x))

    def _check_pos(self, y):
        y = np.asarray(y, dtype=float)
        bad = (y <= 0) | ~np.isfinite(y)
        if np.any(bad):
            raise DomainError(self, _first(y, bad))
        return y

    def psi_prime_inv(self, y):
        y = self._check_pos(y)
        return _out(y, np.log(y / self.k) / self.k)

    def psi_prime_inv_deriv(self, y):
        y = self._check_pos(y)
        return _out(y, 1.0 / (self.k * y))

    def spec(self):
        return f"exp:k={self.k:g}"


_FAMILIES = {"power": (Power, "n"), "entropy": (NegEntropy, None),
             "negpower": (NegPower, "n"), "exp": (Exp, "k")}
_ALIASES = {"kl": "entropy", "negentropy": "entropy", "euclidean": "power", "eu": "power"}


def parse_family(spec) -> ConvexFamily:
    """Build a family from ``"power:n=2"``, ``"entropy"``, ``"negpower:n=0.1"`` or ``"exp:k=1"``."""
    if isinstance(spec, ConvexFamily):
        return spec
    m = re.fullmatch(r"\s*([a-z]+)\s*(?::\s*([a-z]+)\s*=\s*([^\s]+))?\s*", str(spec).lower())
    if not m:
        raise ConfigurationError(f"cannot parse convex family {spec!r}")
    name = _ALIASES.get(m.group(1), m.group(1))
    if name not in _FAMILIES:
        raise ConfigurationError(f"unknown convex family {m.group(1)!r}; use one of {sorted(_FAMILIES)}")
    cls, param = _FAMILIES[name]
    if m.group(2) is None:
        return cls()
    if m.group(2) != param:
        raise ConfigurationError(f"family {name!r} takes parameter {param!r}, got {m.group(2)!r}")
    try:
        value = float(m.group(3))
    except ValueError:
        raise ConfigurationError(f"bad parameter value in {spec!r}") from None
    return cls(value)


# convenience module-level evaluators
def psi(family, x):
    return parse_family(family).psi(x)


def psi_prime(family, x):
    return parse_family(family).psi_prime(x)


def psi_prime_inv(family, y):
    return parse_family(family).psi_prime_inv(y)


def psi_prime_inv_deriv(family, y):
    return parse_family(family).psi_prime_inv_deriv(y)


def bregman_div(family, x, y) -> float:
    """``phi(x) - phi(y) - <phi'(y), x - y>`` for simplex vectors ``x`` and ``y > 0``."""
    family = parse_family(family)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if np.any(y <= 0):
        raise DomainError(family, _first(y, y <= 0), "second argument must be strictly positive")
    return family.phi(x) - family.phi(y) - float(np.dot(family.psi_prime(y), x - y))
