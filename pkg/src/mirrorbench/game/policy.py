"""Tabular joint policies.

A :class:`JointPolicy` maps, for every player, infostate keys to probability
vectors. Solvers work on the flat representation (one entry per
``(infostate, action)`` slot, laid out by :class:`~mirrorbench.game.tree.GameTree`)
and convert at the boundary with :meth:`JointPolicy.from_flat` /
:meth:`JointPolicy.to_flat`.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import ConfigurationError

SUM_ATOL = 1e-9


class JointPolicy:
    """Per-player association ``infostate key -> probability vector``."""

    def __init__(self, policies):
        self.policies = [
            {str(k): np.asarray(v, dtype=float) for k, v in dict(p).items()} for p in policies]

    @property
    def player_count(self) -> int:
        return len(self.policies)

    def __getitem__(self, player: int) -> dict:
        return self.policies[player]

    def __len__(self) -> int:
        return len(self.policies)

    def __repr__(self) -> str:
        sizes = ", ".join(str(len(p)) for p in self.policies)
        return f"JointPolicy(infostates per player=[{sizes}])"

    def copy(self) -> "JointPolicy":
        return JointPolicy([{k: v.copy() for k, v in p.items()} for p in self.policies])

    # ----------------------------------------------------------- conversion
    @classmethod
    def uniform(cls, tree) -> "JointPolicy":
        return cls.from_flat(tree, uniform_flat(tree))

    @classmethod
    def from_flat(cls, tree, flat) -> "JointPolicy":
        flat = np.asarray(flat, dtype=float)
        policies = [{} for _ in range(tree.player_count)]
        for info in tree.infostates:
            policies[info.player][info.key] = flat[info.slots].copy()
        return cls(policies)

    def to_flat(self, tree) -> np.ndarray:
        """Lay the policy out in ``tree``'s slot order.

        Raises:
            ConfigurationError: if an infostate is missing or a vector has the
                wrong length.
        """
        if len(self.policies) != tree.player_count:
            raise ConfigurationError(
                f"policy covers {len(self.policies)} players, game has {tree.player_count}")
        flat = np.empty(tree.n_slots)
        for info in tree.infostates:
            try:
                vec = self.policies[info.player][info.key]
            except KeyError:
                raise ConfigurationError(
                    f"policy has no entry for player {info.player} infostate {info.key!r}") from None
            if vec.shape != (info.n_actions,):
                raise ConfigurationError(
                    f"player {info.player} infostate {info.key!r}: expected {info.n_actions} "
                    f"probabilities, got shape {vec.shape}")
            flat[info.slots] = vec
        return flat

    def validate(self, tree, floor: float = 0.0) -> None:
        flat = self.to_flat(tree)
        check_flat_policy(tree, flat, floor=floor)

    # ------------------------------------------------------------------ io
    def to_dict(self) -> dict:
        return {str(p): {k: v.tolist() for k, v in pol.items()} for p, pol in enumerate(self.policies)}

    @classmethod
    def from_dict(cls, data: dict) -> "JointPolicy":
        try:
            players = sorted(int(p) for p in data)
        except ValueError:
            raise ConfigurationError("policy file keys must be player indices") from None
        if players != list(range(len(players))):
            raise ConfigurationError(f"policy file players must be 0..N-1, got {players}")
        return cls([data[str(p)] if str(p) in data else data[p] for p in players])

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "JointPolicy":
        return cls.from_dict(json.loads(text))


def uniform_flat(tree) -> np.ndarray:
    return 1.0 / tree.infostate_size[tree.slot_infostate].astype(float)


def segment_sum(values, tree) -> np.ndarray:
    return np.add.reduceat(values, tree.infostate_offset) if tree.n_slots else np.zeros(0)


def check_flat_policy(tree, flat, floor: float = 0.0, atol: float = SUM_ATOL) -> None:
    flat = np.asarray(flat, dtype=float)
    if flat.shape != (tree.n_slots,):
        raise ConfigurationError(f"flat policy must have {tree.n_slots} entries, got {flat.shape}")
    if not np.all(np.isfinite(flat)):
        raise ConfigurationError("policy contains non-finite entries")
    bad = np.flatnonzero(flat < floor)
    if len(bad):
        info = tree.infostates[tree.slot_infostate[bad[0]]]
        raise ConfigurationError(
            f"player {info.player} infostate {info.key!r}: probability below {floor}")
    sums = segment_sum(flat, tree)
    off = np.flatnonzero(np.abs(sums - 1.0) > atol)
    if len(off):
        info = tree.infostates[off[0]]
        raise ConfigurationError(
            f"player {info.player} infostate {info.key!r}: probabilities sum to {sums[off[0]]!r}")


def random_flat(tree, rng) -> np.ndarray:
    """Random interior policy: every infostate vector drawn from a flat Dirichlet."""
    x = rng.exponential(size=tree.n_slots) + 1e-12
    return x / segment_sum(x, tree)[tree.slot_infostate]
