"""Evaluation measures: OptGap, NashConv, CCEGap, social welfare and the
team-deviation variant of NashConv used for mixed cooperative/competitive games."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .baselines import MMDConfig, MMDState
from .errors import ConfigurationError
from .game.traversal import as_flat, flat_best_response, flat_expected_values
from .game.transforms import validate_partition

MEASURES = ("optgap", "nashconv", "ccegap", "sw")
_ALIASES = {"opt_gap": "optgap", "nash_conv": "nashconv", "exploitability": "nashconv",
            "cce_gap": "ccegap", "social_welfare": "sw", "welfare": "sw"}


def canonical_measure(name: str) -> str:
    key = str(name).lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key not in MEASURES:
        raise ConfigurationError(f"unknown measure {name!r}; use one of {MEASURES}")
    return key


def opt_gap(tree, joint, v_star: float) -> float:
    """``v_star - V(pi)``, with ``V`` the mean of the players' values (they
    coincide in single-agent and common-payoff games)."""
    values = flat_expected_values(tree, as_flat(tree, joint))
    return float(v_star - values.mean())


def nash_conv(tree, joint) -> float:
    br, br_values, values = flat_best_response(tree, as_flat(tree, joint))
    return float(np.sum(br_values - values))


def cce_gap(tree, joint) -> float:
    # every solver here emits product policies, for which the correlated
    # deviation benchmark equals the unilateral one
    return nash_conv(tree, joint)


def social_welfare(tree, joint) -> float:
    return float(flat_expected_values(tree, as_flat(tree, joint)).sum())


def _is_common_payoff(tree) -> bool:
    pay = tree.payoffs[tree.terminal_index]
    return bool(np.allclose(pay, pay[:, :1], atol=0, rtol=0))


def optimal_value(tree, max_profiles: int = 2_000_000) -> float:
    """Optimal (shared) value of a single-agent or common-payoff game.

    A single player's optimum is its best response to nothing. With several
    players sharing one payoff, every deterministic policy of all but the
    last player is enumerated and the last player best-responds.
    """
    n = tree.player_count
    if n == 1:
        _, br_values, _ = flat_best_response(tree, np.full(tree.n_slots, 1.0))
        return float(br_values[0])
    if not _is_common_payoff(tree):
        raise ConfigurationError("optimal_value needs a single-agent or common-payoff game")
    enum = [i for i in tree.infostates if i.player != n - 1]
    total = int(np.prod([i.n_actions for i in enum], dtype=float)) if enum else 1
    if total > max_profiles:
        raise ConfigurationError(f"{total} deterministic profiles exceed the enumeration limit")
    flat = np.full(tree.n_slots, 1.0)
    best = -np.inf
    for choice in itertools.product(*[range(i.n_actions) for i in enum]):
        for info, a in zip(enum, choice):
            flat[info.slots] = 0.0
            flat[info.offset + a] = 1.0
        _, br_values, _ = flat_best_response(tree, flat)
        best = max(best, float(br_values[n - 1]))
    return best


def team_best_response(tree, joint, team, n_updates: int = 100, config: MMDConfig | None = None,
                       return_trace: bool = False):
    """Approximate joint best response of ``team`` by KL magnetic mirror descent.

    Only the team's infostates move; everyone else keeps ``joint``. The run
    starts from ``joint`` and the magnet starts at that same policy.

    Returns:
        ``(flat policy, team value)`` where team value sums the members'
        expected values; with ``return_trace`` also the team value after every
        update (index 0 is the starting value).
    """
    flat = as_flat(tree, joint)
    team = sorted(int(p) for p in team)
    if not team or any(not 0 <= p < tree.player_count for p in team):
        raise ConfigurationError(f"invalid team {team}")
    mask = np.isin(tree.slot_player, team)
    state = MMDState(tree, "kl", config or MMDConfig(), initial=np.maximum(flat, 1e-300), mask=mask)
    state.policy = flat.copy()
    # magnet and log terms need strictly positive entries
    state.magnet = np.where(mask, np.maximum(flat, 1e-12), flat)
    state.policy = np.where(mask, state.magnet, flat)

    def team_value(p):
        return float(flat_expected_values(tree, p)[team].sum())

    trace = [team_value(flat)]
    if mask.any():
        for _ in range(int(n_updates)):
            state.step()
            if return_trace:
                trace.append(team_value(state.policy))
        result = state.policy
    else:
        result = flat.copy()
    value = team_value(result)
    if return_trace:
        return result, value, trace
    return result, value


def mcc_nash_conv(tree, joint, teams, n_updates: int = 100, config: MMDConfig | None = None) -> float:
    """Sum of team deviation gains; singleton teams use the exact best response."""
    teams = validate_partition(teams, tree.player_count)
    flat = as_flat(tree, joint)
    br, br_values, values = flat_best_response(tree, flat)
    total = 0.0
    for team in teams:
        if len(team) == 1:
            total += float(br_values[team[0]] - values[team[0]])
        else:
            _, v = team_best_response(tree, flat, team, n_updates, config)
            total += v - float(values[team].sum())
    return float(total)


@dataclass
class Measure:
    """A configured measure; ``__call__`` returns a value to minimize or report."""

    kind: str = "nashconv"
    reference_value: float | None = None
    teams: list | None = None
    team_br_updates: int = 100

    def __post_init__(self):
        self.kind = canonical_measure(self.kind)
        if self.team_br_updates < 1:
            raise ConfigurationError("team_br_updates must be positive")

    def resolve(self, tree) -> "Measure":
        """Fill the reference value / team partition from the game when absent."""
        ref, teams = self.reference_value, self.teams
        if self.kind == "optgap" and ref is None:
            ref = optimal_value(tree)
        if self.kind == "nashconv" and teams is None and getattr(tree, "teams", None):
            teams = tree.teams
        return Measure(self.kind, ref, teams, self.team_br_updates)

    def __call__(self, tree, joint) -> float:
        if self.kind == "optgap":
            if self.reference_value is None:
                raise ConfigurationError("OptGap needs a reference value; call resolve(tree) first")
            return opt_gap(tree, joint, self.reference_value)
        if self.kind == "nashconv":
            if self.teams is not None and any(len(t) > 1 for t in self.teams):
                return mcc_nash_conv(tree, joint, self.teams, self.team_br_updates)
            return nash_conv(tree, joint)
        if self.kind == "ccegap":
            return cce_gap(tree, joint)
        return social_welfare(tree, joint)

    def objective(self, tree, joint) -> float:
        """Value to minimize (welfare is negated)."""
        v = self(tree, joint)
        return -v if self.kind == "sw" else v
