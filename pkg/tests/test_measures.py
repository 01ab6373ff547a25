import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mirrorbench.baselines import MMDConfig
from mirrorbench.errors import ConfigurationError
from mirrorbench.game.policy import random_flat, uniform_flat
from mirrorbench.game.traversal import flat_best_response, flat_expected_values
from mirrorbench.games import kuhn_poker, make_builtin, matching_pennies
from mirrorbench.measures import (Measure, canonical_measure, cce_gap, mcc_nash_conv, nash_conv, opt_gap,
                                  optimal_value, social_welfare, team_best_response)

from oracles import enumerate_pure_policies


def test_matching_pennies_uniform_is_equilibrium():
    tree = matching_pennies()
    assert nash_conv(tree, uniform_flat(tree)) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_nash_conv_nonnegative_and_identities(seed):
    tree = kuhn_poker(3)
    flat = random_flat(tree, np.random.default_rng(seed))
    nc = nash_conv(tree, flat)
    assert nc >= -1e-9
    assert cce_gap(tree, flat) == nc
    assert abs(social_welfare(tree, flat)) <= 1e-9


def test_kuhn_exploitability_against_enumeration():
    tree = kuhn_poker(2)
    flat = random_flat(tree, np.random.default_rng(4))
    values = flat_expected_values(tree, flat)
    total = 0.0
    for player in range(2):
        best = -np.inf
        for assignment in enumerate_pure_policies(tree, {player}):
            trial = flat.copy()
            for info, a in assignment:
                trial[info.slots] = 0.0
                trial[info.offset + a] = 1.0
            best = max(best, flat_expected_values(tree, trial)[player])
        total += best - values[player]
    assert nash_conv(tree, flat) == pytest.approx(total, abs=1e-12)


def test_optimal_values():
    assert optimal_value(make_builtin("single_agent_kuhn_a")) == pytest.approx(0.5)
    assert optimal_value(make_builtin("single_agent_kuhn_b")) == pytest.approx(5 / 12)
    with pytest.raises(ConfigurationError):
        optimal_value(kuhn_poker(2))


def test_opt_gap_on_tiny_hanabi():
    tree = make_builtin("tiny_hanabi_game_a")
    flat = uniform_flat(tree)
    ref = optimal_value(tree)
    assert opt_gap(tree, flat, ref) == pytest.approx(ref - flat_expected_values(tree, flat)[0])
    assert social_welfare(tree, flat) == pytest.approx(2 * flat_expected_values(tree, flat)[0])


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_singleton_teams_reduce_to_nash_conv(seed):
    tree = kuhn_poker(3)
    flat = random_flat(tree, np.random.default_rng(seed))
    assert mcc_nash_conv(tree, flat, [[0], [1], [2]]) == pytest.approx(nash_conv(tree, flat), abs=1e-12)


def test_team_of_one_approaches_exact_best_response():
    tree = kuhn_poker(2)
    flat = uniform_flat(tree)
    exact = flat_best_response(tree, flat)[1][1]
    # with the magnet fully tracking the policy 2000 updates suffice
    _, value = team_best_response(tree, flat, [1], n_updates=2000, config=MMDConfig(eta_tilde=1.0))
    assert value == pytest.approx(exact, abs=1e-6)
    # the slowly moving default magnet needs about twice as many
    _, value = team_best_response(tree, flat, [1], n_updates=4000)
    assert value == pytest.approx(exact, abs=1e-5)


def test_team_best_response_improves_on_mcc_kuhn():
    tree = make_builtin("mcc_kuhn_a")
    _, value, trace = team_best_response(tree, uniform_flat(tree), [0, 1], return_trace=True)
    assert value > trace[0]
    assert np.all(np.diff(trace) >= -1e-9)


def test_team_without_infostates_keeps_policy():
    tree = make_builtin("single_agent_kuhn_a")
    flat = uniform_flat(tree)
    with pytest.raises(ConfigurationError):
        team_best_response(tree, flat, [3])


def test_measure_object():
    tree = make_builtin("mcc_kuhn_a")
    m = Measure("nash_conv").resolve(tree)
    assert m.teams == [[0, 1], [2]]
    assert m(tree, uniform_flat(tree)) >= 0
    sw = Measure("sw")
    assert sw.objective(tree, uniform_flat(tree)) == -sw(tree, uniform_flat(tree))
    with pytest.raises(ConfigurationError):
        Measure("optgap")(tree, uniform_flat(tree))
    with pytest.raises(ConfigurationError):
        canonical_measure("elo")
