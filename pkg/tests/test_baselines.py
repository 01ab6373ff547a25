import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mirrorbench.baselines import (MMDConfig, MMDState, RegretState, cfr_iteration, magnet_update,
                                   mmd_eu_step, mmd_eu_update, mmd_kl_step)
from mirrorbench.errors import ConfigurationError
from mirrorbench.games import kuhn_poker, matching_pennies
from mirrorbench.measures import nash_conv

from oracles import maximize_quadratic, random_simplex


def test_mmd_eu_hand_example():
    out = mmd_eu_step(np.array([1.0, 0.0]), np.array([0.5, 0.5]), np.array([0.5, 0.5]),
                      MMDConfig(xi=1, eta=0.1, zeta=1e-300))
    np.testing.assert_allclose(out, [6 / 11, 5 / 11], atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_mmd_eu_matches_constrained_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    q = rng.normal(scale=2.0, size=n)
    pi_k, rho = random_simplex(rng, n), random_simplex(rng, n)
    cfg = MMDConfig(xi=float(rng.uniform(0.1, 2)), eta=float(rng.uniform(0.05, 1)), zeta=1e-300)
    got = mmd_eu_step(q, pi_k, rho, cfg)
    # maximize <pi,q> - xi/2 ||pi - rho||^2 - 1/(2 eta) ||pi - pi_k||^2
    c = q + cfg.xi * rho + pi_k / cfg.eta
    curvature = cfg.xi + 1 / cfg.eta
    expected = maximize_quadratic(c, curvature)
    if np.min(expected) > 1e-9:
        # the shifted-mean dual is exact whenever the optimum is interior
        np.testing.assert_allclose(got, expected, atol=1e-6)
    assert got.sum() == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_mmd_kl_closed_form(seed):
    rng = np.random.default_rng(seed)
    n = 4
    q = rng.normal(size=n)
    pi_k, rho = random_simplex(rng, n) + 0.01, random_simplex(rng, n) + 0.01
    pi_k, rho = pi_k / pi_k.sum(), rho / rho.sum()
    cfg = MMDConfig()
    got = mmd_kl_step(q, pi_k, rho, cfg)
    w = (q + cfg.xi * np.log(rho) + np.log(pi_k) / cfg.eta) / (cfg.xi + 1 / cfg.eta)
    expected = np.exp(w - w.max())
    np.testing.assert_allclose(got, expected / expected.sum(), atol=1e-12)


def test_step_validation():
    with pytest.raises(ConfigurationError):
        mmd_eu_step(np.zeros(2), np.array([0.7, 0.7]), np.array([0.5, 0.5]))
    with pytest.raises(ConfigurationError):
        mmd_kl_step(np.zeros(2), np.array([1.0, 0.0]), np.array([0.5, 0.5]))
    with pytest.raises(ConfigurationError):
        MMDConfig(eta=0)


def test_magnet_moves_towards_new_policy():
    out = magnet_update(np.array([0.5, 0.5]), np.array([1.0, 0.0]), 0.05)
    np.testing.assert_allclose(out, [0.525, 0.475])


def test_segmented_update_equals_per_segment():
    q = np.array([1.0, 0.0, 0.3, -0.2, 0.5])
    pi = np.array([0.5, 0.5, 0.2, 0.3, 0.5])
    cfg = MMDConfig()
    joint = mmd_eu_update(q, pi, pi, cfg, offsets=[0, 2])
    np.testing.assert_allclose(joint[:2], mmd_eu_update(q[:2], pi[:2], pi[:2], cfg))
    np.testing.assert_allclose(joint[2:], mmd_eu_update(q[2:], pi[2:], pi[2:], cfg))


def test_mmd_kl_reduces_kuhn_nash_conv():
    tree = kuhn_poker(2)
    state = MMDState(tree, "kl")
    start = nash_conv(tree, state.policy)
    for _ in range(300):
        state.step()
    assert nash_conv(tree, state.policy) < start / 3


def test_regret_matching_uniform_without_positive_regret():
    tree = matching_pennies()
    state = RegretState(tree)
    np.testing.assert_allclose(state.current_policy(), 0.5)


@pytest.mark.parametrize("plus,iters,bound", [(True, 1000, 0.01), (False, 1000, 0.05)])
def test_cfr_average_converges_on_kuhn(plus, iters, bound):
    tree = kuhn_poker(2)
    state = RegretState(tree)
    for _ in range(iters):
        _, avg = cfr_iteration(tree, state, plus)
    assert nash_conv(tree, avg) < bound


def test_cfr_three_player_runs():
    tree = kuhn_poker(3)
    state = RegretState(tree)
    for _ in range(50):
        _, avg = cfr_iteration(tree, state, True)
    assert np.isfinite(nash_conv(tree, avg))
