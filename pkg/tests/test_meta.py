import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mirrorbench.errors import ConfigurationError, SolverError
from mirrorbench.games import kuhn_poker
from mirrorbench.gmd import GMDConfig
from mirrorbench.measures import Measure
from mirrorbench.meta import CMDRun, KINDS, MCConfig, clip_unit, cmd_iteration, mc_update, sample_directions, sgn


def linear(weights, scale=1.0):
    weights = np.asarray(weights, dtype=float)
    return lambda a: scale * float(weights @ a)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_drs_ignores_the_scale_of_differences(seed):
    cfg = MCConfig("DRS", D=5, mu=0.05, step_scale=1e-3)
    alpha = np.full(4, 0.5)
    w = np.random.default_rng(seed).normal(size=4)
    a1, _ = mc_update("DRS", alpha, linear(w), cfg, np.random.default_rng(seed))
    a2, _ = mc_update("DRS", alpha, linear(w, 10.0), cfg, np.random.default_rng(seed))
    np.testing.assert_array_equal(a1, a2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_rs_step_scales_with_differences(seed):
    cfg = MCConfig("RS", D=5, mu=0.05, step_scale=1e-4)
    alpha = np.full(4, 0.5)
    w = np.random.default_rng(seed).normal(size=4)
    a1, _ = mc_update("RS", alpha, linear(w), cfg, np.random.default_rng(seed))
    a2, _ = mc_update("RS", alpha, linear(w, 10.0), cfg, np.random.default_rng(seed))
    np.testing.assert_allclose(a2 - alpha, 10 * (a1 - alpha), rtol=1e-9, atol=1e-15)


def test_drs_moves_downhill_on_a_linear_objective():
    cfg = MCConfig("DRS", D=20, mu=0.05, step_scale=0.01)
    alpha = np.full(3, 0.5)
    w = np.array([1.0, -1.0, 0.0])
    new, used = mc_update("DRS", alpha, linear(w), cfg, np.random.default_rng(0))
    assert used == 40
    assert w @ new < w @ alpha


def test_unscaled_step_is_available():
    cfg = MCConfig("DRS", D=1, mu=0.05, step_scale=1.0)
    u = sample_directions(cfg, 2, np.random.default_rng(3))[0]
    new, _ = mc_update("DRS", np.full(2, 0.5), linear([1.0, 0.0]), cfg, np.random.default_rng(3))
    np.testing.assert_allclose(new, clip_unit(0.5 - sgn(u[0]) * u, 1e-6))


@pytest.mark.parametrize("kind", KINDS)
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_weights_stay_in_range(kind, seed):
    cfg = MCConfig(kind, iota=1e-3, step_scale=1.0)
    rng = np.random.default_rng(seed)
    alpha = rng.uniform(1e-3, 1.0, size=3)
    w = rng.normal(scale=100, size=3)
    for _ in range(5):
        alpha, _ = mc_update(kind, alpha, linear(w), cfg, rng)
        assert np.all(alpha >= 1e-3) and np.all(alpha <= 1.0)


def test_gld_keeps_the_best_candidate():
    cfg = MCConfig("GLD", D=6)
    alpha = np.full(2, 0.5)
    seen = []

    def evaluate(a):
        seen.append(a.copy())
        return float(a[0])

    new, used = mc_update("GLD", alpha, evaluate, cfg, np.random.default_rng(2))
    assert used == 6
    assert new[0] == pytest.approx(min(s[0] for s in seen))


def test_glds_uses_current_measure():
    cfg = MCConfig("GLDS", D=3)
    calls = []

    def evaluate(a):
        calls.append(a)
        return 0.0 if a is None else float(a.sum())

    _, used = mc_update("GLDS", np.full(2, 0.5), evaluate, cfg, np.random.default_rng(0))
    assert used == 4 and calls[-1] is None


def test_gld_radii_respected():
    cfg = MCConfig("GLD", D=50, r_low=0.01, r_high=0.05)
    u = sample_directions(cfg, 3, np.random.default_rng(0))
    norms = np.linalg.norm(u, axis=1)
    assert np.all(norms >= 0.01 - 1e-12) and np.all(norms <= 0.05 + 1e-12)


def test_failed_evaluation_keeps_alpha():
    def evaluate(a):
        raise SolverError("boom")

    alpha = np.array([0.3, 0.4])
    new, _ = mc_update("DRS", alpha, evaluate, MCConfig(), np.random.default_rng(0))
    np.testing.assert_array_equal(new, alpha)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        MCConfig("SGD")
    with pytest.raises(ConfigurationError):
        MCConfig(r_low=0.1, r_high=0.05)
    with pytest.raises(ConfigurationError):
        MCConfig(step_scale=0.0)
    assert MCConfig(mu=0.02).scale == 0.02


def test_warm_up_uses_one_over_k():
    tree = kuhn_poker(2)
    run = CMDRun(tree, GMDConfig(M=4), MCConfig(), Measure("nashconv"))
    for k in range(1, 5):
        run.step()
        np.testing.assert_array_equal(run.alpha, np.full(5, 1.0 / k))


def test_cmd_records_and_determinism():
    tree = kuhn_poker(2)

    def trace(seed):
        run = CMDRun(tree, GMDConfig(M=2), MCConfig(seed=seed, kappa=2), Measure("nashconv"),
                     measure_name="nashconv")
        return [cmd_iteration(run)[1] for _ in range(30)]

    first, second = trace(7), trace(7)
    strip = lambda recs: [(r.iteration, r.measure_value, r.alpha_snapshot) for r in recs]
    assert strip(first) == strip(second)
    assert strip(first) != strip(trace(8))
    assert [r.iteration for r in first] == list(range(1, 31))
    assert all(1e-6 <= a <= 1 for r in first for a in r.alpha_snapshot)
