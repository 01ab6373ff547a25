import json

import numpy as np
import pytest

from mirrorbench.errors import ConfigurationError
from mirrorbench.harness import (TABLE7, ExperimentConfig, describe_game, list_games, load_config,
                                 records_from_csv, records_to_csv, run, run_experiment)
from mirrorbench.games import GameSpec


def cfg(**kw):
    return ExperimentConfig.from_dict(kw)


def test_table_defaults_fill_missing_fields():
    c = cfg(game="kuhn_poker")
    assert c.iterations == 100000 and c.gmd["M"] == 5 and c.mc["mu"] == 0.01
    assert c.measure == "nashconv" and c.gmd["magnet"] is True
    c = cfg(game="tiny_hanabi_game_a")
    assert c.gmd["M"] == 3 and c.measure == "optgap" and c.gmd["magnet"] is False
    c = cfg(game="leduc_poker", gmd={"M": 2}, mc={"mu": 0.2}, iterations=5)
    assert c.gmd["M"] == 2 and c.mc["mu"] == 0.2 and c.iterations == 5
    assert set(TABLE7) >= {"Kuhn-A", "Leduc", "MCCGoofspiel"}


@pytest.mark.parametrize("bad", [
    {}, {"game": "kuhn_poker", "iterations": 0}, {"game": "kuhn_poker", "eval_every": 0},
    {"game": "kuhn_poker", "algorithm": "PPO"}, {"game": "kuhn_poker", "colour": 1},
    {"game": "kuhn_poker", "algorithm": "CFR", "mc": {"D": 3}},
    {"game": "kuhn_poker", "gmd": {"family": "cubic"}}, {"game": "kuhn_poker", "mc": {"kind": "SGD"}},
    {"game": "kuhn_poker", "iterations": 2.5}, {"game": "nope"},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict(bad)


def test_yaml_loading(tmp_path):
    path = tmp_path / "e.yaml"
    path.write_text("game: kuhn_poker\nalgorithm: GMD-ISR\niterations: 20\ngmd:\n  M: 2\n")
    c = load_config(path)
    assert c.algorithm == "GMD-ISR" and c.gmd["M"] == 2
    path.write_text("game: [unclosed\n")
    with pytest.raises(ConfigurationError):
        load_config(path)
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.yaml")


def test_cfr_plus_record_stream():
    records = run(cfg(game="kuhn_poker", algorithm="CFR+", iterations=1000, eval_every=100))
    assert [r.iteration for r in records] == list(range(100, 1001, 100))
    assert records[-1].measure_value < 0.01


def test_gmd_reaches_single_agent_optimum():
    records = run(cfg(game="single_agent_kuhn_a", algorithm="GMD", iterations=2000, eval_every=500))
    assert records[-1].measure_value < 1e-3


def test_last_iteration_always_recorded():
    records = run(cfg(game="matching_pennies", algorithm="MMD-EU", iterations=25, eval_every=10))
    assert [r.iteration for r in records] == [10, 20, 25]


@pytest.mark.parametrize("algorithm", ["CMD", "GMD", "GMD-LD", "GMD-ISR", "MMD-KL", "MMD-EU", "CFR", "CFR+"])
def test_every_algorithm_runs(algorithm):
    records = run(cfg(game="kuhn_poker", algorithm=algorithm, iterations=30, eval_every=10))
    assert len(records) == 3 and all(np.isfinite(r.measure_value) for r in records)


def test_linear_decay_weights_shrink():
    records = run(cfg(game="kuhn_poker", algorithm="GMD-LD", iterations=40, eval_every=10))
    hist = [r.alpha_snapshot[1] for r in records]
    assert hist == sorted(hist, reverse=True)


def test_csv_round_trip_and_determinism(tmp_path):
    c = cfg(game="matching_pennies", algorithm="CMD", iterations=500, eval_every=50, seed=7)
    first = records_to_csv(run(c))
    assert first == records_to_csv(run(c))
    back = records_from_csv(first)
    assert records_to_csv(back) == first
    assert first.splitlines()[0].startswith("iteration,measure,value,wall_seconds,alpha_0")


def test_run_experiment_writes_files(tmp_path):
    c = cfg(game="kuhn_poker", algorithm="CFR", iterations=20, eval_every=10, record_time=True)
    records, csv_path, json_path = run_experiment(c, tmp_path)
    summary = json.loads(json_path.read_text())
    assert summary["final_iteration"] == 20 and summary["game"]["decision_points"] == 12
    assert summary["wall_seconds"] >= 0
    assert len(records_from_csv(csv_path.read_text())) == len(records)


def test_seed_override_and_game_files(tmp_path):
    from mirrorbench.games import make_builtin, write_game_file

    path = tmp_path / "kuhn.game"
    path.write_text(write_game_file(make_builtin("kuhn_poker")))
    c = cfg(game=str(path), algorithm="CFR+", iterations=10)
    assert run(c)[-1].iteration == 10
    assert c.with_seed(3).seed == 3


def test_catalogue_helpers():
    assert "kuhn_poker" in list_games()
    text = describe_game("kuhn_poker(players=3)")
    assert "players: 3" in text and "decision_points: 48" in text
    with pytest.raises(ConfigurationError):
        describe_game("unknown_game")


def test_game_spec_mapping():
    c = cfg(game={"name": "kuhn_poker", "players": 3}, algorithm="CFR", iterations=1)
    assert c.game == GameSpec("kuhn_poker", {"players": 3})
