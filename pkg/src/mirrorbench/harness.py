"""Experiment configuration, the run loop and CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .algorithms import ALGORITHMS, canonical_algorithm, make_driver
from .baselines import MMDConfig
from .errors import ConfigurationError
from .game.tree import count_decision_points
from .games.registry import CATALOGUE, GameSpec, canonical_name, list_games as _list_games, load_game
from .gmd import GMDConfig
from .measures import Measure, canonical_measure
from .meta import MCConfig
from .records import IterationRecord

# Per-game defaults: K, epsilon, C, iota, M, D, kappa, mu, r_low, r_high, xi, eta, eta_tilde
_COLUMNS = ("K", "epsilon", "C", "iota", "M", "D", "kappa", "mu", "r_low", "r_high", "xi", "eta", "eta_tilde")
_ROWS = {
    "Kuhn-A": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.05, 0.01, 0.05, 1, 0.1, 0.05),
    "Kuhn-B": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.05, 0.01, 0.05, 1, 0.1, 0.05),
    "Goofspiel-S": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.05, 0.01, 0.05, 1, 0.1, 0.05),
    "TinyHanabi-A": (100000, 1e-10, 50, 1e-6, 3, 5, 10, 0.05, 0.01, 0.05, 1, 0.1, 0.05),
    "TinyHanabi-B": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.05, 0.01, 0.05, 1, 0.1, 0.05),
    "TinyHanabi-C": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.05, 0.01, 0.05, 1, 0.1, 0.05),
    "Kuhn": (100000, 1e-10, 50, 1e-6, 5, 5, 10, 0.01, 0.01, 0.05, 1, 0.1, 0.05),
    "Leduc": (100000, 1e-10, 50, 1e-6, 3, 5, 10, 0.05, 0.01, 0.05, 1, 0.1, 0.05),
    "Goofspiel": (100000, 1e-10, 50, 1e-6, 3, 5, 10, 0.01, 0.01, 0.05, 1, 0.1, 0.05),
    "MCCKuhn-A": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.01, 0.01, 0.05, 1, 0.1, 0.05),
    "MCCKuhn-B": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.01, 0.01, 0.05, 1, 0.1, 0.05),
    "MCCGoofspiel": (100000, 1e-10, 50, 1e-6, 1, 5, 10, 0.01, 0.01, 0.05, 1, 0.1, 0.05),
}
TABLE7 = {row: dict(zip(_COLUMNS, values)) for row, values in _ROWS.items()}
DEFAULT_ROW = "Kuhn"

# the magnet pulls towards the uniform policy, which biases optimality
# measures; it is only switched on by default where equilibria are sought
_NO_MAGNET = ("single-agent", "cooperative")

_TOP_KEYS = {"game", "algorithm", "measure", "iterations", "eval_every", "seed", "gmd", "mc", "mmd",
             "record_time", "reference_value", "teams", "team_br_updates"}


def table7_row(game_name: str) -> dict:
    try:
        name = canonical_name(game_name)
    except ConfigurationError:
        return dict(TABLE7[DEFAULT_ROW])
    return dict(TABLE7[CATALOGUE.get(name, (None, None, DEFAULT_ROW))[2]])


def _is_file_spec(spec) -> bool:
    return isinstance(spec, Path) or (isinstance(spec, str) and (spec.endswith(".game") or spec.startswith("file:")))


def _coerce_game(spec):
    """A :class:`GameSpec` for built-in games, the path string for game files."""
    if _is_file_spec(spec):
        return str(spec)
    return GameSpec.coerce(spec)


def _check_keys(section: str, given: dict, allowed) -> None:
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown {section} key(s): {', '.join(unknown)}")


@dataclass
class ExperimentConfig:
    """A fully resolved experiment.

    Build one with :meth:`from_dict` (or :func:`load_config`) so that the
    per-game defaults are filled in; explicit values always win.
    """

    game: GameSpec | str
    algorithm: str = "CMD"
    measure: str = "nashconv"
    iterations: int = 100000
    eval_every: int = 10
    seed: int = 0
    gmd: dict = field(default_factory=dict)
    mc: dict = field(default_factory=dict)
    mmd: dict = field(default_factory=dict)
    reference_value: float | None = None
    teams: list | None = None
    team_br_updates: int = 100
    record_time: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("experiment config must be a mapping")
        _check_keys("top-level", data, _TOP_KEYS)
        if "game" not in data:
            raise ConfigurationError("experiment config needs a 'game'")
        game = _coerce_game(data["game"])
        is_file = not isinstance(game, GameSpec)
        row = dict(TABLE7[DEFAULT_ROW]) if is_file else table7_row(game.name)
        entry = (None, "nashconv") if is_file else CATALOGUE.get(canonical_name(game.name), (None, "nashconv"))
        category, default_measure = entry[0], entry[1]
        algorithm = canonical_algorithm(data.get("algorithm", "CMD"))

        gmd_in = dict(data.get("gmd") or {})
        _check_keys("gmd", gmd_in, {"family", "M", "alpha", "magnet", "alpha_magnet", "epsilon", "iota",
                                    "newton_iters", "newton_init", "warm_start"})
        gmd = {"family": "entropy", "M": row["M"], "epsilon": row["epsilon"], "iota": row["iota"],
               "newton_iters": row["C"],
               "magnet": category not in _NO_MAGNET, "alpha_magnet": GMDConfig.alpha_magnet}
        gmd.update(gmd_in)
        mc_in = dict(data.get("mc") or {})
        _check_keys("mc", mc_in, {"kind", "D", "kappa", "mu", "r_low", "r_high", "step_scale"})
        mc = {"kind": "DRS", "D": row["D"], "kappa": row["kappa"], "mu": row["mu"],
              "r_low": row["r_low"], "r_high": row["r_high"]}
        mc.update(mc_in)
        mmd_in = dict(data.get("mmd") or {})
        _check_keys("mmd", mmd_in, {"xi", "eta", "eta_tilde", "zeta"})
        mmd = {"xi": row["xi"], "eta": row["eta"], "eta_tilde": row["eta_tilde"]}
        mmd.update(mmd_in)
        if mc_in and algorithm != "CMD":
            raise ConfigurationError(f"'mc' settings only apply to CMD, not {algorithm}")

        cfg = cls(
            game=game, algorithm=algorithm,
            measure=canonical_measure(data.get("measure", default_measure)),
            iterations=data.get("iterations", row["K"]),
            eval_every=data.get("eval_every", 10),
            seed=data.get("seed", 0),
            gmd=gmd, mc=mc, mmd=mmd,
            reference_value=data.get("reference_value"),
            teams=data.get("teams"),
            team_br_updates=data.get("team_br_updates", 100),
            record_time=bool(data.get("record_time", False)),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for name in ("iterations", "eval_every", "seed", "team_br_updates"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        if self.iterations < 1:
            raise ConfigurationError("iterations must be at least 1")
        if self.eval_every < 1:
            raise ConfigurationError("eval_every must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        self.gmd_config()
        self.mc_config()
        self.mmd_config()

    def gmd_config(self) -> GMDConfig:
        try:
            return GMDConfig(**self.gmd, seed=self.seed)
        except TypeError as exc:
            raise ConfigurationError(f"bad gmd settings: {exc}") from None

    def mc_config(self) -> MCConfig:
        try:
            return MCConfig(**self.mc, iota=self.gmd.get("iota", 1e-6), seed=self.seed)
        except TypeError as exc:
            raise ConfigurationError(f"bad mc settings: {exc}") from None

    def mmd_config(self) -> MMDConfig:
        try:
            return MMDConfig(**self.mmd)
        except TypeError as exc:
            raise ConfigurationError(f"bad mmd settings: {exc}") from None

    def with_seed(self, seed: int) -> "ExperimentConfig":
        new = replace(self, seed=seed)
        new.validate()
        return new

    def to_dict(self) -> dict:
        out = asdict(self)
        out["game"] = str(self.game)
        gmd = dict(self.gmd)
        if gmd.get("alpha") is not None:
            gmd["alpha"] = [float(a) for a in np.asarray(gmd["alpha"]).reshape(-1)]
        if not isinstance(gmd.get("family"), str):
            gmd["family"] = gmd["family"].spec()
        out["gmd"] = gmd
        return out


def load_config(path) -> ExperimentConfig:
    """Read a YAML experiment file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"invalid YAML in {path}: {exc}") from None
    return ExperimentConfig.from_dict(data or {})


def build_measure(config: ExperimentConfig, tree) -> Measure:
    teams = config.teams
    measure = Measure(config.measure, config.reference_value, teams, config.team_br_updates)
    return measure.resolve(tree)


def run(config: ExperimentConfig, tree=None, callback=None) -> list:
    """Run ``config`` and return its :class:`IterationRecord` list.

    The measure is evaluated every ``eval_every`` iterations and after the
    last one. ``callback(record)`` is invoked for each record as it appears.
    """
    tree = tree if tree is not None else load_game(config.game)
    measure = build_measure(config, tree)
    driver = make_driver(tree, config.algorithm, config.gmd_config(), config.mc_config(),
                         config.mmd_config(), objective=measure.objective, K=config.iterations)
    records = []
    start = time.perf_counter()
    for k in range(1, config.iterations + 1):
        driver.step()
        if k % config.eval_every == 0 or k == config.iterations:
            value = float(measure(tree, driver.policy))
            alpha = () if driver.alpha is None else tuple(float(a) for a in driver.alpha)
            elapsed = time.perf_counter() - start if config.record_time else 0.0
            rec = IterationRecord(k, measure.kind, value, alpha, elapsed)
            records.append(rec)
            if callback is not None:
                callback(rec)
    run.last_driver = driver
    return records


# ------------------------------------------------------------------ output
def records_to_csv(records) -> str:
    width = max((len(r.alpha_snapshot) for r in records), default=0)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration", "measure", "value", "wall_seconds"] + [f"alpha_{i}" for i in range(width)])
    for r in records:
        alpha = [repr(float(a)) for a in r.alpha_snapshot] + [""] * (width - len(r.alpha_snapshot))
        writer.writerow([r.iteration, r.measure_name, repr(float(r.measure_value)),
                         repr(float(r.wall_seconds))] + alpha)
    return buf.getvalue()


def records_from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:4] != ["iteration", "measure", "value", "wall_seconds"]:
        raise ConfigurationError("not a results CSV")
    out = []
    for row in rows[1:]:
        alpha = tuple(float(a) for a in row[4:] if a != "")
        out.append(IterationRecord(int(row[0]), row[1], float(row[2]), alpha, float(row[3])))
    return out


def summary(config: ExperimentConfig, records, tree) -> dict:
    values = [r.measure_value for r in records]
    out = {
        "config": config.to_dict(),
        "game": {"name": tree.name, "players": tree.player_count,
                 "decision_points": count_decision_points(tree)["total"]},
        "records": len(records),
        "final_iteration": records[-1].iteration if records else 0,
        "final_value": values[-1] if values else None,
        "best_value": (max(values) if config.measure == "sw" else min(values)) if values else None,
        "final_alpha": list(records[-1].alpha_snapshot) if records else [],
    }
    if config.record_time:
        out["wall_seconds"] = records[-1].wall_seconds if records else 0.0
    return out


def run_experiment(config: ExperimentConfig, out_dir) -> tuple:
    """Run and write ``<stem>.csv`` plus ``<stem>.json`` into ``out_dir``.

    Returns ``(records, csv path, json path)``.
    """
    tree = load_game(config.game)
    records = run(config, tree)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{_slug(str(config.game))}_{config.algorithm.replace('+', 'plus')}_{config.measure}_seed{config.seed}"
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    csv_path.write_text(records_to_csv(records), encoding="utf-8")
    json_path.write_text(json.dumps(summary(config, records, tree), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    return records, csv_path, json_path


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in text).strip("_")


# --------------------------------------------------------------- catalogue
def list_games() -> list:
    return _list_games()


def describe_game(name) -> str:
    tree = load_game(name)
    counts = count_decision_points(tree)
    lines = [f"name: {tree.name}",
             f"category: {getattr(tree, 'category', 'custom')}",
             f"players: {tree.player_count}",
             f"decision_points: {counts['total']}"]
    for p in range(tree.player_count):
        lines.append(f"  player {p}: {counts[p]}")
    lines.append(f"nodes: {tree.n_nodes}")
    lines.append(f"terminals: {len(tree.terminal_index)}")
    if getattr(tree, "teams", None):
        lines.append(f"teams: {tree.teams}")
    return "\n".join(lines)
