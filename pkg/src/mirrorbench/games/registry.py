"""Name-based access to the built-in games and their derived variants."""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError
from ..game.policy import JointPolicy
from ..game.transforms import apply_team_rewards, fix_player_policy
from ..game.tree import GameTree
from .goofspiel import goofspiel
from .poker import kuhn_poker, leduc_poker
from .small import matching_pennies, tiny_hanabi, tiny_hanabi_preset

# Goofspiel configuration matching the benchmark decision-point counts
# (8 for the single-agent variant, 30 for three players); see
# tests/test_games.py::test_goofspiel_calibration.
GOOFSPIEL_BENCH = dict(cards=3, point_order="descending")

MCC_TEAMS = {"a": [[0, 1], [2]], "b": [[0, 2], [1]]}


@dataclass(frozen=True)
class GameSpec:
    """A game name plus keyword parameters, e.g. ``kuhn_poker(players=3)``."""

    name: str
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "GameSpec":
        text = text.strip()
        m = re.fullmatch(r"([A-Za-z_][\w\-]*)\s*(?:\((.*)\))?", text, re.S)
        if not m:
            raise ConfigurationError(f"cannot parse game spec {text!r}")
        name, body = m.group(1), m.group(2)
        params = {}
        if body and body.strip():
            try:
                call = ast.parse(f"f({body})", mode="eval").body
                params = {kw.arg: ast.literal_eval(kw.value) for kw in call.keywords}
                if call.args or any(kw.arg is None for kw in call.keywords):
                    raise ValueError
            except (SyntaxError, ValueError):
                raise ConfigurationError(f"game parameters must be key=value literals: {text!r}") from None
        return cls(name, params)

    @classmethod
    def coerce(cls, spec) -> "GameSpec":
        if isinstance(spec, GameSpec):
            return spec
        if isinstance(spec, str):
            return cls.parse(spec)
        if isinstance(spec, dict):
            spec = dict(spec)
            try:
                name = spec.pop("name")
            except KeyError:
                raise ConfigurationError("game spec mapping needs a 'name'") from None
            params = spec.pop("params", {})
            params.update(spec)
            return cls(name, params)
        raise ConfigurationError(f"cannot interpret {spec!r} as a game spec")

    def __str__(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))
        return f"{self.name}({args})"


def _single_agent(tree: GameTree, focal: int, name: str) -> GameTree:
    background = 1 - focal
    uniform = JointPolicy.uniform(tree)[background]
    return fix_player_policy(tree, background, uniform, drop_payoff=True, name=name)


def _single_agent_kuhn(which):
    def build():
        return _single_agent(kuhn_poker(2), 0 if which == "a" else 1, f"single_agent_kuhn_{which}")
    return build


def _single_agent_goofspiel(**params):
    params = {**GOOFSPIEL_BENCH, **params, "players": 2}
    return _single_agent(goofspiel(**params), 0, "single_agent_goofspiel")


def _mcc_kuhn(which):
    def build():
        return apply_team_rewards(kuhn_poker(3), MCC_TEAMS[which], name=f"mcc_kuhn_{which}")
    return build


def _mcc_goofspiel(**params):
    params = {**GOOFSPIEL_BENCH, **params, "players": 3}
    return apply_team_rewards(goofspiel(**params), MCC_TEAMS["a"], name="mcc_goofspiel")


def _goofspiel(**params):
    return goofspiel(**{**GOOFSPIEL_BENCH, **params})


def _tiny(which):
    return lambda: tiny_hanabi_preset(which)


BUILDERS = {
    "kuhn_poker": kuhn_poker,
    "leduc_poker": leduc_poker,
    "goofspiel": _goofspiel,
    "tiny_hanabi": tiny_hanabi,
    "matching_pennies": matching_pennies,
    "single_agent_kuhn_a": _single_agent_kuhn("a"),
    "single_agent_kuhn_b": _single_agent_kuhn("b"),
    "single_agent_goofspiel": _single_agent_goofspiel,
    "tiny_hanabi_game_a": _tiny("a"),
    "tiny_hanabi_game_b": _tiny("b"),
    "tiny_hanabi_game_c": _tiny("c"),
    "mcc_kuhn_a": _mcc_kuhn("a"),
    "mcc_kuhn_b": _mcc_kuhn("b"),
    "mcc_goofspiel": _mcc_goofspiel,
}

ALIASES = {
    "mix_kuhn_3p_game_a": "mcc_kuhn_a",
    "mix_kuhn_3p_game_b": "mcc_kuhn_b",
    "mix_goofspiel_3p": "mcc_goofspiel",
}

# category, default measure, hyper-parameter row
CATALOGUE = {
    "single_agent_kuhn_a": ("single-agent", "optgap", "Kuhn-A"),
    "single_agent_kuhn_b": ("single-agent", "optgap", "Kuhn-B"),
    "single_agent_goofspiel": ("single-agent", "optgap", "Goofspiel-S"),
    "tiny_hanabi_game_a": ("cooperative", "optgap", "TinyHanabi-A"),
    "tiny_hanabi_game_b": ("cooperative", "optgap", "TinyHanabi-B"),
    "tiny_hanabi_game_c": ("cooperative", "optgap", "TinyHanabi-C"),
    "tiny_hanabi": ("cooperative", "optgap", "TinyHanabi-A"),
    "kuhn_poker": ("zero-sum", "nashconv", "Kuhn"),
    "leduc_poker": ("zero-sum", "nashconv", "Leduc"),
    "goofspiel": ("zero-sum", "nashconv", "Goofspiel"),
    "matching_pennies": ("zero-sum", "nashconv", "Kuhn"),
    "mcc_kuhn_a": ("mcc", "nashconv", "MCCKuhn-A"),
    "mcc_kuhn_b": ("mcc", "nashconv", "MCCKuhn-B"),
    "mcc_goofspiel": ("mcc", "nashconv", "MCCGoofspiel"),
}


def canonical_name(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in BUILDERS:
        raise ConfigurationError(f"unknown game {name!r}; known games: {', '.join(list_games())}")
    return name


def list_games() -> list:
    return sorted(BUILDERS)


def make_builtin(spec) -> GameTree:
    """Build a registered game from a :class:`GameSpec`, string or mapping."""
    spec = GameSpec.coerce(spec)
    name = canonical_name(spec.name)
    try:
        tree = BUILDERS[name](**spec.params)
    except TypeError as exc:
        raise ConfigurationError(f"invalid parameters for {name}: {exc}") from None
    tree.spec = GameSpec(name, dict(spec.params))
    tree.category = CATALOGUE.get(name, ("custom",))[0]
    return tree


def load_game(spec) -> GameTree:
    """Build a game from a spec, or parse it when given a path to a game file."""
    if isinstance(spec, GameTree):
        return spec
    if isinstance(spec, Path) or (isinstance(spec, str) and (spec.endswith(".game") or spec.startswith("file:"))):
        from .parser import parse_game_file

        path = Path(str(spec)[5:] if str(spec).startswith("file:") else spec)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read game file {path}: {exc}") from None
        return parse_game_file(text)
    return make_builtin(spec)


def game_category(tree: GameTree) -> str:
    return getattr(tree, "category", "custom")
