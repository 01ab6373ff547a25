"""Built-in games, derived variants and the game-file format."""

from .goofspiel import goofspiel
from .parser import parse_game_file, write_game_file
from .poker import kuhn_poker, leduc_poker
from .registry import GameSpec, list_games, load_game, make_builtin
from .small import matching_pennies, matrix_game, tiny_hanabi

__all__ = [
    "GameSpec", "goofspiel", "kuhn_poker", "leduc_poker", "list_games", "load_game",
    "make_builtin", "matching_pennies", "matrix_game", "parse_game_file", "tiny_hanabi",
    "write_game_file",
]
