"""Command-line entry point.

Exit codes: 0 on success, 1 for configuration or game problems, 2 when a
solver or convex-family evaluator fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigurationError, DomainError, GameError, GameFileError, MirrorBenchError, SolverError
from .game.policy import JointPolicy, check_flat_policy
from .games.registry import load_game
from .harness import describe_game, list_games, load_config, run_experiment
from .measures import Measure

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mirrorbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment described by a YAML file")
    p_run.add_argument("--config", required=True, help="YAML experiment file")
    p_run.add_argument("--seed", type=int, default=None, help="override the configured seed")
    p_run.add_argument("--out", default="results", help="output directory (default: results)")

    sub.add_parser("list-games", help="print the built-in game names")

    p_desc = sub.add_parser("describe-game", help="print size statistics of a game")
    p_desc.add_argument("name", help="built-in game spec or path to a .game file")

    p_eval = sub.add_parser("eval", help="evaluate a stored joint policy")
    p_eval.add_argument("--game", required=True)
    p_eval.add_argument("--policy", required=True, help="JSON file: player -> infostate -> probabilities")
    p_eval.add_argument("--measure", default="nashconv")
    p_eval.add_argument("--reference-value", type=float, default=None)
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    records, csv_path, json_path = run_experiment(config, args.out)
    final = records[-1]
    print(f"{config.algorithm} on {config.game}: {final.measure_name}={final.measure_value:.6g} "
          f"after {final.iteration} iterations")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    tree = load_game(args.game)
    try:
        data = json.loads(Path(args.policy).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read policy file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"policy file is not valid JSON: {exc}") from None
    flat = JointPolicy.from_dict(data).to_flat(tree)
    check_flat_policy(tree, flat)
    measure = Measure(args.measure, args.reference_value).resolve(tree)
    print(f"{measure.kind}: {measure(tree, flat):.12g}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-games":
            print("\n".join(list_games()))
            return EXIT_OK
        if args.command == "describe-game":
            print(describe_game(args.name))
            return EXIT_OK
        return _cmd_eval(args)
    except (SolverError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigurationError, GameError, GameFileError, MirrorBenchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
