"""Command line interface.

Subcommands:

- run: execute the experiment grid and write the results table,
- validate: check a configuration file without running anything,
- fetch-data: download and verify the benchmark tables.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import __version__
from .config import (
    CONDITIONS,
    OUTPUT_FORMATS,
    ExperimentConfig,
    load_config,
)
from .errors import ConfigError, DataError, FedtabError
from .experiment import emit_report, run_suite
from .fetch import fetch_all
from .models import MODEL_KINDS
from .schemas import DATASET_KEYS

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedtab",
        description="Federated vs centralized tabular classification benchmark",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment grid")
    run.add_argument("--config", help="YAML configuration file (defaults apply without one)")
    run.add_argument("--dataset", action="append", choices=DATASET_KEYS,
                     help="restrict to one dataset (repeatable)")
    run.add_argument("--model", action="append", choices=MODEL_KINDS,
                     help="restrict to one model (repeatable)")
    run.add_argument("--condition", action="append", choices=CONDITIONS,
                     help="restrict to one condition (repeatable)")
    run.add_argument("--seed", action="append", type=int, help="master seed (repeatable)")
    run.add_argument("--rounds", help="comma-separated round budgets, e.g. 2,4,6,8,10")
    run.add_argument("--clients", type=int, help="number of federated clients")
    run.add_argument("--flip-fraction", type=float, help="poisoned share of training labels")
    run.add_argument("--data-dir", help="directory holding the dataset files")
    run.add_argument("--output", help="where to write the results table")
    run.add_argument("--format", choices=OUTPUT_FORMATS, help="results table format")
    run.add_argument("--round-log", help="where to write the per-round JSONL log")
    run.add_argument("--quiet", action="store_true", help="suppress progress output")

    val = sub.add_parser("validate", help="validate a configuration file")
    val.add_argument("--config", required=True, help="YAML configuration file")

    fetch = sub.add_parser("fetch-data", help="download the benchmark tables")
    fetch.add_argument("--dest", default="data", help="target directory (default: data)")
    fetch.add_argument("--dataset", action="append", choices=DATASET_KEYS,
                       help="fetch only one table (repeatable)")
    fetch.add_argument("--sha256-a", help="pin the sha256 of the dataset A file")
    fetch.add_argument("--sha256-b", help="pin the sha256 of the dataset B file")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    from dataclasses import replace

    updates = {}
    if args.dataset:
        updates["datasets"] = tuple(dict.fromkeys(args.dataset))
    if args.model:
        updates["models"] = tuple(dict.fromkeys(args.model))
    if args.condition:
        updates["conditions"] = tuple(dict.fromkeys(args.condition))
    if args.seed:
        updates["seeds"] = tuple(args.seed)
    if args.rounds:
        try:
            updates["round_budgets"] = tuple(int(r) for r in args.rounds.split(","))
        except ValueError:
            raise ConfigError(f"--rounds must be comma-separated integers, got {args.rounds!r}")
    if args.clients is not None:
        updates["n_clients"] = args.clients
    if args.flip_fraction is not None:
        updates["flip_fraction"] = args.flip_fraction
    if args.data_dir:
        updates["data_dir"] = args.data_dir

    out = cfg.output
    out_updates = {}
    if args.output:
        out_updates["path"] = args.output
    if args.format:
        out_updates["format"] = args.format
    if args.round_log:
        out_updates["round_log"] = args.round_log
    if out_updates:
        updates["output"] = replace(out, **out_updates)
    return replace(cfg, **updates) if updates else cfg


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg = _apply_overrides(cfg, args)

    progress = None
    if not args.quiet:
        start = time.monotonic()

        def progress(cell: str) -> None:
            print(f"[{time.monotonic() - start:7.1f}s] {cell}", file=sys.stderr)

    table = run_suite(cfg, progress=progress)
    print(emit_report(table, "human"), end="")
    if cfg.output.path is not None:
        print(f"results written to {cfg.output.path}", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    load_config(args.config)
    print(f"{args.config}: OK")
    return EXIT_OK


def _cmd_fetch(args: argparse.Namespace) -> int:
    keys = tuple(dict.fromkeys(args.dataset)) if args.dataset else DATASET_KEYS
    pins = {}
    if args.sha256_a:
        pins["A"] = args.sha256_a
    if args.sha256_b:
        pins["B"] = args.sha256_b
    fetch_all(args.dest, keys, pins)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        return _cmd_fetch(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except FedtabError as err:
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as err:  # noqa: BLE001 - map any library failure to exit 3
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
