"""Command line entry point: score, select, report, all."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import RunConfig, apply_overrides, load_config
from .engine import Engine
from .errors import DataError, UsageError

__all__ = ["main", "cmd_score", "cmd_select", "cmd_report", "cmd_all"]


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; this pipeline reserves 2
    for data errors, so route usage problems through UsageError instead."""

    def error(self, message: str):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="codepool",
        description=(
            "Score, select and analyze candidate pools produced by ensembles "
            "of code models."
        ),
    )
    sub = parser.add_subparsers(dest="command", metavar="{score,select,report,all}")
    for name, help_text in (
        ("score", "compute per-candidate scores and similarity matrices"),
        ("select", "apply the selection strategies to the scored pools"),
        ("report", "emit the analysis CSVs from labels and selections"),
        ("all", "run score, select and report in order"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the YAML run config")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--jobs", type=int, help="worker processes (overrides the config)")
        p.add_argument(
            "--ensemble",
            action="append",
            metavar="NAME",
            help="restrict to this configured ensemble (repeatable)",
        )
        p.add_argument(
            "--metric",
            action="append",
            metavar="NAME",
            help="restrict to this configured metric (repeatable)",
        )
        p.add_argument(
            "--strategy",
            action="append",
            choices=["highest", "lowest", "diverse", "naive"],
            help="restrict to this strategy (repeatable; naive always runs)",
        )
    return parser


def cmd_score(config: RunConfig) -> None:
    Engine(config).cmd_score()


def cmd_select(config: RunConfig) -> None:
    Engine(config).cmd_select()


def cmd_report(config: RunConfig) -> None:
    Engine(config).cmd_report()


def cmd_all(config: RunConfig) -> None:
    Engine(config).cmd_all()


_COMMANDS = {
    "score": cmd_score,
    "select": cmd_select,
    "report": cmd_report,
    "all": cmd_all,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required (score, select, report, all)")
        config = load_config(args.config)
        config = apply_overrides(
            config,
            out=args.out,
            jobs=args.jobs,
            ensembles=args.ensemble,
            metrics=args.metric,
            strategies=args.strategy,
        )
        _COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
