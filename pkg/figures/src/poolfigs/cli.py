"""Command line entry points, one per figure kind."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from .contributions import plot_contributions
from .errors import DataError, UsageError
from .heatmap import HeatmapSpec, plot_heatmap

__all__ = ["heatmap_main", "contributions_main"]


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; these scripts reserve 2
    for data errors, so route usage problems through UsageError instead."""

    def error(self, message: str):
        raise UsageError(message)


def _run(render: Callable[[], Path]) -> int:
    try:
        render()
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


def heatmap_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _Parser(
        prog="poolfigs-heatmap",
        description="Render a pair-sweep delta table as an annotated heatmap.",
    )
    parser.add_argument(
        "pairs_csv", type=Path, help="pairs_*.csv emitted by the report stage"
    )
    parser.add_argument(
        "out_path", type=Path, help="output image; .svg/.pdf vector, .png raster"
    )
    parser.add_argument("--title", help="figure title (default: the CSV stem)")

    def render() -> Path:
        args = parser.parse_args(argv)
        return plot_heatmap(HeatmapSpec(args.pairs_csv, args.out_path, args.title))

    return _run(render)


def contributions_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _Parser(
        prog="poolfigs-contributions",
        description=(
            "Render per-ensemble solved-set contribution diagrams from the "
            "unique-contributions and solved-sets tables."
        ),
    )
    parser.add_argument(
        "unique_csv", type=Path, help="unique.csv emitted by the report stage"
    )
    parser.add_argument(
        "solved_csv", type=Path, help="solved_sets.csv emitted by the report stage"
    )
    parser.add_argument(
        "out_path", type=Path, help="output image; .svg/.pdf vector, .png raster"
    )

    def render() -> Path:
        args = parser.parse_args(argv)
        return plot_contributions(args.unique_csv, args.solved_csv, args.out_path)

    return _run(render)


if __name__ == "__main__":
    sys.exit(heatmap_main())
