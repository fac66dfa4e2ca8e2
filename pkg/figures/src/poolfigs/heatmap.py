"""Pair-delta heatmaps over the unordered model pairs of a sweep table.

Every cell sits above the diagonal, carries its integer delta as a text
annotation, and is colored on a diverging scale centered at zero so that
losses against the baseline stand apart from gains.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from matplotlib import colormaps
from matplotlib.cm import ScalarMappable
from matplotlib.colors import Normalize, to_hex
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .render import save
from .tables import read_pair_table

__all__ = ["HeatmapSpec", "color_span", "plot_heatmap"]

_CMAP = "RdBu_r"


@dataclass(frozen=True)
class HeatmapSpec:
    """One render job: which pairs table, where to write, what to call it."""

    pairs_csv: Path
    out_path: Path
    title: Optional[str] = None


def color_span(deltas: Iterable[int]) -> float:
    """Symmetric color range; an all-zero table still gets a usable scale."""
    peak = max((abs(d) for d in deltas), default=0)
    return float(peak) if peak > 0 else 1.0


def plot_heatmap(spec: HeatmapSpec) -> Path:
    table = read_pair_table(spec.pairs_csv)
    labels = table.labels
    n = len(labels)
    at = {lab: i for i, lab in enumerate(labels)}
    span = color_span(table.deltas.values())
    norm = Normalize(vmin=-span, vmax=span)
    cmap = colormaps[_CMAP]

    fig = Figure(figsize=(1.0 * n + 3.2, 1.0 * n + 1.2))
    ax = fig.add_subplot()
    for (a, b), delta in table.deltas.items():
        row, col = at[a], at[b]  # a < b keeps the cell above the diagonal
        rgba = cmap(norm(delta))
        cell = Rectangle(
            (col - 0.5, row - 0.5),
            1.0,
            1.0,
            facecolor=to_hex(rgba),
            edgecolor="white",
            linewidth=1.0,
        )
        cell.set_gid(f"cellbg:{a}|{b}")
        ax.add_patch(cell)
        luminance = 0.299 * rgba[0] + 0.587 * rgba[1] + 0.114 * rgba[2]
        ax.text(
            col,
            row,
            str(delta),
            ha="center",
            va="center",
            color="white" if luminance < 0.5 else "black",
            gid=f"cell:{a}|{b}",
        )
    ax.set_xlim(-0.5, n - 0.5)
    ax.set_ylim(n - 0.5, -0.5)  # first label on top, matrix style
    ax.set_aspect("equal")
    ax.set_xticks(range(n), labels, rotation=45, ha="right")
    ax.set_yticks(range(n), labels)
    ax.tick_params(length=0)
    for side in ("top", "right", "bottom", "left"):
        ax.spines[side].set_visible(False)
    ax.set_title(spec.title if spec.title is not None else spec.pairs_csv.stem)
    fig.colorbar(
        ScalarMappable(norm=norm, cmap=cmap),
        ax=ax,
        shrink=0.8,
        label="solved-problem delta",
    )
    return save(fig, spec.out_path)
