"""Solved-set contribution diagrams: who adds what within an ensemble.

Ensembles of up to three models get counts-annotated set diagrams; four
or five get a membership matrix with one bar per non-empty overlap
region. Bigger rosters have no legible diagram and are rejected. Every
region annotation carries a stable SVG id of the form
``region:<ensemble>:<model>+<model>`` so rendered figures can be checked
mechanically.
"""

from __future__ import annotations

import itertools
from pathlib import Path
from typing import Union

from matplotlib.figure import Figure
from matplotlib.patches import Circle

from .errors import DataError
from .render import save
from .tables import EnsembleSets, read_contribution_sets

__all__ = ["region_counts", "plot_contributions", "MAX_MODELS"]

PathLike = Union[str, Path]

MAX_MODELS = 5

_PALETTE = ("#4477aa", "#ee6677", "#228833")

# fixed circle layouts; region counts go at the anchor points, keyed by
# the indices of the members owning the region
_LAYOUTS = {
    1: {
        "circles": [(0.0, 0.0)],
        "radius": 0.95,
        "regions": {(0,): (0.0, 0.0)},
        "names": [(0.0, 1.25)],
    },
    2: {
        "circles": [(-0.45, 0.0), (0.45, 0.0)],
        "radius": 0.95,
        "regions": {(0,): (-0.95, 0.0), (1,): (0.95, 0.0), (0, 1): (0.0, 0.0)},
        "names": [(-0.75, 1.25), (0.75, 1.25)],
    },
    3: {
        "circles": [(0.0, 0.5), (-0.45, -0.28), (0.45, -0.28)],
        "radius": 0.9,
        "regions": {
            (0,): (0.0, 0.95),
            (1,): (-0.85, -0.6),
            (2,): (0.85, -0.6),
            (0, 1): (-0.52, 0.22),
            (0, 2): (0.52, 0.22),
            (1, 2): (0.0, -0.62),
            (0, 1, 2): (0.0, 0.05),
        },
        "names": [(0.0, 1.65), (-1.2, -1.15), (1.2, -1.15)],
    },
}


def region_counts(solved: dict[str, frozenset[str]]) -> dict[frozenset[str], int]:
    """Size of every exclusive overlap region, keyed by the exact set of
    models whose region it is; all 2**m - 1 regions, zeros included."""
    labels = list(solved)
    out: dict[frozenset[str], int] = {}
    for r in range(1, len(labels) + 1):
        for combo in itertools.combinations(labels, r):
            inside = set(solved[combo[0]])
            for lab in combo[1:]:
                inside &= solved[lab]
            for lab in labels:
                if lab not in combo:
                    inside -= solved[lab]
            out[frozenset(combo)] = len(inside)
    return out


def _region_gid(ensemble: str, combo: frozenset[str]) -> str:
    return f"region:{ensemble}:" + "+".join(sorted(combo))


def _draw_venn(ax, ens: EnsembleSets) -> None:
    layout = _LAYOUTS[len(ens.members)]
    for pos, member, color in zip(layout["circles"], ens.members, _PALETTE):
        ax.add_patch(
            Circle(
                pos,
                layout["radius"],
                facecolor=color,
                alpha=0.3,
                edgecolor=color,
                linewidth=1.5,
            )
        )
    for (x, y), member in zip(layout["names"], ens.members):
        ax.text(
            x,
            y,
            f"{member} ({len(ens.solved[member])})",
            ha="center",
            va="center",
            fontsize=9,
        )
    counts = region_counts(ens.solved)
    for combo_idx, (x, y) in layout["regions"].items():
        combo = frozenset(ens.members[i] for i in combo_idx)
        ax.text(
            x,
            y,
            str(counts[combo]),
            ha="center",
            va="center",
            fontsize=11,
            gid=_region_gid(ens.name, combo),
        )
    ax.set_xlim(-1.8, 1.8)
    ax.set_ylim(-1.8, 2.0)
    ax.set_aspect("equal")
    ax.set_axis_off()
    ax.set_title(ens.name)


def _draw_membership(fig: Figure, cell, ens: EnsembleSets) -> None:
    """Bar-per-region membership matrix for rosters past Venn legibility."""
    counts = region_counts(ens.solved)
    regions = [(combo, cnt) for combo, cnt in counts.items() if cnt > 0]
    regions.sort(key=lambda item: (-item[1], sorted(item[0])))

    grid = cell.subgridspec(2, 1, height_ratios=(3.0, 1.4), hspace=0.08)
    ax_bar = fig.add_subplot(grid[0])
    ax_dot = fig.add_subplot(grid[1], sharex=ax_bar)

    for x, (combo, cnt) in enumerate(regions):
        ax_bar.bar(x, cnt, width=0.6, color=_PALETTE[0])
        ax_bar.text(
            x,
            cnt,
            str(cnt),
            ha="center",
            va="bottom",
            gid=_region_gid(ens.name, combo),
        )
    members = list(ens.members)
    for row, member in enumerate(members):
        for x, (combo, _) in enumerate(regions):
            ax_dot.plot(
                [x],
                [row],
                marker="o",
                markersize=6,
                linestyle="",
                color="#333333" if member in combo else "#cccccc",
            )
    if regions:
        ax_bar.set_xlim(-0.7, len(regions) - 0.3)
    else:
        ax_bar.text(0.5, 0.5, "no solved problems", ha="center", va="center",
                    transform=ax_bar.transAxes)
    ax_dot.set_yticks(range(len(members)), members, fontsize=8)
    ax_dot.set_ylim(len(members) - 0.5, -0.5)
    ax_bar.tick_params(labelbottom=False, length=0)
    ax_dot.set_xticks([])
    ax_dot.tick_params(length=0)
    for axis in (ax_bar, ax_dot):
        for side in ("top", "right", "bottom", "left"):
            axis.spines[side].set_visible(False)
    ax_bar.set_title(ens.name)


def plot_contributions(
    unique_csv: PathLike, solved_csv: PathLike, out_path: PathLike
) -> Path:
    ensembles = read_contribution_sets(unique_csv, solved_csv)
    for ens in ensembles:
        if len(ens.members) > MAX_MODELS:
            raise DataError(
                f"ensemble {ens.name!r} has {len(ens.members)} models; set "
                f"diagrams stay legible up to {MAX_MODELS}, split it into "
                "smaller ensembles"
            )
    n = len(ensembles)
    fig = Figure(figsize=(4.8 * n, 4.8))
    outer = fig.add_gridspec(1, n, wspace=0.25)
    for i, ens in enumerate(ensembles):
        if len(ens.members) <= 3:
            _draw_venn(fig.add_subplot(outer[0, i]), ens)
        else:
            _draw_membership(fig, outer[0, i], ens)
    return save(fig, out_path)
