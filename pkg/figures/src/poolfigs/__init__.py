"""Figures for the report CSVs: pair-delta heatmaps and per-ensemble
solved-set contribution diagrams."""

from .contributions import plot_contributions, region_counts
from .heatmap import HeatmapSpec, color_span, plot_heatmap
from .tables import EnsembleSets, PairTable, read_contribution_sets, read_pair_table

__all__ = [
    "EnsembleSets",
    "HeatmapSpec",
    "PairTable",
    "color_span",
    "plot_contributions",
    "plot_heatmap",
    "read_contribution_sets",
    "read_pair_table",
    "region_counts",
]
