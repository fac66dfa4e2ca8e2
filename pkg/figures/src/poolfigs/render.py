"""Shared figure output handling."""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib
from matplotlib.figure import Figure

# text stays text and generated ids stay stable, so rendered SVGs are
# searchable and byte-reproducible
_RC = {"svg.fonttype": "none", "svg.hashsalt": "poolfigs"}


def save(fig: Figure, out_path: Union[str, Path]) -> Path:
    """Write the figure; the format follows the extension (.svg and .pdf
    are vector, .png and friends raster)."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {}
    if out_path.suffix.lower() in {".svg", ".svgz"}:
        kwargs["metadata"] = {"Date": None}  # drop the embedded timestamp
    with matplotlib.rc_context(_RC):
        fig.savefig(out_path, bbox_inches="tight", **kwargs)
    return out_path
