"""Minimal deterministic SVG writers for grid-valued outputs."""

from __future__ import annotations

import numpy as np


def _gray(v: float) -> str:
    # v in [0, 1]; 0 -> white, 1 -> black
    level = int(round(255 * (1.0 - min(max(v, 0.0), 1.0))))
    return f"#{level:02x}{level:02x}{level:02x}"


def grayscale_grid_svg(values: np.ndarray, cell: int = 8, missing=None) -> str:
    """Render a 2-D array in [0, 1] as a grid of gray cells.

    ``missing`` is an optional boolean array marking cells drawn as crossed
    white squares instead of a gray level. Row 0 is drawn at the top.
    """
    values = np.asarray(values, dtype=float)
    ny, nx = values.shape
    w, h = nx * cell, ny * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">'
    ]
    for j in range(ny):
        for i in range(nx):
            x, y = i * cell, j * cell
            if missing is not None and missing[j, i]:
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                    f'fill="#ffffff" stroke="#999999" stroke-width="1"/>'
                )
                parts.append(
                    f'<line x1="{x}" y1="{y}" x2="{x + cell}" y2="{y + cell}" '
                    f'stroke="#999999" stroke-width="1"/>'
                )
            else:
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                    f'fill="{_gray(values[j, i])}"/>'
                )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
