"""PNG rendering helpers (viridis heatmaps, comfort-class palettes)."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image


def viridis_rgb(values: np.ndarray, vmin: float = 0.0, vmax: float | None = None) -> np.ndarray:
    """Map a 2D array onto 8-bit viridis RGB."""
    from matplotlib import colormaps

    v = np.asarray(values, dtype=np.float64)
    if vmax is None:
        vmax = float(v.max()) or 1.0
    span = vmax - vmin if vmax > vmin else 1.0
    normed = np.clip((v - vmin) / span, 0.0, 1.0)
    rgba = colormaps["viridis"](normed)
    return (rgba[:, :, :3] * 255.0 + 0.5).astype(np.uint8)


def png_bytes(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_png(path: str | Path, values: np.ndarray, vmin: float = 0.0,
             vmax: float | None = None) -> None:
    Path(path).write_bytes(png_bytes(viridis_rgb(values, vmin, vmax)))


def indexed_png_bytes(indices: np.ndarray, palette: list[tuple[int, int, int]],
                      special: dict[int, tuple[int, int, int]] | None = None) -> bytes:
    """Render a small-integer class raster with a fixed color list.

    ``special`` maps sentinel values (buildings, no-data) to their colors.
    """
    h, w = indices.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    for k, color in enumerate(palette):
        rgb[indices == k] = color
    for value, color in (special or {}).items():
        rgb[indices == value] = color
    return png_bytes(rgb)
