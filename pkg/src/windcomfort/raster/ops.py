"""Raster operations: rasterization, positional channels, value transforms."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from windcomfort.errors import InvalidScene, OutOfRange, UnsupportedAngle
from windcomfort.raster.grid import FieldGrid, Scene

RANGE_TOL = 1e-6


def _points_in_polygon(px: np.ndarray, py: np.ndarray, poly) -> np.ndarray:
    """Even-odd rule over arrays of query points."""
    inside = np.zeros(px.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        crosses = (y0 > py) != (y1 > py)
        denom = np.where(crosses, y1 - y0, 1.0)
        xi = x0 + (py - y0) * (x1 - x0) / denom
        inside ^= crosses & (px < xi)
    return inside


def rasterize(scene: Scene, size: int, include_height: bool = False) -> FieldGrid:
    """Burn a scene into a binary occupancy mask (plus height when asked).

    A pixel is covered iff its center falls inside any footprint. The height
    channel holds building height in meters at covered pixels, 0 elsewhere.
    """
    scene.validate()
    if size < 8:
        raise InvalidScene(f"raster size must be >= 8, got {size}")
    step = scene.extent_m / size
    centers = (np.arange(size) + 0.5) * step
    px, py = np.meshgrid(centers, centers)  # py varies along rows
    mask = np.zeros((size, size), dtype=np.float32)
    height = np.zeros((size, size), dtype=np.float32)
    for b in scene.buildings:
        covered = _points_in_polygon(px, py, b.polygon)
        mask[covered] = 1.0
        height[covered] = np.maximum(height[covered], np.float32(b.height_m))
    if include_height:
        values = np.stack([mask, height], axis=2)
        return FieldGrid(values, ("mask", "height"), scene.extent_m)
    return FieldGrid(mask, ("mask",), scene.extent_m)


def grid_diagonal(h: int, w: int) -> float:
    """Longest possible pixel-center distance; the SDF normalization constant."""
    return float(np.hypot(h - 1, w - 1))


def boundary_pixels(mask: np.ndarray) -> np.ndarray:
    """Covered pixels 4-adjacent to an uncovered pixel (in-grid neighbors only)."""
    m = mask > 0.5
    if not m.any():
        return np.zeros_like(m)
    shrunk = ndimage.binary_erosion(m, structure=np.array(
        [[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool), border_value=1)
    return m & ~shrunk


def signed_distance(mask_grid: FieldGrid) -> FieldGrid:
    """Per-pixel Euclidean distance to the nearest object-boundary pixel.

    Positive outside, exactly 0 on boundary pixels, negative strictly inside.
    Distances are in pixel units; divide by ``meta['sdf_scale']`` (the grid
    diagonal) to reach the [-1, 1] model range. An all-empty mask yields the
    positive cap everywhere with ``meta['sdf_empty']`` set.
    """
    mask = mask_grid.channel("mask")
    cap = grid_diagonal(mask_grid.h, mask_grid.w)
    meta = {"sdf_scale": cap, "sdf_empty": False}
    inside = mask > 0.5
    if not inside.any():
        values = np.full(mask.shape, cap, dtype=np.float32)
        meta["sdf_empty"] = True
        return FieldGrid(values, ("sdf",), mask_grid.extent_m, meta)
    boundary = boundary_pixels(mask)
    dist = ndimage.distance_transform_edt(~boundary)
    sdf = np.where(inside, -dist, dist)
    sdf[boundary] = 0.0
    return FieldGrid(sdf.astype(np.float32), ("sdf",), mask_grid.extent_m, meta)


def coord_channels(h: int, w: int, extent_m: float = 0.0) -> FieldGrid:
    """Row/column index channels, each affinely normalized to [-1, 1].

    Degenerate axes (length 1) normalize to all zeros.
    """
    if h < 1 or w < 1:
        raise ValueError("coord_channels needs H, W >= 1")
    rows = np.arange(h, dtype=np.float32)
    cols = np.arange(w, dtype=np.float32)
    ci = 2.0 * rows / (h - 1) - 1.0 if h > 1 else np.zeros(1, dtype=np.float32)
    cj = 2.0 * cols / (w - 1) - 1.0 if w > 1 else np.zeros(1, dtype=np.float32)
    coord_i = np.broadcast_to(ci[:, None], (h, w))
    coord_j = np.broadcast_to(cj[None, :], (h, w))
    values = np.stack([coord_i, coord_j], axis=2).astype(np.float32)
    return FieldGrid(values, ("coord_i", "coord_j"), extent_m)


def bucketize(flow: FieldGrid, v_max: float, n_bins: int = 20) -> FieldGrid:
    """Quantize velocities onto the centers of n_bins uniform bins over [0, v_max]."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    v = flow.values
    if float(v.max(initial=0.0)) > v_max + RANGE_TOL:
        raise OutOfRange(f"value {v.max():.6g} exceeds v_max {v_max}")
    if float(v.min(initial=0.0)) < -RANGE_TOL:
        raise OutOfRange(f"negative velocity {v.min():.6g}")
    clipped = np.clip(v.astype(np.float64), 0.0, v_max)
    idx = np.minimum((clipped / v_max * n_bins).astype(np.int64), n_bins - 1)
    centers = (idx + 0.5) * (v_max / n_bins)
    return FieldGrid(centers.astype(np.float32), flow.channels, flow.extent_m,
                     dict(flow.meta))


def normalize(grid: FieldGrid, v_max: float) -> FieldGrid:
    """Affine [0, v_max] -> [-1, 1]."""
    values = (grid.values.astype(np.float64) * (2.0 / v_max) - 1.0)
    return FieldGrid(values.astype(np.float32), grid.channels, grid.extent_m,
                     dict(grid.meta))


def denormalize(grid: FieldGrid, v_max: float) -> FieldGrid:
    """Inverse of :func:`normalize`."""
    values = (grid.values.astype(np.float64) + 1.0) * (v_max / 2.0)
    return FieldGrid(values.astype(np.float32), grid.channels, grid.extent_m,
                     dict(grid.meta))


def _rotate45_ccw(values: np.ndarray, interp: str) -> np.ndarray:
    """Rotate HxWxC values 45 deg counterclockwise about the grid center.

    Inverse-mapped sampling; everything outside the inscribed circle of
    diameter min(H, W) is zero-filled.
    """
    h, w = values.shape[:2]
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    rr, cc = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dy = rr - cy
    dx = cc - cx
    # Screen-CCW by 45 deg means rotating sample coordinates the opposite way.
    # cos(45) == sin(45); using one constant keeps the map exactly symmetric
    # under 90-degree relabelings of the axes.
    ca = np.cos(np.pi / 4.0)
    sy = ca * (dy - dx) + cy
    sx = ca * (dx + dy) + cx
    radius = min(h, w) / 2.0
    valid = (dy * dy + dx * dx) <= radius * radius

    out = np.zeros_like(values)
    if interp == "nearest":
        ry = np.rint(sy).astype(np.int64)
        rx = np.rint(sx).astype(np.int64)
        ok = valid & (ry >= 0) & (ry < h) & (rx >= 0) & (rx < w)
        out[ok] = values[ry[ok], rx[ok]]
        return out
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    ty = (sy - y0)[:, :, None]
    tx = (sx - x0)[:, :, None]
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    v00 = values[y0c, x0c].astype(np.float64)
    v01 = values[y0c, x1c].astype(np.float64)
    v10 = values[y1c, x0c].astype(np.float64)
    v11 = values[y1c, x1c].astype(np.float64)
    interp_v = (v00 * (1.0 - ty) * (1.0 - tx) + v01 * (1.0 - ty) * tx
                + v10 * ty * (1.0 - tx) + v11 * ty * tx)
    in_grid = valid & (sy >= 0) & (sy <= h - 1) & (sx >= 0) & (sx <= w - 1)
    out[in_grid] = interp_v.astype(values.dtype)[in_grid]
    return out


def rotate_values(values: np.ndarray, angle_deg: int, interp: str = "bilinear") -> np.ndarray:
    """Rotate HxWxC values counterclockwise by a multiple of 45 degrees.

    Multiples of 90 are exact pixel permutations. Odd 45s additionally apply
    one interpolated 45-degree rotation and zero-fill outside the inscribed
    circle. Composition order (exact 90s first) makes rotate(a + 90) equal
    rot90(rotate(a)) bit for bit, which the comfort pipeline relies on.
    """
    if values.shape[0] != values.shape[1]:
        raise UnsupportedAngle("rotation requires a square grid")
    if interp not in ("bilinear", "nearest"):
        raise ValueError(f"unknown interp {interp!r}")
    if angle_deg % 45 != 0:
        raise UnsupportedAngle(f"angle {angle_deg} not on the 45-degree lattice")
    a = int(angle_deg) % 360
    k = a // 90
    rem = a % 90
    out = np.rot90(values, k, axes=(0, 1)) if k else values
    if rem:
        out = _rotate45_ccw(np.ascontiguousarray(out), interp)
    return np.ascontiguousarray(out)


def rotate_field(grid: FieldGrid, angle_deg: int, interp: str = "bilinear") -> FieldGrid:
    """Rotate a square grid counterclockwise; see :func:`rotate_values`."""
    return FieldGrid(rotate_values(grid.values, angle_deg, interp),
                     grid.channels, grid.extent_m, dict(grid.meta))
