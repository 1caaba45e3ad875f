"""Bridges between raster samples and model tensors.

Channel ranges entering the models: mask in [-1, 1], height in [0, 1] (scaled
by the dataset's max height), SDF in [-1, 1] (scaled by the grid diagonal),
velocity targets in [-1, 1] (scaled by v_max).
"""

from __future__ import annotations

import numpy as np
import torch

from windcomfort.raster.grid import FieldGrid
from windcomfort.raster.ops import signed_distance


def pack_geometry(geometry: FieldGrid, h_max: float | None,
                  with_sdf: bool) -> np.ndarray:
    chans: list[np.ndarray] = []
    mask = geometry.channel("mask")
    chans.append(mask * 2.0 - 1.0)
    if "height" in geometry.channels:
        scale = h_max if h_max else max(float(geometry.channel("height").max()), 1.0)
        chans.append(geometry.channel("height") / scale)
    if with_sdf:
        sdf = signed_distance(geometry)
        chans.append(sdf.channel("sdf") / sdf.meta["sdf_scale"])
    return np.stack(chans).astype(np.float32)


def pack_flow(flow: FieldGrid, v_max: float) -> np.ndarray:
    return (flow.channel("velocity") * (2.0 / v_max) - 1.0)[None].astype(np.float32)


def unpack_flow(tensor: torch.Tensor, v_max: float, extent_m: float) -> FieldGrid:
    values = (tensor.detach().cpu().numpy()[0] + 1.0) * (v_max / 2.0)
    return FieldGrid(np.clip(values, 0.0, v_max).astype(np.float32),
                     ("velocity",), extent_m)


def geometry_tensor(geometry: FieldGrid, h_max: float | None,
                    with_sdf: bool) -> torch.Tensor:
    return torch.from_numpy(pack_geometry(geometry, h_max, with_sdf)).unsqueeze(0)


def flow_tensor(flow: FieldGrid, v_max: float) -> torch.Tensor:
    return torch.from_numpy(pack_flow(flow, v_max)).unsqueeze(0)
