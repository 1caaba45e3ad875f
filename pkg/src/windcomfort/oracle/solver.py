"""Desk-scale steady-flow solver producing velocity-magnitude rasters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from windcomfort.errors import Diverged
from windcomfort.oracle.backend import backend_name, kernel
from windcomfort.raster.grid import FieldGrid


@dataclass
class SolverConfig:
    grid: int = 128
    tau: float = 0.8
    u_in: float = 0.08
    max_steps: int = 20000
    tol: float = 1e-6
    check_every: int = 100
    v_ref: float = 5.0
    # Brinkman-style halo drag: damp = 1 / (1 + height_drag * height_m),
    # applied in a one-cell ring around solid cells (height channel present).
    height_drag: float = 0.02

    def __post_init__(self):
        if self.tau <= 0.5:
            raise ValueError(f"tau must exceed 0.5 for stability, got {self.tau}")
        if not 0.0 < self.u_in < 0.2:
            raise ValueError(f"u_in must stay below 0.2, got {self.u_in}")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.grid < 16:
            raise ValueError("grid must be at least 16 cells")
        if self.v_ref <= 0:
            raise ValueError("v_ref must be positive")


def _damp_field(grid: FieldGrid, cfg: SolverConfig, solid: np.ndarray) -> np.ndarray:
    damp = np.ones(solid.shape, dtype=np.float64)
    if "height" not in grid.channels:
        return damp
    height = grid.channel("height").astype(np.float64)
    halo = ndimage.binary_dilation(solid.astype(bool)) & ~solid.astype(bool)
    # Each halo cell feels the tallest adjacent building.
    nbr_height = ndimage.grey_dilation(height, size=(3, 3))
    damp[halo] = 1.0 / (1.0 + cfg.height_drag * nbr_height[halo])
    return damp


def solve(grid: FieldGrid, cfg: SolverConfig) -> FieldGrid:
    """Steady velocity magnitude (m/s) for a binary mask, inlet on the left.

    Runs collide-stream cycles until the velocity field's relative change per
    ``check_every`` steps drops below ``tol`` or ``max_steps`` is reached (the
    latter flags ``meta['converged'] = False``). Solid cells are exactly zero.
    """
    if grid.h != grid.w:
        raise ValueError("solver requires a square grid")
    mask = grid.channel("mask")
    solid = (mask > 0.5).astype(np.uint8)
    damp = _damp_field(grid, cfg, solid)

    f = kernel.init_state(grid.h, cfg.u_in)
    prev = None
    steps_done = 0
    converged = False
    while steps_done < cfg.max_steps:
        chunk = min(cfg.check_every, cfg.max_steps - steps_done)
        kernel.run(f, solid, damp, cfg.u_in, cfg.tau, chunk)
        steps_done += chunk
        _, ux, uy = kernel.macroscopics(f, solid)
        vmag = np.sqrt(ux * ux + uy * uy)
        if not np.all(np.isfinite(vmag)):
            raise Diverged(steps_done)
        if prev is not None:
            num = float(np.linalg.norm(vmag - prev))
            den = float(np.linalg.norm(vmag)) + 1e-30
            if num / den < cfg.tol:
                converged = True
                break
        prev = vmag
    _, ux, uy = kernel.macroscopics(f, solid)
    vmag = np.sqrt(ux * ux + uy * uy)
    rho, _, _ = kernel.macroscopics(f, solid)
    speed = (vmag * (cfg.v_ref / cfg.u_in)).astype(np.float32)
    speed[solid.astype(bool)] = 0.0
    return FieldGrid(
        speed, ("velocity",), grid.extent_m,
        {
            "converged": converged,
            "steps": steps_done,
            "backend": backend_name(),
            "total_density": float(rho.sum()),
        },
    )
