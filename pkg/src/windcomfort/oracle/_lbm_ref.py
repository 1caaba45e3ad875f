"""Pure-NumPy D2Q9 stepping kernel.

Fallback used when the compiled extension is unavailable. Every arithmetic
expression mirrors the Cython kernel operation for operation (same order,
float64, no reassociation) so both backends produce bit-identical fields.

Lattice directions (cy = row delta, cx = column delta):

    0:( 0, 0)  1:( 0,+1)  2:(+1, 0)  3:( 0,-1)  4:(-1, 0)
    5:(+1,+1)  6:(+1,-1)  7:(-1,-1)  8:(-1,+1)

Inlet: left column, imposed equilibrium at rho=1, u=(u_in, 0).
Outlet: right column, zero-gradient copy.
Top/bottom rows: free-slip (specular reflection).
Solid cells: full-way bounce-back (reflect instead of collide).
"""

from __future__ import annotations

import numpy as np

CX = (0, 1, 0, -1, 0, 1, -1, -1, 1)
CY = (0, 0, 1, 0, -1, 1, 1, -1, -1)
W = (4.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0,
     1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0, 1.0 / 36.0)
OPP = (0, 3, 4, 1, 2, 7, 8, 5, 6)

# Vertical mirror (cy -> -cy): used by the free-slip walls.
MIRROR_Y = (0, 1, 4, 3, 2, 8, 7, 6, 5)

BACKEND = "python"


def equilibrium_inlet(u_in: float) -> np.ndarray:
    """f_eq at rho=1, u=(u_in, 0) for all 9 directions."""
    out = np.empty(9, dtype=np.float64)
    usq = u_in * u_in
    for i in range(9):
        cu = CX[i] * u_in
        out[i] = W[i] * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
    return out


def init_state(n: int, u_in: float) -> np.ndarray:
    """Distributions at uniform equilibrium (the empty-domain fixed point)."""
    feq = equilibrium_inlet(u_in)
    f = np.empty((9, n, n), dtype=np.float64)
    for i in range(9):
        f[i].fill(feq[i])
    return f


def macroscopics(f: np.ndarray, solid: np.ndarray):
    """Density everywhere; velocity zeroed on solid cells."""
    rho = ((((((((f[0] + f[1]) + f[2]) + f[3]) + f[4]) + f[5]) + f[6]) + f[7]) + f[8])
    ux = (((((f[1] + f[5]) + f[8]) - f[3]) - f[6]) - f[7]) / rho
    uy = (((((f[2] + f[5]) + f[6]) - f[4]) - f[7]) - f[8]) / rho
    ux = np.where(solid, 0.0, ux)
    uy = np.where(solid, 0.0, uy)
    return rho, ux, uy


def run(f: np.ndarray, solid: np.ndarray, damp: np.ndarray, u_in: float,
        tau: float, steps: int) -> None:
    """Advance `steps` collide-stream cycles in place."""
    omega = 1.0 / tau
    feq_in = equilibrium_inlet(u_in)
    n = f.shape[1]
    post = np.empty_like(f)
    for _ in range(steps):
        rho, ux, uy = macroscopics(f, solid)
        ux = ux * damp
        uy = uy * damp
        usq = ux * ux + uy * uy
        for i in range(9):
            cu = CX[i] * ux + CY[i] * uy
            feq = W[i] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
            post[i] = np.where(solid, f[OPP[i]], f[i] + omega * (feq - f[i]))
        # Streaming: periodic shift, then boundary fixes overwrite the wraps.
        for i in range(9):
            f[i] = np.roll(post[i], shift=(CY[i], CX[i]), axis=(0, 1))
        # Free-slip walls: reflected populations keep their tangential motion.
        f[2][0, :] = post[4][0, :]
        f[5][0, :] = np.roll(post[8][0, :], 1)
        f[6][0, :] = np.roll(post[7][0, :], -1)
        f[4][n - 1, :] = post[2][n - 1, :]
        f[8][n - 1, :] = np.roll(post[5][n - 1, :], 1)
        f[7][n - 1, :] = np.roll(post[6][n - 1, :], -1)
        # Outlet: zero-gradient copy of the second-to-last column.
        f[:, :, n - 1] = f[:, :, n - 2]
        # Inlet: imposed equilibrium.
        for i in range(9):
            f[i][:, 0] = feq_in[i]
