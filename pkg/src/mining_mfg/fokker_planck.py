"""Forward transport of the wealth density under the optimal control.

Each step solves, implicitly,

    d_t m - d_x(c alpha m) + lam(alpha(x)) m(x) - lam(alpha(x-p)) m(x-p) = 0

with a conservative (flux-form) upwind drift: the drift velocity -c*alpha
is nonpositive, so the interface flux takes the donor cell on the right
and the drift part of the matrix is bidiagonal.  Both jump terms (outflow
at x, inflow at x+p) are taken at the same, new time level, which pairs
them exactly: summed over the grid they telescope, so the update conserves
mass to rounding error, the only losses being the drift flux through x_min
and jumps landing above x_max.  The matrix is an M-matrix, so the density
stays nonnegative unconditionally, including under the very large
transient hash rates of early equilibrium iterations.

Nodes with x < p receive no inflow (nobody below zero wealth can jump to
them); the node at exactly x = p takes its inflow from x = 0, which
carries zero hash rate under the ruin constraint, so the two natural
conventions for that node coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .hjb import ControlSurface
from .params import GridSpec, ModelParams

#: hard bound on |mass - 1| for strict runs
MASS_TOL = 1e-6


class MassConservationError(RuntimeError):
    """The density row drifted away from unit mass beyond MASS_TOL."""


@dataclass(frozen=True)
class DensitySurface:
    grid: GridSpec
    m: np.ndarray            # shape (n_t + 1, n_x), nonnegative
    mass_error: np.ndarray   # |mass - 1| per time level


def total_mass(m_row: np.ndarray, grid: GridSpec) -> float:
    """Rectangle-rule integral of a density row."""
    return float(np.sum(m_row) * grid.dx)


def fp_forward_step(
    m_row: np.ndarray,
    control_row: np.ndarray,
    mean_alpha_t: float,
    beta_t: float,
    params: ModelParams,
    grid: GridSpec,
    strict: bool = True,
) -> np.ndarray:
    """Advance the density one time step under the given control row."""
    m_row = np.asarray(m_row, dtype=float)
    alpha = np.asarray(control_row, dtype=float)
    S = params.M * mean_alpha_t + beta_t
    m_next = _k.fp_step_k(
        m_row, alpha, S, params.D, params.c, grid.dt, grid.dx, grid.jump_nodes
    )
    if strict:
        err = abs(total_mass(m_next, grid) - 1.0)
        if err > MASS_TOL:
            raise MassConservationError(f"|mass - 1| = {err:.3e} after a step")
    return m_next


def solve_fp(
    control: ControlSurface,
    mean_path: np.ndarray,
    beta_path: np.ndarray | None,
    m0_row: np.ndarray,
    params: ModelParams,
    grid: GridSpec,
    strict: bool = True,
) -> DensitySurface:
    """Forward sweep t0 -> T from the initial density.

    With ``strict`` the unit-mass invariant is enforced at every step;
    equilibrium iteration disables it for transient iterates and records
    the drift instead.
    """
    nt = grid.n_t
    mean_path = np.asarray(mean_path, dtype=float)
    if beta_path is None:
        beta_path = np.zeros(nt + 1)
    else:
        beta_path = np.asarray(beta_path, dtype=float)
    m0 = np.asarray(m0_row, dtype=float)
    m, err = _k.fp_sweep_k(
        control.alpha, mean_path, beta_path, m0,
        float(params.M), params.D, params.c, grid.dt, grid.dx, grid.jump_nodes,
    )
    if strict and err.max() > MASS_TOL:
        n = int(np.argmax(err > MASS_TOL))
        raise MassConservationError(
            f"|mass - 1| = {err[n]:.3e} at t = {grid.t[n]:g}"
        )
    return DensitySurface(grid=grid, m=m, mass_error=err)
