"""Damped fixed-point iteration for the equilibrium mean-hash path.

Each outer iteration recomputes the advanced miner's best response (when
present), solves the HJB backward, transports the density forward, and
integrates alpha*m to get the implied mean path.  The update is the inertia
scheme abar <- w*abar + (1-w)*integral, with w defaulting to 1 - 1/M: the
Picard map expands roughly like -M/2 around the fixed point, and this
choice contracts it to about 1/2.

Convergence is measured on the undamped residual (computed vs. current
path) so that heavy damping cannot fake convergence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .advanced import best_response_beta
from .closed_form import advanced_alpha_scale, exponential_alpha_star
from .fokker_planck import DensitySurface, solve_fp
from .hjb import ControlSurface, ValueSurface, solve_hjb
from .params import GridSpec, InitialDensitySpec, ModelParams, build_initial_density

#: relative floor (times the closed-form hash-rate scale) keeping mean paths
#: strictly positive, the standing assumption of the model
EPS_ALPHA_REL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-4
    max_iters: int = 500
    inertia_w: float | None = None      # default 1 - 1/M
    eps_alpha: float | None = None      # default EPS_ALPHA_REL * scale
    seed_path: float | None = None      # constant override; default closed form
    validate_final: bool = True         # strict re-solve of converged surfaces

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.inertia_w is not None and not 0 <= self.inertia_w < 1:
            raise ValueError("inertia_w must lie in [0, 1)")


@dataclass(frozen=True)
class EquilibriumResult:
    mean_path: np.ndarray
    beta_path: np.ndarray | None
    value: ValueSurface
    control: ControlSurface
    density: DensitySurface
    iterations: int
    final_residual: float
    converged: bool
    residual_history: np.ndarray = field(repr=False, default=None)
    mass_error_history: np.ndarray = field(repr=False, default=None)

    @property
    def max_mass_error(self) -> float:
        return float(self.density.mass_error.max())


def hash_scale(params: ModelParams) -> float:
    """Magnitude scale of equilibrium hash rates: the closed-form constant
    of the matching exponential game (with the advanced miner if present)."""
    if params.has_advanced:
        return advanced_alpha_scale(params)
    return exponential_alpha_star(params)


def mean_hash_from(control_row: np.ndarray, density_row: np.ndarray, grid: GridSpec) -> float:
    """Rectangle-rule integral of alpha * m over the grid."""
    return float(np.dot(control_row, density_row) * grid.dx)


def damped_update(
    old_path: np.ndarray, computed_path: np.ndarray, w: float, eps_alpha: float
) -> np.ndarray:
    """Pointwise inertia update, floored to keep the path strictly positive."""
    if old_path.shape != computed_path.shape:
        raise ValueError("paths must have equal length")
    new = w * old_path + (1.0 - w) * computed_path
    return np.maximum(new, eps_alpha)


def convergence_metric(
    old_path: np.ndarray, computed_path: np.ndarray, eps_alpha: float
) -> float:
    """Relative sup-norm of the undamped residual, independent of w."""
    return float(
        np.max(np.abs(computed_path - old_path) / (np.abs(old_path) + eps_alpha))
    )


def solve_equilibrium(
    params: ModelParams,
    grid: GridSpec,
    init: InitialDensitySpec,
    config: SolverConfig = SolverConfig(),
) -> EquilibriumResult:
    """Iterate HJB / Fokker-Planck / mean-hash integration to a fixed point.

    Non-convergence is a result state (converged=False, last iterate
    returned), not an exception, so parameter sweeps record partial
    outcomes.  The advanced miner's best response is recomputed from the
    current mean path at the start of every iteration.
    """
    nt = grid.n_t
    scale = hash_scale(params)
    eps_alpha = config.eps_alpha if config.eps_alpha is not None else EPS_ALPHA_REL * scale
    w = config.inertia_w if config.inertia_w is not None else 1.0 - 1.0 / params.M
    seed = config.seed_path if config.seed_path is not None else scale
    if seed <= 0:
        raise ValueError("seed path value must be positive")

    m0 = build_initial_density(init, grid)
    abar = np.full(nt + 1, float(seed))
    residuals: list[float] = []
    mass_errs: list[float] = []
    beta = None
    converged = False

    for _ in range(config.max_iters):
        beta = best_response_beta(abar, params) if params.has_advanced else None
        value, control = solve_hjb(abar, beta, params, grid, strict=False)
        density = solve_fp(control, abar, beta, m0, params, grid, strict=False)
        computed = np.einsum("ij,ij->i", control.alpha, density.m) * grid.dx
        res = convergence_metric(abar, computed, eps_alpha)
        residuals.append(res)
        mass_errs.append(float(density.mass_error.max()))
        if res < config.tol:
            converged = True
            break
        if len(residuals) == config.max_iters:
            break  # keep abar paired with the surfaces computed from it
        abar = damped_update(abar, computed, w, eps_alpha)

    if converged and config.validate_final:
        # early iterates may wiggle; the surfaces handed back must pass the
        # strict monotonicity and unit-mass checks on the converged path
        value, control = solve_hjb(abar, beta, params, grid, strict=True)
        density = solve_fp(control, abar, beta, m0, params, grid, strict=True)

    return EquilibriumResult(
        mean_path=abar,
        beta_path=beta,
        value=value,
        control=control,
        density=density,
        iterations=len(residuals),
        final_residual=residuals[-1],
        converged=converged,
        residual_history=np.asarray(residuals),
        mass_error_history=np.asarray(mass_errs),
    )
