"""Backward-in-time solve of the miner's HJB equation.

Scheme (per backward step, control frozen from the later time level):

* the jump gain lam(alpha) * (v(x+p) - v(x)) is evaluated explicitly from
  the later level; x+p is an exact index shift, with geometric extension
  above the top of the grid (a tangent-line extension sign-flips for
  exponential-utility profiles and poisons the top band, whereas the
  geometric ghost is exact there and second order for power utility),
* the transport term -c*alpha*d_x v is implicit with a one-sided (left)
  difference, giving a lower-bidiagonal M-matrix solved in one forward
  substitution, unconditionally stable for any hash-rate magnitude.

A plain one-sided difference over a coarse grid carries an O(dx) bias that
the thin activity margin of the control formula amplifies by a factor M+1,
so both the scheme and the control extraction use an exponentially fitted
derivative: the left difference scaled by z/expm1(z), where exp(-z) is the
local ratio of consecutive differences.  The fit is exact on exponential
profiles (hence on the closed-form equilibrium) and second order in
general, and using the same operator in the scheme and the extraction
keeps the discrete equilibrium self-consistent without active-set chatter
at the participation cutoff.

The actual stepping lives in compiled kernels (``_kernels``); this module
owns the contracts, validation, and error reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .closed_form import exponential_alpha_star
from .params import ConstraintKind, GridSpec, ModelParams, utility_eval


class NonMonotoneValueError(RuntimeError):
    """The value row lost monotonicity at an interior node (scheme failure)."""


#: admissible-control cap relative to the closed-form hash-rate scale, used
#: when the liquidity constraint does not bind ("A(x) sufficiently large")
CAP_SCALE = 1e6


def hash_rate_cap(params: ModelParams) -> float:
    return CAP_SCALE * exponential_alpha_star(params)


@dataclass(frozen=True)
class ValueSurface:
    grid: GridSpec
    values: np.ndarray  # shape (n_t + 1, n_x)


@dataclass(frozen=True)
class ControlSurface:
    grid: GridSpec
    alpha: np.ndarray  # shape (n_t + 1, n_x), nonnegative


def jump_difference(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """v(x+p) - v(x) via the exact index shift (geometric top extension)."""
    return _k.jump_difference_k(np.asarray(v, dtype=float), grid.jump_nodes)


def _is_ruin(params: ModelParams) -> bool:
    return params.constraint_kind is ConstraintKind.RUIN_AT_ZERO


def _check_S(mean_alpha_t: float, beta_t: float, params: ModelParams) -> float:
    S = params.M * mean_alpha_t + beta_t
    if S <= 0:
        raise ValueError("need M*mean_alpha + beta > 0 to evaluate the control")
    return S


def optimal_control_row(
    v_row: np.ndarray,
    mean_alpha_t: float,
    beta_t: float,
    params: ModelParams,
    grid: GridSpec,
    cap: float | None = None,
    strict: bool = True,
) -> np.ndarray:
    """Pointwise maximizer of the Hamiltonian given a value row.

    With S = M*mean_alpha + beta and K = (v(x+p)-v(x))/(D c d_x v), a node
    is active iff S < K, in which case alpha = min(-S + sqrt(S K), A(x)).
    Under the ruin constraint A(0) = 0, so alpha(t, 0) = 0.  Numerically
    flat nodes get zero hash rate; genuinely decreasing interior nodes
    raise NonMonotoneValueError (strict mode).
    """
    v = np.asarray(v_row, dtype=float)
    S = _check_S(mean_alpha_t, beta_t, params)
    d, weight, flat, bad = _k.fitted_slopes_k(v, grid.dx, grid.jump_nodes)
    if strict and bad >= 0:
        raise NonMonotoneValueError(
            f"value row decreases at node {bad} (x = {grid.x[bad]:g})"
        )
    dv = _k.jump_difference_k(v, grid.jump_nodes)
    if cap is None:
        cap = hash_rate_cap(params)
    return _k.control_k(v, d, flat, dv, S, params.D, params.c, cap, _is_ruin(params))


def hjb_backward_step(
    v_next_row: np.ndarray,
    control_row_from_next_time: np.ndarray,
    mean_alpha_t: float,
    beta_t: float,
    params: ModelParams,
    grid: GridSpec,
) -> np.ndarray:
    """One implicit backward step of the linearized HJB.

    Solves, per node, d_t v - c*alpha*d_x v + lam(alpha)*Delta v = 0 with
    the jump term explicit from ``v_next_row`` and the transport implicit;
    the ruin constraint pins v(t, 0) = U(0), otherwise the bottom node is
    closed with an exponential ghost taken from the later level.
    """
    v_next = np.asarray(v_next_row, dtype=float)
    alpha = np.asarray(control_row_from_next_time, dtype=float)
    S = _check_S(mean_alpha_t, beta_t, params)
    _, weight, _, _ = _k.fitted_slopes_k(v_next, grid.dx, grid.jump_nodes)
    dv = _k.jump_difference_k(v_next, grid.jump_nodes)
    return _k.hjb_step_k(
        v_next, dv, weight, alpha, S, S,
        params.D, params.c, grid.dt, grid.dx, _is_ruin(params),
    )


def solve_hjb(
    mean_path: np.ndarray,
    beta_path: np.ndarray | None,
    params: ModelParams,
    grid: GridSpec,
    cap: float | None = None,
    strict: bool = True,
) -> tuple[ValueSurface, ControlSurface]:
    """Full backward sweep from the terminal utility down to t0.

    ``mean_path`` (and ``beta_path`` when present) must be defined on all
    n_t + 1 time levels; the mean path must be strictly positive.  At T the
    control comes straight from the utility row, and each earlier level
    alternates one implicit step with a fresh control extraction.
    """
    mean_path = np.asarray(mean_path, dtype=float)
    nt = grid.n_t
    if mean_path.shape != (nt + 1,):
        raise ValueError(f"mean_path must have length {nt + 1}")
    if np.any(mean_path <= 0):
        raise ValueError("mean_path must be strictly positive at every time")
    if beta_path is None:
        beta_path = np.zeros(nt + 1)
    else:
        beta_path = np.asarray(beta_path, dtype=float)
        if beta_path.shape != (nt + 1,):
            raise ValueError(f"beta_path must have length {nt + 1}")
        if np.any(beta_path < 0):
            raise ValueError("beta_path must be nonnegative")
    if cap is None:
        cap = hash_rate_cap(params)

    U = utility_eval(params.utility(), grid.x)
    v, a, bad_n, bad_j = _k.hjb_sweep_k(
        U, mean_path, beta_path, float(params.M), params.D, params.c,
        grid.dt, grid.dx, grid.jump_nodes, cap, _is_ruin(params), strict,
    )
    if bad_n >= 0:
        raise NonMonotoneValueError(
            f"value row decreases at t = {grid.t[bad_n]:g}, "
            f"x = {grid.x[bad_j]:g}"
        )
    return ValueSurface(grid, v), ControlSurface(grid, a)
