"""Derived quantities: profit curves, participation cutoffs, concentration
statistics, and the advanced miner's reward and profit shares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumResult
from .params import GridSpec, ModelParams, reward_intensity


def expected_instant_profit_row(
    control_row: np.ndarray,
    mean_alpha_t: float,
    beta_t: float,
    params: ModelParams,
) -> np.ndarray:
    """Expected instantaneous profit -c*alpha + (p/D) alpha/(alpha+M*abar+beta).

    Exactly zero wherever the hash rate is zero.
    """
    alpha = np.asarray(control_row, dtype=float)
    lam = reward_intensity(alpha, mean_alpha_t, beta_t, params)
    return -params.c * alpha + params.p * lam


def active_cutoff(control_row: np.ndarray, grid: GridSpec) -> float:
    """Largest x below which mining is blocked: the last node before the
    first active one (grid scan).  0 if the first node is already active;
    x_max if the whole row is blocked."""
    alpha = np.asarray(control_row)
    active = alpha > 0
    if active[0]:
        return 0.0
    if not active.any():
        return float(grid.x[-1])
    first = int(np.argmax(active))
    return float(grid.x[first - 1])


@dataclass(frozen=True)
class ConcentrationSeries:
    """Share of the population and of total instantaneous profits held by
    miners above a wealth threshold, over time."""

    t: np.ndarray
    proportion: np.ndarray
    profit_share: np.ndarray  # NaN where the total profit is not positive
    valid: np.ndarray


def concentration_series(
    result: EquilibriumResult, threshold: float, params: ModelParams
) -> ConcentrationSeries:
    """Population and profit shares above ``threshold``.

    Cells are assigned by node center, with no sub-cell interpolation: the
    node at exactly the threshold counts as below.  Time levels whose total
    profit is not positive get a NaN share and valid=False.
    """
    grid = result.control.grid
    above = grid.x > threshold
    nt = grid.n_t
    beta = result.beta_path if result.beta_path is not None else np.zeros(nt + 1)
    proportion = result.density.m[:, above].sum(axis=1) * grid.dx
    share = np.full(nt + 1, np.nan)
    valid = np.zeros(nt + 1, dtype=bool)
    for n in range(nt + 1):
        profit = expected_instant_profit_row(
            result.control.alpha[n], result.mean_path[n], beta[n], params
        )
        weighted = profit * result.density.m[n]
        total = float(weighted.sum() * grid.dx)
        if total > 1e-12 * float(np.abs(weighted).sum() * grid.dx) and total > 0:
            share[n] = float(weighted[above].sum() * grid.dx) / total
            valid[n] = True
    return ConcentrationSeries(
        t=grid.t, proportion=proportion, profit_share=share, valid=valid
    )


def advanced_shares(
    result: EquilibriumResult, params: ModelParams, t: float
) -> tuple[float, float]:
    """(reward share, profit share) of the advanced miner at time t.

    Reward share is beta/(beta + (M+1)*abar); profit share divides the
    advanced miner's instantaneous profit by the total over all M+2
    players, individual profits weighted by the wealth density.  Returns
    NaN for the profit share when the total is not positive.
    """
    if result.beta_path is None:
        raise ValueError("result has no advanced miner")
    grid = result.control.grid
    n = grid.time_index(t)
    abar = float(result.mean_path[n])
    beta = float(result.beta_path[n])
    M1 = params.M + 1
    reward_share = beta / (beta + M1 * abar)

    lam_adv = beta / (params.D * (beta + M1 * abar)) if beta > 0 else 0.0
    profit_adv = -params.c1 * beta + params.p * lam_adv
    profit_ind = expected_instant_profit_row(
        result.control.alpha[n], abar, beta, params
    )
    mean_ind = float((profit_ind * result.density.m[n]).sum() * grid.dx)
    total = profit_adv + M1 * mean_ind
    profit_share = profit_adv / total if total > 0 else float("nan")
    return reward_share, profit_share
