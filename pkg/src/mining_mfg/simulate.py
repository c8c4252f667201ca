"""Monte Carlo simulation of miners as controlled jump processes.

An independent statistical check on the closed-form moments and reward
shares.  The mean field is an exogenous, frozen path (validating the mean
field approximation itself, not a finite-population empirical mean).

Event generation: when the intensity is constant over the horizon the
reward count is drawn as a single Poisson variate (exact).  For a
control-surface policy the intensity is frozen over each solver time step
at the current state, and the per-step count is Poisson(lambda*dt) -
equal in law to exponential inter-arrival sampling for a piecewise
constant intensity, with an O(dt) freeze error from the state dependence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hjb import ControlSurface
from .params import ModelParams, reward_intensity


@dataclass(frozen=True)
class ConstantPolicy:
    """Constant hash rate; mean_alpha defaults to the same value
    (symmetric equilibrium)."""

    alpha: float
    mean_alpha: float | None = None

    def mean(self) -> float:
        return self.alpha if self.mean_alpha is None else self.mean_alpha


@dataclass(frozen=True)
class SurfacePolicy:
    """Lookup of alpha(t, x) on a solved control surface, with the
    equilibrium mean-hash path (and advanced path, if any) frozen."""

    control: ControlSurface
    mean_path: np.ndarray
    beta_path: np.ndarray | None = None


@dataclass(frozen=True)
class ClassStats:
    mean: float
    var: float
    se_mean: float
    se_var: float


@dataclass(frozen=True)
class SimulationStats:
    n_paths: int
    horizon: float
    mean_terminal_wealth: float
    var_terminal_wealth: float
    se_mean: float
    se_var: float
    frac_zero_rewards: float
    se_frac_zero: float
    reward_share_by_class: dict = field(default_factory=dict)
    se_reward_share: dict = field(default_factory=dict)
    profit_by_class: dict = field(default_factory=dict)


def _moments(x: np.ndarray) -> ClassStats:
    n = x.size
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    se_mean = float(np.sqrt(var / n))
    # SE of the sample variance from the fourth central moment
    m4 = float(((x - mean) ** 4).mean())
    se_var = float(np.sqrt(max(m4 - (n - 3) / (n - 1) * var ** 2, 0.0) / n))
    return ClassStats(mean=mean, var=var, se_mean=se_mean, se_var=se_var)


def _binomial_se(p_hat: float, n: int) -> float:
    return float(np.sqrt(p_hat * (1.0 - p_hat) / n))


def simulate_homogeneous(
    params: ModelParams,
    alpha_policy: ConstantPolicy | SurfacePolicy,
    n_paths: int,
    seed: int,
    x0: float = 0.0,
) -> SimulationStats:
    """Simulate terminal wealth increments of a representative miner.

    Bit-identical statistics for identical (params, policy, n_paths, seed).
    """
    if n_paths < 1:
        raise ValueError("need at least one path")
    rng = np.random.default_rng(seed)
    horizon = params.horizon

    if isinstance(alpha_policy, ConstantPolicy):
        lam = reward_intensity(alpha_policy.alpha, alpha_policy.mean(), 0.0, params)
        counts = rng.poisson(lam * horizon, n_paths)
        increments = -params.c * alpha_policy.alpha * horizon + params.p * counts
    else:
        grid = alpha_policy.control.grid
        beta = (
            alpha_policy.beta_path
            if alpha_policy.beta_path is not None
            else np.zeros(grid.n_t + 1)
        )
        x = np.full(n_paths, float(x0))
        counts = np.zeros(n_paths, dtype=np.int64)
        for n in range(grid.n_t):
            idx = np.clip(
                np.rint((x - grid.x_min) / grid.dx).astype(np.int64), 0, grid.n_x - 1
            )
            alpha = alpha_policy.control.alpha[n][idx]
            lam = reward_intensity(alpha, alpha_policy.mean_path[n], beta[n], params)
            k = rng.poisson(lam * grid.dt)
            x += -params.c * alpha * grid.dt + params.p * k
            counts += k
        increments = x - x0

    stats = _moments(increments.astype(float))
    frac0 = float(np.mean(counts == 0))
    return SimulationStats(
        n_paths=n_paths,
        horizon=horizon,
        mean_terminal_wealth=stats.mean,
        var_terminal_wealth=stats.var,
        se_mean=stats.se_mean,
        se_var=stats.se_var,
        frac_zero_rewards=frac0,
        se_frac_zero=_binomial_se(frac0, n_paths),
        reward_share_by_class={"individual": 1.0},
        se_reward_share={"individual": 0.0},
        profit_by_class={"individual": stats},
    )


def simulate_with_advanced(
    params: ModelParams,
    alpha_policy: ConstantPolicy,
    beta_policy: ConstantPolicy,
    n_paths: int,
    seed: int,
) -> SimulationStats:
    """Simulate profits of the two agent classes at constant rates.

    Individuals jump at alpha/(D(alpha + M*abar + beta)); the advanced
    miner at beta/(D(beta + (M+1)*abar)).  Reward shares use the ratio
    estimator total_advanced/(total_advanced + (M+1)*total_individual)
    with a delta-method standard error.
    """
    if n_paths < 1:
        raise ValueError("need at least one path")
    rng = np.random.default_rng(seed)
    horizon = params.horizon
    M1 = params.M + 1
    abar = alpha_policy.mean()
    beta = beta_policy.alpha

    lam_ind = reward_intensity(alpha_policy.alpha, abar, beta, params)
    lam_adv = beta / (params.D * (beta + M1 * abar)) if beta > 0 else 0.0

    n_ind = rng.poisson(lam_ind * horizon, n_paths)
    n_adv = rng.poisson(lam_adv * horizon, n_paths)
    y_ind = -params.c * alpha_policy.alpha * horizon + params.p * n_ind
    y_adv = -params.c1 * beta * horizon + params.p * n_adv

    ind = _moments(y_ind.astype(float))
    adv = _moments(y_adv.astype(float))

    a_mean, i_mean = float(n_adv.mean()), float(n_ind.mean())
    tot = a_mean + M1 * i_mean
    share_adv = a_mean / tot if tot > 0 else 0.0
    # delta method on share = A/(A + B), B = (M+1)*mean individual count
    var_a = float(n_adv.var(ddof=1)) / n_paths
    var_b = (M1 ** 2) * float(n_ind.var(ddof=1)) / n_paths
    b_mean = M1 * i_mean
    se_share = (
        float(np.sqrt(b_mean ** 2 * var_a + a_mean ** 2 * var_b) / tot ** 2)
        if tot > 0
        else 0.0
    )

    frac0 = float(np.mean(n_ind == 0))
    return SimulationStats(
        n_paths=n_paths,
        horizon=horizon,
        mean_terminal_wealth=ind.mean,
        var_terminal_wealth=ind.var,
        se_mean=ind.se_mean,
        se_var=ind.se_var,
        frac_zero_rewards=frac0,
        se_frac_zero=_binomial_se(frac0, n_paths),
        reward_share_by_class={"advanced": share_adv, "individual": 1.0 - share_adv},
        se_reward_share={"advanced": se_share, "individual": se_share},
        profit_by_class={"individual": ind, "advanced": adv},
    )
