"""Closed-form equilibria and moments for exponential utility.

These formulas serve both as standalone outputs and as oracles for the
numerical solver: the unconstrained exponential game has a constant
equilibrium hash rate, and the variant with a risk-neutral cost-advantaged
miner has an explicit two-rate equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import ModelParams, UtilityKind


class ConditionViolated(ValueError):
    """A closed-form precondition (e.g. the cost-efficiency bound) fails."""


def _check_exponential(params: ModelParams) -> None:
    if params.utility_kind is not UtilityKind.EXPONENTIAL:
        raise ValueError("closed forms require exponential utility")


def reward_gain(params: ModelParams) -> float:
    """(1 - e^{-gamma p}) / gamma, the jump gain Delta_v / d_x v of the
    exponential ansatz; appears throughout the closed forms."""
    return -math.expm1(-params.gamma * params.p) / params.gamma


@dataclass(frozen=True)
class HomogeneousClosedForm:
    """Constant equilibrium of the unconstrained exponential game."""

    alpha_star: float     # constant equilibrium hash rate
    lam: float            # individual reward rate 1/(D(1+M))
    value_decay: float    # exponent coefficient of the value-function factor

    def value_factor(self, t: float, T: float) -> float:
        """Time factor of the value function v(t,x) = U(x) * factor."""
        return math.exp(-self.value_decay * (T - t))


def exponential_alpha_star(params: ModelParams) -> float:
    """Constant equilibrium hash rate M/(1+M)^2 * (1-e^{-gamma p})/(D c gamma).

    Also used (for any utility kind) as the magnitude scale of hash rates.
    """
    M = params.M
    return (M / (1.0 + M) ** 2) * reward_gain(params) / (params.D * params.c)


def exponential_equilibrium(params: ModelParams) -> HomogeneousClosedForm:
    _check_exponential(params)
    M = params.M
    alpha_star = exponential_alpha_star(params)
    lam = 1.0 / (params.D * (1.0 + M))
    decay = -math.expm1(-params.gamma * params.p) / (params.D * (1.0 + M) ** 2)
    cf = HomogeneousClosedForm(alpha_star=alpha_star, lam=lam, value_decay=decay)
    # miners never hash past 1/(c gamma (1+M) D)
    assert cf.alpha_star <= 1.0 / (params.c * params.gamma * (1.0 + M) * params.D)
    return cf


def wealth_moments(params: ModelParams, t: float) -> tuple[float, float]:
    """(mean, variance) of the wealth increment over elapsed time t in the
    homogeneous exponential equilibrium."""
    _check_exponential(params)
    if t < 0:
        raise ValueError("elapsed time must be nonnegative")
    M = params.M
    rate = t / (params.D * (1.0 + M))
    mean = (params.p - (M / (1.0 + M)) * reward_gain(params)) * rate
    var = params.p ** 2 * rate
    return mean, var


def prob_no_reward(params: ModelParams, t: float) -> float:
    """P[no reward over elapsed time t] = exp(-t / (D (1+M)))."""
    if t < 0:
        raise ValueError("elapsed time must be nonnegative")
    return math.exp(-t / (params.D * (1.0 + params.M)))


def social_cost(params: ModelParams) -> float:
    """Total cost rate (M+1) c alpha_star; always below 1/(D gamma)."""
    cost = (params.M + 1) * params.c * exponential_alpha_star(params)
    assert cost < social_cost_bound(params)
    return cost


def social_cost_bound(params: ModelParams) -> float:
    return 1.0 / (params.D * params.gamma)


@dataclass(frozen=True)
class AdvancedClosedForm:
    """Explicit equilibrium of the exponential game with an advanced miner.

    ``beta_positive`` is False when the cost-efficiency condition fails, in
    which case the advanced miner abstains and beta_star is reported as 0
    so that parameter sweeps stay total.
    """

    kappa1: float
    kappa2: float
    alpha_star: float
    beta_star: float
    rho: float
    beta_positive: bool


def cost_efficiency_bound(params: ModelParams) -> float:
    """Right-hand side of the activity condition on k_c: the advanced miner
    is active iff k_c < gamma p/(1-e^{-gamma p}) * (M+1)/M."""
    g = params.gamma * params.p
    return g / (-math.expm1(-g)) * (params.M + 1) / params.M


def _advanced_constants(params: ModelParams) -> AdvancedClosedForm:
    """Prop.-2 arithmetic without the utility-kind precondition; also used
    as a pure magnitude scale for non-exponential runs."""
    if params.k_c is None:
        raise ValueError("advanced closed form needs k_c")
    M = params.M
    kappa1 = reward_gain(params) / (params.D * params.c)
    kappa2 = (M + 1) * params.p / (params.D * params.c1)
    # rho inverts k_c = rho * gamma p / (1 - e^{-gamma p}) exactly, so that
    # kappa2 = (M+1) kappa1 / rho and the share identities are exact
    rho = params.k_c * reward_gain(params) / params.p
    active = params.k_c < cost_efficiency_bound(params)
    ssum = kappa1 + kappa2
    alpha_star = kappa1 ** 2 * kappa2 / ssum ** 2
    beta_star = kappa1 * kappa2 * (kappa2 - M * kappa1) / ssum ** 2
    if not active:
        beta_star = 0.0
    return AdvancedClosedForm(
        kappa1=kappa1,
        kappa2=kappa2,
        alpha_star=alpha_star,
        beta_star=beta_star,
        rho=rho,
        beta_positive=active,
    )


def advanced_alpha_scale(params: ModelParams) -> float:
    """Prop.-2 mean hash rate used as a magnitude scale, any utility kind."""
    return _advanced_constants(params).alpha_star


def advanced_equilibrium(params: ModelParams) -> AdvancedClosedForm:
    _check_exponential(params)
    return _advanced_constants(params)


def advanced_reward_share(params: ModelParams) -> float:
    """Probability that the advanced miner collects the next reward,
    beta*/(beta* + (M+1) alphabar*) = (kappa2 - M kappa1)/(kappa1 + kappa2)."""
    cf = advanced_equilibrium(params)
    if not cf.beta_positive:
        return 0.0
    return (cf.kappa2 - params.M * cf.kappa1) / (cf.kappa1 + cf.kappa2)


@dataclass(frozen=True)
class ProfitMoments:
    e_advanced: float
    var_advanced: float
    e_individual: float
    var_individual: float


def advanced_jump_rates(params: ModelParams) -> tuple[float, float]:
    """(individual, advanced) reward rates in the advanced equilibrium:
    rho/(D(M+1+rho)) and ((1-rho)M+1)/(D(M+1+rho))."""
    cf = advanced_equilibrium(params)
    if not cf.beta_positive:
        raise ConditionViolated("advanced miner inactive at this k_c")
    M, rho = params.M, cf.rho
    lam_ind = rho / (params.D * (M + 1 + rho))
    lam_adv = ((1 - rho) * M + 1) / (params.D * (M + 1 + rho))
    return lam_ind, lam_adv


def profit_moments(params: ModelParams, t: float) -> ProfitMoments:
    """Mean and variance of the running profits of the advanced miner and a
    representative individual over elapsed time t."""
    if t < 0:
        raise ValueError("elapsed time must be nonnegative")
    cf = advanced_equilibrium(params)
    if not cf.beta_positive:
        raise ConditionViolated("advanced miner inactive at this k_c")
    M, rho, p, D = params.M, cf.rho, params.p, params.D
    share = ((1 - rho) * M + 1) / (M + 1 + rho)
    e_adv = (p / D) * share ** 2 * t
    var_adv = p ** 2 * ((1 - rho) * M + 1) * t / (D * (M + 1 + rho))
    e_ind = (
        (p - (M + 1) / (M + 1 + rho) * reward_gain(params))
        * rho * t / (D * (M + 1 + rho))
    )
    var_ind = p ** 2 * rho * t / (D * (M + 1 + rho))
    return ProfitMoments(
        e_advanced=e_adv,
        var_advanced=var_adv,
        e_individual=e_ind,
        var_individual=var_ind,
    )
