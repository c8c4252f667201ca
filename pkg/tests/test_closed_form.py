"""Closed-form formulas against high-precision oracle values.

Expected numbers were computed independently with mpmath at 40 digits from
the defining formulas and frozen here.
"""

import math

import numpy as np
import pytest

from mining_mfg import (
    advanced_equilibrium,
    advanced_reward_share,
    best_response_beta,
    exponential_equilibrium,
    profit_moments,
    prob_no_reward,
    social_cost,
    social_cost_bound,
    wealth_moments,
)
from mining_mfg.closed_form import advanced_jump_rates, cost_efficiency_bound

from conftest import baseline_exponential_params

BASE = baseline_exponential_params()
ADV = baseline_exponential_params(k_c=0.8)


class TestHomogeneous:
    def test_alpha_star_baseline(self):
        cf = exponential_equilibrium(BASE)
        assert cf.alpha_star == pytest.approx(8102.376846702850, rel=1e-12)

    def test_lambda_baseline(self):
        cf = exponential_equilibrium(BASE)
        assert cf.lam == pytest.approx(0.1427144284287141, rel=1e-12)

    def test_value_decay(self):
        cf = exponential_equilibrium(BASE)
        assert cf.value_decay == pytest.approx(1.2963802954724560e-4, rel=1e-12)
        assert cf.value_factor(BASE.T, BASE.T) == 1.0

    def test_zero_price_limit(self):
        cf = exponential_equilibrium(baseline_exponential_params(p=1e-12))
        assert cf.alpha_star == pytest.approx(0.0, abs=1e-6)

    def test_upper_bound(self):
        for M in (1, 10, 1000):
            params = baseline_exponential_params(M=M)
            cf = exponential_equilibrium(params)
            assert 0 < cf.alpha_star <= 1.0 / (params.c * params.gamma * (1 + M) * params.D)

    def test_requires_exponential(self):
        from conftest import baseline_power_params
        with pytest.raises(ValueError):
            exponential_equilibrium(baseline_power_params())

    def test_eq5_self_consistency(self):
        # plugging alpha_star back into the control formula with
        # Delta v / d_x v = (1 - e^{-gamma p})/gamma reproduces alpha_star
        rng = np.random.default_rng(7)
        for _ in range(50):
            params = baseline_exponential_params(
                D=float(rng.uniform(0.001, 0.05)),
                p=float(rng.uniform(0.5, 8.0)),
                c=float(rng.uniform(1e-6, 1e-3)),
                M=int(rng.integers(1, 5000)),
                gamma=float(rng.uniform(0.05, 4.0)),
            )
            a = exponential_equilibrium(params).alpha_star
            S = params.M * a
            K = -math.expm1(-params.gamma * params.p) / (
                params.gamma * params.D * params.c
            )
            assert -S + math.sqrt(S * K) == pytest.approx(a, rel=1e-10)


class TestRiskReward:
    def test_zero_time(self):
        assert wealth_moments(BASE, 0.0) == (0.0, 0.0)

    def test_variance_baseline(self):
        _, var = wealth_moments(BASE, 90.0)
        assert var == pytest.approx(115.59868702725846, rel=1e-12)

    def test_mean_baseline(self):
        mean, _ = wealth_moments(BASE, 90.0)
        assert mean == pytest.approx(23.948617351687688, rel=1e-12)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            wealth_moments(BASE, -1.0)

    def test_sandwich_randomized(self):
        # p t/(D(1+M)) > mean >= p t/(D(1+M)^2) >= 0 over random valid params
        rng = np.random.default_rng(11)
        for _ in range(100):
            params = baseline_exponential_params(
                D=float(rng.uniform(0.001, 0.1)),
                p=float(rng.uniform(0.1, 10.0)),
                gamma=float(rng.uniform(0.05, 5.0)),
                M=int(rng.integers(1, 10000)),
            )
            t = float(rng.uniform(0.1, 200.0))
            mean, _ = wealth_moments(params, t)
            hi = params.p * t / (params.D * (1 + params.M))
            lo = params.p * t / (params.D * (1 + params.M) ** 2)
            assert hi > mean >= lo >= 0.0

    def test_prob_no_reward(self):
        assert prob_no_reward(BASE, 0.0) == 1.0
        assert prob_no_reward(BASE, 90.0) == pytest.approx(2.641143584680713e-06, rel=1e-12)
        # increasing in M, approaching 1
        probs = [prob_no_reward(baseline_exponential_params(M=M), 90.0)
                 for M in (10, 100, 1000, 100000)]
        assert all(a < b for a, b in zip(probs, probs[1:]))
        assert probs[-1] > 0.98

    def test_social_cost(self):
        assert social_cost_bound(BASE) == pytest.approx(178.57142857142858, rel=1e-12)
        assert social_cost(BASE) == pytest.approx(162.20958447099106, rel=1e-12)
        assert social_cost(BASE) < social_cost_bound(BASE)
        for M in (1, 7, 300):
            params = baseline_exponential_params(M=M)
            assert social_cost(params) < social_cost_bound(params)
        tiny_p = baseline_exponential_params(p=1e-10)
        assert social_cost(tiny_p) < social_cost_bound(tiny_p)


class TestAdvanced:
    def test_kappas_baseline(self):
        cf = advanced_equilibrium(ADV)
        assert cf.kappa1 == pytest.approx(8118589.702773103, rel=1e-12)
        assert cf.kappa2 == pytest.approx(26812500000.0, rel=1e-12)
        assert cf.rho == pytest.approx(0.30309401557019583, rel=1e-12)

    def test_rates_baseline(self):
        cf = advanced_equilibrium(ADV)
        assert cf.beta_positive
        assert cf.alpha_star == pytest.approx(2456.749726308178, rel=1e-12)
        assert cf.beta_star == pytest.approx(5656925.733130051, rel=1e-12)

    def test_condition_boundary(self):
        assert cost_efficiency_bound(ADV) == pytest.approx(2.642084498083852, rel=1e-12)
        # infeasible k_c would need to exceed 1 here, so force it with a
        # tiny gamma*p where the bound approaches (M+1)/M
        params = baseline_exponential_params(M=1000, gamma=1e-6, k_c=1.0)
        assert cost_efficiency_bound(params) < 1.0 + 2e-3
        cf = advanced_equilibrium(params)
        assert not cf.beta_positive and cf.beta_star == 0.0
        assert advanced_reward_share(params) == 0.0

    def test_reward_share_baseline(self):
        assert advanced_reward_share(ADV) == pytest.approx(0.6969977308578573, rel=1e-12)

    def test_reward_share_rho_identity(self):
        # (kappa2 - M kappa1)/(kappa1 + kappa2) == ((1-rho)M + 1)/(M+1+rho)
        rng = np.random.default_rng(3)
        for _ in range(50):
            params = baseline_exponential_params(
                p=float(rng.uniform(0.5, 6.0)),
                gamma=float(rng.uniform(0.05, 2.0)),
                M=int(rng.integers(2, 5000)),
                k_c=float(rng.uniform(0.3, 1.0)),
            )
            cf = advanced_equilibrium(params)
            if not cf.beta_positive:
                continue
            lhs = advanced_reward_share(params)
            M, rho = params.M, cf.rho
            assert lhs == pytest.approx(((1 - rho) * M + 1) / (M + 1 + rho), rel=1e-10)
            # shares add to one exactly: individual collective share is the rest
            ind = (params.M + 1) * cf.alpha_star / (cf.beta_star + (params.M + 1) * cf.alpha_star)
            assert lhs + ind == pytest.approx(1.0, abs=1e-12)

    def test_near_risk_neutral_ten_percent(self):
        # k_c = 0.9 with gamma*p << 1: advanced share comes out near 10%
        params = baseline_exponential_params(gamma=0.01, k_c=0.9)
        assert advanced_reward_share(params) == pytest.approx(0.11415064596618042, rel=1e-12)
        assert abs(advanced_reward_share(params) - 0.1) < 0.02

    def test_share_rho_half(self):
        # rho = 0.5 at M = 1000: ((1-rho)M+1)/(M+1+rho) = 501/1001.5
        M, rho = 1000, 0.5
        assert ((1 - rho) * M + 1) / (M + 1 + rho) == pytest.approx(0.5002496255616575, rel=1e-12)

    def test_prop2_consistency(self):
        # alpha solves alpha = -(M alpha + beta) + sqrt(kappa1 (M alpha + beta))
        # with beta the best response, simultaneously
        cf = advanced_equilibrium(ADV)
        beta = best_response_beta(cf.alpha_star, ADV)
        assert beta == pytest.approx(cf.beta_star, rel=1e-10)
        S = ADV.M * cf.alpha_star + beta
        resid = -S + math.sqrt(cf.kappa1 * S) - cf.alpha_star
        assert abs(resid) / cf.alpha_star < 1e-10


class TestProfitMoments:
    def test_zero_time(self):
        pm = profit_moments(ADV, 0.0)
        assert pm.e_advanced == pm.var_advanced == pm.e_individual == pm.var_individual == 0.0

    def test_baseline_values(self):
        pm = profit_moments(ADV, 90.0)
        assert pm.e_advanced == pytest.approx(18738.225134524365, rel=1e-12)
        assert pm.var_advanced == pytest.approx(80652.594570694915, rel=1e-12)
        assert pm.e_individual == pytest.approx(7.253405319015842, rel=1e-12)
        assert pm.var_individual == pytest.approx(35.026664479111688, rel=1e-12)

    def test_jump_rates_baseline(self):
        lam_ind, lam_adv = advanced_jump_rates(ADV)
        assert lam_ind == pytest.approx(0.043242795653224306, rel=1e-12)
        assert lam_adv == pytest.approx(99.571104408265327, rel=1e-12)

    def test_moment_rate_consistency(self):
        # E and Var follow from the jump rates and the constant drifts
        cf = advanced_equilibrium(ADV)
        lam_ind, lam_adv = advanced_jump_rates(ADV)
        t = 37.0
        pm = profit_moments(ADV, t)
        assert pm.e_advanced == pytest.approx(
            (-ADV.c1 * cf.beta_star + ADV.p * lam_adv) * t, rel=1e-10)
        assert pm.var_advanced == pytest.approx(ADV.p ** 2 * lam_adv * t, rel=1e-10)
        assert pm.e_individual == pytest.approx(
            (-ADV.c * cf.alpha_star + ADV.p * lam_ind) * t, rel=1e-10)
        assert pm.var_individual == pytest.approx(ADV.p ** 2 * lam_ind * t, rel=1e-10)

    def test_monotone_in_cost(self):
        # individual moments increase with c1, advanced moments decrease
        lo = baseline_exponential_params(k_c=0.7)
        hi = baseline_exponential_params(k_c=0.9)
        pm_lo, pm_hi = profit_moments(lo, 90.0), profit_moments(hi, 90.0)
        assert pm_hi.e_individual > pm_lo.e_individual
        assert pm_hi.var_individual > pm_lo.var_individual
        assert pm_hi.e_advanced < pm_lo.e_advanced
        assert pm_hi.var_advanced < pm_lo.var_advanced

    def test_rho_zero_limit(self):
        params = baseline_exponential_params(k_c=1e-9)
        pm = profit_moments(params, 90.0)
        assert abs(pm.e_individual) < 1e-6 and pm.var_individual < 1e-6
