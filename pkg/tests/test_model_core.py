import numpy as np
import pytest

from mining_mfg import (
    ConstraintKind,
    GridSpec,
    InitialDensitySpec,
    ModelParams,
    UtilityKind,
    UtilitySpec,
    build_initial_density,
    reward_intensity,
    utility_eval,
)

from conftest import baseline_exponential_params, baseline_power_params


class TestModelParams:
    def test_baseline_valid(self):
        p = baseline_power_params()
        assert p.M == 1000 and p.horizon == 90.0 and not p.has_advanced

    @pytest.mark.parametrize("bad", [
        dict(D=0.0), dict(p=-1.0), dict(c=0.0), dict(M=0), dict(gamma=0.0),
        dict(T=-1.0), dict(k_c=0.0), dict(k_c=1.5), dict(gamma=1.0),
    ])
    def test_invariants_rejected(self, bad):
        with pytest.raises(ValueError):
            baseline_power_params(**bad)

    def test_power_requires_ruin(self):
        with pytest.raises(ValueError):
            baseline_power_params(constraint_kind=ConstraintKind.UNCONSTRAINED)

    def test_advanced_cost(self):
        p = baseline_power_params(k_c=0.8)
        assert p.has_advanced and p.c1 == pytest.approx(1.6e-5)
        with pytest.raises(ValueError):
            baseline_power_params().c1


class TestUtility:
    def test_power_at_one(self):
        u = UtilitySpec(UtilityKind.POWER, 0.8)
        assert utility_eval(u, 1.0) == pytest.approx(5.0)  # 1/(1-0.8)

    def test_power_at_zero(self):
        u = UtilitySpec(UtilityKind.POWER, 0.8)
        assert utility_eval(u, 0.0) == 0.0

    def test_exponential_at_zero(self):
        u = UtilitySpec(UtilityKind.EXPONENTIAL, 0.8)
        assert utility_eval(u, 0.0) == pytest.approx(-1.25)  # -1/gamma

    def test_power_negative_rejected(self):
        u = UtilitySpec(UtilityKind.POWER, 0.8)
        with pytest.raises(ValueError):
            utility_eval(u, -0.1)

    @pytest.mark.parametrize("kind,gamma", [
        (UtilityKind.EXPONENTIAL, 0.8), (UtilityKind.EXPONENTIAL, 2.5),
        (UtilityKind.POWER, 0.8), (UtilityKind.POWER, 3.0),
    ])
    def test_increasing_and_concave(self, kind, gamma):
        u = UtilitySpec(kind, gamma)
        x = np.linspace(0.01, 200.0, 500)
        vals = utility_eval(u, x)
        assert np.all(np.diff(vals) > 0)
        assert np.all(np.diff(vals, 2) < 1e-12)

    def test_power_marginal_diverges_at_zero(self):
        u = UtilitySpec(UtilityKind.POWER, 0.8)
        h = np.array([1e-2, 1e-4, 1e-6])
        marginal = utility_eval(u, h) / h
        assert np.all(np.diff(marginal) > 0) and marginal[-1] > 1e3


class TestRewardIntensity:
    def test_symmetric_value(self):
        # alpha = mean, beta = 0: 1/(D(1+M)) = 1/(0.007*1001)
        p = baseline_exponential_params()
        lam = reward_intensity(5000.0, 5000.0, 0.0, p)
        assert lam == pytest.approx(0.1427144284287141, rel=1e-12)

    def test_zero_alpha(self):
        assert reward_intensity(0.0, 100.0, 0.0, baseline_exponential_params()) == 0.0

    def test_all_zero_defined(self):
        assert reward_intensity(0.0, 0.0, 0.0, baseline_exponential_params()) == 0.0

    def test_large_alpha_limit(self):
        p = baseline_exponential_params()
        lam = reward_intensity(1e15, 1.0, 0.0, p)
        assert lam == pytest.approx(1.0 / p.D, rel=1e-9)

    def test_monotonicity(self):
        p = baseline_exponential_params()
        a = np.linspace(0.0, 1e5, 50)
        lam = reward_intensity(a, 50.0, 0.0, p)
        assert np.all(np.diff(lam) > 0)
        assert reward_intensity(100.0, 60.0, 0.0, p) < reward_intensity(100.0, 50.0, 0.0, p)
        assert reward_intensity(100.0, 50.0, 10.0, p) < reward_intensity(100.0, 50.0, 0.0, p)

    def test_system_rate_identity(self):
        # symmetric profile: (M+1) * lambda * D = 1 to machine precision
        for M in (1, 10, 1000, 10000):
            p = baseline_exponential_params(M=M)
            lam = reward_intensity(777.7, 777.7, 0.0, p)
            assert (M + 1) * lam * p.D == pytest.approx(1.0, rel=1e-13)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            reward_intensity(-1.0, 1.0, 0.0, baseline_exponential_params())


class TestGridSpec:
    def test_baseline_grid(self):
        params = baseline_power_params()
        g = GridSpec.build(params, 0.0, 300.0, 0.25, 0.05)
        assert g.jump_nodes == 12 and g.n_x == 1201 and g.n_t == 1800
        assert g.x[0] == 0.0 and g.x[-1] == pytest.approx(300.0)
        assert g.t[-1] == pytest.approx(90.0)

    def test_jump_multiple_enforced(self):
        params = baseline_power_params()
        with pytest.raises(ValueError):
            GridSpec.build(params, 0.0, 300.0, 0.26, 0.05)

    def test_span_buffer_enforced(self):
        params = baseline_power_params()
        with pytest.raises(ValueError):
            GridSpec.build(params, 0.0, 8.0, 0.25, 0.05)

    def test_dt_divides_horizon(self):
        params = baseline_power_params()
        with pytest.raises(ValueError):
            GridSpec.build(params, 0.0, 300.0, 0.25, 0.07)

    def test_ruin_needs_zero_origin(self):
        params = baseline_power_params()
        with pytest.raises(ValueError):
            GridSpec.build(params, 10.0, 300.0, 0.25, 0.05)

    def test_time_index(self):
        g = GridSpec.build(baseline_power_params(), 0.0, 300.0, 0.25, 0.05)
        assert g.time_index(30.0) == 600
        with pytest.raises(ValueError):
            g.time_index(91.0)


class TestInitialDensity:
    def test_baseline_mass_and_peak(self):
        params = baseline_power_params()
        grid = GridSpec.build(params, 0.0, 300.0, 0.25, 0.05)
        m = build_initial_density(InitialDensitySpec(90.0, 5.0), grid)
        assert np.all(m >= 0)
        assert m.sum() * grid.dx == pytest.approx(1.0, abs=1e-12)
        assert grid.x[m.argmax()] == pytest.approx(90.0)
        # Gaussian peak value 1/(5 sqrt(2 pi)); truncation negligible
        assert m.max() == pytest.approx(0.07978845608028654, rel=1e-6)

    def test_sd_must_be_positive(self):
        with pytest.raises(ValueError):
            InitialDensitySpec(90.0, 0.0)

    def test_mass_outside_grid_rejected(self):
        params = baseline_power_params()
        grid = GridSpec.build(params, 0.0, 12.0, 0.25, 0.05)
        with pytest.raises(ValueError):
            build_initial_density(InitialDensitySpec(90.0, 5.0), grid)

    def test_grid_refinement_invariance(self):
        params = baseline_power_params()
        spec = InitialDensitySpec(90.0, 5.0)
        coarse = GridSpec.build(params, 0.0, 300.0, 0.25, 0.05)
        fine = GridSpec.build(params, 0.0, 300.0, 0.125, 0.05)
        mc = build_initial_density(spec, coarse)
        mf = build_initial_density(spec, fine)
        assert abs(mf.sum() * fine.dx - mc.sum() * coarse.dx) < 1e-10
        # pointwise agreement at shared nodes is O(dx^2)
        assert np.abs(mf[::2] - mc).max() < 4 * coarse.dx ** 2
