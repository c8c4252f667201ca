import numpy as np
import pytest

from mining_mfg import (
    ConstraintKind,
    GridSpec,
    InitialDensitySpec,
    ModelParams,
    SolverConfig,
    UtilityKind,
    solve_equilibrium,
)

# Baseline parameters throughout: D=0.007, p=3, c=2e-5, gamma=0.8, T=90,
# M=1000, initial wealth N(90, 5).


def baseline_exponential_params(**overrides):
    kw = dict(
        D=0.007, p=3.0, c=2e-5, M=1000, gamma=0.8, t0=0.0, T=90.0,
        utility_kind=UtilityKind.EXPONENTIAL,
        constraint_kind=ConstraintKind.UNCONSTRAINED,
    )
    kw.update(overrides)
    return ModelParams(**kw)


def baseline_power_params(**overrides):
    kw = dict(
        D=0.007, p=3.0, c=2e-5, M=1000, gamma=0.8, t0=0.0, T=90.0,
        utility_kind=UtilityKind.POWER,
        constraint_kind=ConstraintKind.RUIN_AT_ZERO,
    )
    kw.update(overrides)
    return ModelParams(**kw)


BASELINE_INIT = InitialDensitySpec(mean=90.0, sd=5.0)


def exponential_grid(params, dx=0.25, dt=0.05, x_max=202.0):
    x_min = 90.0 - 10 * 5.0 - params.p
    return GridSpec.build(params, x_min, x_max, dx, dt)


def power_grid(params, dx=0.25, dt=0.05, x_max=300.0):
    return GridSpec.build(params, 0.0, x_max, dx, dt)


@pytest.fixture(scope="session")
def small_exponential_run():
    """Quick unconstrained exponential equilibrium at M=5 on a coarse grid."""
    params = baseline_exponential_params(M=5, T=6.0)
    grid = GridSpec.build(params, 37.0, 151.0, 0.75, 0.1)
    result = solve_equilibrium(params, grid, BASELINE_INIT, SolverConfig())
    return params, grid, result


@pytest.fixture(scope="session")
def small_power_run():
    """Quick ruin-at-zero power equilibrium on a coarse grid."""
    params = baseline_power_params(M=400, T=6.0)
    grid = GridSpec.build(params, 0.0, 400.0, 0.25, 0.1)
    result = solve_equilibrium(params, grid, BASELINE_INIT, SolverConfig())
    assert result.converged
    return params, grid, result
