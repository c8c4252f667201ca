"""Mean field game solver for hash-rate competition among cryptocurrency miners."""

from .params import (
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
from .closed_form import (
    AdvancedClosedForm,
    ConditionViolated,
    HomogeneousClosedForm,
    advanced_equilibrium,
    advanced_reward_share,
    exponential_alpha_star,
    exponential_equilibrium,
    profit_moments,
    prob_no_reward,
    social_cost,
    social_cost_bound,
    wealth_moments,
)
from .hjb import (
    ControlSurface,
    NonMonotoneValueError,
    ValueSurface,
    hjb_backward_step,
    optimal_control_row,
    solve_hjb,
)
from .fokker_planck import (
    DensitySurface,
    MassConservationError,
    fp_forward_step,
    solve_fp,
    total_mass,
)
from .advanced import best_response_beta, foc_residual
from .equilibrium import (
    EquilibriumResult,
    SolverConfig,
    convergence_metric,
    damped_update,
    mean_hash_from,
    solve_equilibrium,
)
from .analytics import (
    ConcentrationSeries,
    active_cutoff,
    advanced_shares,
    concentration_series,
    expected_instant_profit_row,
)
from .simulate import (
    ConstantPolicy,
    SimulationStats,
    SurfacePolicy,
    simulate_homogeneous,
    simulate_with_advanced,
)
from .config import ConfigError, RunConfig, RunKind, parse_config

__version__ = "0.1.0"
