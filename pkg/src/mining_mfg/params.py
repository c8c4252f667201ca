"""Model constants, utility functions, reward intensity, grids, and initial densities.

Every other module consumes these types.  All objects are immutable value
objects and all functions are pure, so they are safe to share across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class UtilityKind(enum.Enum):
    EXPONENTIAL = "exponential"
    POWER = "power"


class ConstraintKind(enum.Enum):
    UNCONSTRAINED = "unconstrained"
    RUIN_AT_ZERO = "ruin-at-zero"


@dataclass(frozen=True)
class ModelParams:
    """Scalar model constants of the mining game.

    D:      mean inter-reward time of the global reward clock (system-wide
            reward intensity is 1/D).
    p:      value of one mining reward.
    c:      electricity cost per unit hash rate per unit time.
    M:      number of competitors in the aggregate approximation (M+1 miners
            in total).
    gamma:  risk aversion (exponential: U(x) = -exp(-gamma*x)/gamma; power:
            U(x) = x**(1-gamma)/(1-gamma), gamma != 1).
    t0, T:  initial and terminal times.
    k_c:    relative cost efficiency of the advanced miner (c1 = k_c*c);
            None means there is no advanced miner in the game.  k_c = 1.0
            still means an advanced miner is present, at cost parity.
    """

    D: float
    p: float
    c: float
    M: int
    gamma: float
    t0: float = 0.0
    T: float = 90.0
    k_c: float | None = None
    utility_kind: UtilityKind = UtilityKind.POWER
    constraint_kind: ConstraintKind = ConstraintKind.RUIN_AT_ZERO

    def __post_init__(self) -> None:
        if not self.D > 0:
            raise ValueError(f"D must be positive, got {self.D}")
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not (isinstance(self.M, (int, np.integer)) and self.M >= 1):
            raise ValueError(f"M must be an integer >= 1, got {self.M}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.T > self.t0:
            raise ValueError(f"need T > t0, got t0={self.t0}, T={self.T}")
        if self.k_c is not None and not 0 < self.k_c <= 1:
            raise ValueError(f"k_c must lie in (0, 1], got {self.k_c}")
        if self.utility_kind is UtilityKind.POWER and self.gamma == 1:
            raise ValueError("power utility requires gamma != 1")
        if (
            self.utility_kind is UtilityKind.POWER
            and self.constraint_kind is not ConstraintKind.RUIN_AT_ZERO
        ):
            # power utility lives on x >= 0, so unconstrained (negative)
            # wealth is not meaningful
            raise ValueError("power utility requires the ruin-at-zero constraint")

    @property
    def has_advanced(self) -> bool:
        return self.k_c is not None

    @property
    def c1(self) -> float:
        """Advanced miner's unit cost k_c * c."""
        if self.k_c is None:
            raise ValueError("no advanced miner in this parameter set")
        return self.k_c * self.c

    @property
    def horizon(self) -> float:
        return self.T - self.t0

    def utility(self) -> "UtilitySpec":
        return UtilitySpec(self.utility_kind, self.gamma)


@dataclass(frozen=True)
class UtilitySpec:
    kind: UtilityKind
    gamma: float

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.kind is UtilityKind.POWER and self.gamma == 1:
            raise ValueError("power utility requires gamma != 1")


def utility_eval(u: UtilitySpec, x):
    """Evaluate U(x) for a scalar or array argument.

    Power utility is only defined for x >= 0 (U(0) = 0, U'(0+) = +inf).
    """
    x = np.asarray(x, dtype=float)
    if u.kind is UtilityKind.EXPONENTIAL:
        out = -np.exp(-u.gamma * x) / u.gamma
    else:
        if np.any(x < 0):
            raise ValueError("power utility is undefined for negative wealth")
        out = np.power(x, 1.0 - u.gamma) / (1.0 - u.gamma)
    if out.ndim == 0:
        return float(out)
    return out


def reward_intensity(alpha, mean_alpha: float, beta: float, params: ModelParams):
    """Individual reward intensity alpha / (D * (alpha + M*mean_alpha + beta)).

    Defined as 0 when every hash rate is zero (no rewards without hashing).
    Accepts scalar or array ``alpha``.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0) or mean_alpha < 0 or beta < 0:
        raise ValueError("hash rates must be nonnegative")
    denom = params.D * (alpha + params.M * mean_alpha + beta)
    out = np.divide(alpha, denom, out=np.zeros_like(alpha), where=denom > 0)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time lattice shared by the HJB and Fokker-Planck solves.

    The reward value p must be an exact integer multiple of dx so that the
    nonlocal terms v(x+p) and m(x-p) are exact index shifts.
    """

    x_min: float
    x_max: float
    dx: float
    dt: float
    t0: float
    T: float
    jump_nodes: int

    @classmethod
    def build(
        cls,
        params: ModelParams,
        x_min: float,
        x_max: float,
        dx: float,
        dt: float,
    ) -> "GridSpec":
        if dx <= 0 or dt <= 0:
            raise ValueError("dx and dt must be positive")
        jump = params.p / dx
        if abs(jump - round(jump)) > 1e-9 * max(jump, 1.0):
            raise ValueError(
                f"p={params.p} must be an integer multiple of dx={dx}"
            )
        if x_max - x_min < 3 * params.p:
            raise ValueError("grid must span at least 3*p (jump buffer)")
        nsteps = (params.T - params.t0) / dt
        if abs(nsteps - round(nsteps)) > 1e-9 * max(nsteps, 1.0):
            raise ValueError("(T - t0) must be an integer multiple of dt")
        ncells = (x_max - x_min) / dx
        if abs(ncells - round(ncells)) > 1e-9 * max(ncells, 1.0):
            raise ValueError("(x_max - x_min) must be an integer multiple of dx")
        if params.constraint_kind is ConstraintKind.RUIN_AT_ZERO and x_min != 0.0:
            raise ValueError("ruin-at-zero runs require x_min = 0")
        return cls(
            x_min=x_min,
            x_max=x_max,
            dx=dx,
            dt=dt,
            t0=params.t0,
            T=params.T,
            jump_nodes=int(round(jump)),
        )

    @property
    def n_x(self) -> int:
        return int(round((self.x_max - self.x_min) / self.dx)) + 1

    @property
    def n_t(self) -> int:
        """Number of time steps; there are n_t + 1 time levels."""
        return int(round((self.T - self.t0) / self.dt))

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_x)

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_t + 1)

    def time_index(self, t: float) -> int:
        idx = int(round((t - self.t0) / self.dt))
        if not 0 <= idx <= self.n_t:
            raise ValueError(f"time {t} outside [{self.t0}, {self.T}]")
        return idx

    def reporting_slice(self) -> slice:
        """Index range away from both jump-buffer bands of width p.

        The top band sees extrapolated jump lookups and the bottom band sees
        the boundary closure, so reported/validated quantities exclude both.
        """
        j = self.jump_nodes
        return slice(j, self.n_x - j)


@dataclass(frozen=True)
class InitialDensitySpec:
    """Gaussian initial wealth profile, truncated to the grid and renormalized."""

    mean: float
    sd: float

    def __post_init__(self) -> None:
        if not self.sd > 0:
            raise ValueError("sd must be positive")


def build_initial_density(spec: InitialDensitySpec, grid: GridSpec) -> np.ndarray:
    """Discrete initial density on the grid nodes, rectangle-rule mass 1.

    Fails if more than 1% of the Gaussian mass falls outside the grid,
    which signals that the grid is too small for the initial condition.
    """
    lo = (grid.x_min - spec.mean) / (spec.sd * math.sqrt(2.0))
    hi = (grid.x_max - spec.mean) / (spec.sd * math.sqrt(2.0))
    inside = 0.5 * (math.erf(hi) - math.erf(lo))
    if 1.0 - inside > 0.01:
        raise ValueError(
            f"more than 1% of the initial Gaussian mass lies outside "
            f"[{grid.x_min}, {grid.x_max}]"
        )
    z = (grid.x - spec.mean) / spec.sd
    m = np.exp(-0.5 * z * z)
    m /= m.sum() * grid.dx
    return m
