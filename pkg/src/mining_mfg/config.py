"""Flat key = value run configuration: parsing, defaults, validation.

One assignment per line, ``#`` comments, unknown keys rejected.  Errors
carry the offending line number (parse) or field name (validation).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .equilibrium import SolverConfig
from .params import (
    ConstraintKind,
    GridSpec,
    InitialDensitySpec,
    ModelParams,
    UtilityKind,
)


class ConfigError(ValueError):
    pass


class RunKind(enum.Enum):
    SOLVE = "solve"
    CLOSED_FORM = "closed-form"
    SIMULATE = "simulate"
    SWEEP_PRICE = "sweep-price"
    SWEEP_COMPETITION = "sweep-competition"
    SWEEP_KC = "sweep-kc"


DEFAULT_SNAPSHOTS = (0.0, 30.0, 45.0, 60.0, 90.0)
DEFAULT_SWEEPS = {
    RunKind.SWEEP_PRICE: (2.0, 3.0, 4.0, 5.0),
    RunKind.SWEEP_COMPETITION: (1000.0, 2000.0, 3000.0, 10000.0),
    RunKind.SWEEP_KC: (1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65),
}

_KNOWN_KEYS = {
    "run", "D", "p", "c", "M", "gamma", "t0", "T", "k_c",
    "utility", "constraint", "mean0", "sd0",
    "x_min", "x_max", "dx", "dt",
    "w", "tol", "max_iters", "eps_alpha", "seed_path",
    "snapshot_times", "threshold", "sweep_values", "t_eval",
    "n_paths", "seed",
}

_REQUIRED_KEYS = ("D", "p", "c", "M", "gamma", "T", "mean0", "sd0")


@dataclass(frozen=True)
class RunConfig:
    run_kind: RunKind
    params: ModelParams
    grid: GridSpec
    solver: SolverConfig
    init: InitialDensitySpec
    snapshot_times: tuple[float, ...]
    threshold: float
    sweep_values: tuple[float, ...]
    t_eval: float
    n_paths: int
    seed: int

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)


def _scan(text: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        entries[key] = (value, lineno)
    return entries


def _get_float(entries, key) -> float | None:
    if key not in entries:
        return None
    value, lineno = entries[key]
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be a number, got {value!r}")


def _get_int(entries, key) -> int | None:
    if key not in entries:
        return None
    value, lineno = entries[key]
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be an integer, got {value!r}")


def _get_list(entries, key) -> tuple[float, ...] | None:
    if key not in entries:
        return None
    value, lineno = entries[key]
    try:
        items = tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be comma-separated numbers")
    if not items:
        raise ConfigError(f"line {lineno}: {key} must not be empty")
    return items


def _get_enum(entries, key, mapping, default):
    if key not in entries:
        return default
    value, lineno = entries[key]
    try:
        return mapping[value.lower()]
    except KeyError:
        raise ConfigError(
            f"line {lineno}: {key} must be one of {sorted(mapping)}, got {value!r}"
        )


def default_x_min(params: ModelParams, mean0: float, sd0: float) -> float:
    if params.constraint_kind is ConstraintKind.RUIN_AT_ZERO:
        return 0.0
    return mean0 - 10.0 * sd0 - params.p


def default_x_max(mean0: float, p: float, dx: float) -> float:
    raw = mean0 + 70.0 * p
    cells = -(-raw // dx)  # ceil to a whole number of cells
    return float(cells * dx)


def sweep_grid_dx(p_values: tuple[float, ...]) -> float:
    """Common spatial step for a price sweep: every p must be an exact
    multiple, and the finest p keeps at least 12 nodes per jump."""
    fracs = [Fraction(str(v)) for v in p_values]
    g = fracs[0]
    for f in fracs[1:]:
        g = Fraction(
            math.gcd(g.numerator * f.denominator, f.numerator * g.denominator),
            g.denominator * f.denominator,
        )
    dx = min(g / 6, min(fracs) / 12)
    return float(dx)


def parse_config(text: str, run_kind: str | RunKind | None = None) -> RunConfig:
    """Parse and fully validate a run configuration.

    ``run_kind`` (usually the CLI subcommand) overrides any ``run`` key in
    the file; they must agree when both are present.
    """
    entries = _scan(text)

    file_kind = None
    if "run" in entries:
        value, lineno = entries["run"]
        try:
            file_kind = RunKind(value.lower())
        except ValueError:
            raise ConfigError(f"line {lineno}: unknown run kind {value!r}")
    if run_kind is None:
        kind = file_kind or RunKind.SOLVE
    else:
        kind = RunKind(run_kind) if isinstance(run_kind, str) else run_kind
        if file_kind is not None and file_kind is not kind:
            raise ConfigError(
                f"config says run = {file_kind.value}, command is {kind.value}"
            )

    for key in _REQUIRED_KEYS:
        if key not in entries:
            raise ConfigError(f"missing required key {key!r}")

    utility = _get_enum(
        entries, "utility",
        {"exponential": UtilityKind.EXPONENTIAL, "power": UtilityKind.POWER},
        UtilityKind.POWER,
    )
    default_constraint = (
        ConstraintKind.UNCONSTRAINED
        if utility is UtilityKind.EXPONENTIAL
        else ConstraintKind.RUIN_AT_ZERO
    )
    constraint = _get_enum(
        entries, "constraint",
        {"unconstrained": ConstraintKind.UNCONSTRAINED,
         "ruin-at-zero": ConstraintKind.RUIN_AT_ZERO},
        default_constraint,
    )

    k_c = _get_float(entries, "k_c")
    if kind is RunKind.SWEEP_KC and k_c is None:
        k_c = 1.0  # placeholder; each sweep point overrides it

    try:
        params = ModelParams(
            D=_get_float(entries, "D"),
            p=_get_float(entries, "p"),
            c=_get_float(entries, "c"),
            M=_get_int(entries, "M"),
            gamma=_get_float(entries, "gamma"),
            t0=_get_float(entries, "t0") if "t0" in entries else 0.0,
            T=_get_float(entries, "T"),
            k_c=k_c,
            utility_kind=utility,
            constraint_kind=constraint,
        )
    except ValueError as exc:
        raise ConfigError(str(exc))

    mean0 = _get_float(entries, "mean0")
    sd0 = _get_float(entries, "sd0")
    try:
        init = InitialDensitySpec(mean=mean0, sd=sd0)
    except ValueError as exc:
        raise ConfigError(f"sd0: {exc}")

    dx = _get_float(entries, "dx")
    if dx is None:
        dx = params.p / 12.0
    dt = _get_float(entries, "dt")
    if dt is None:
        dt = 0.05
    x_min = _get_float(entries, "x_min")
    if x_min is None:
        x_min = default_x_min(params, mean0, sd0)
    x_max = _get_float(entries, "x_max")
    if x_max is None:
        x_max = default_x_max(mean0, params.p, dx)
    try:
        grid = GridSpec.build(params, x_min, x_max, dx, dt)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}")

    tol = _get_float(entries, "tol")
    max_iters = _get_int(entries, "max_iters")
    try:
        solver = SolverConfig(
            tol=1e-4 if tol is None else tol,
            max_iters=500 if max_iters is None else max_iters,
            inertia_w=_get_float(entries, "w"),
            eps_alpha=_get_float(entries, "eps_alpha"),
            seed_path=_get_float(entries, "seed_path"),
        )
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}")

    snapshots = _get_list(entries, "snapshot_times")
    if snapshots is None:
        snapshots = tuple(t for t in DEFAULT_SNAPSHOTS if params.t0 <= t <= params.T)
    for t in snapshots:
        if not params.t0 <= t <= params.T:
            raise ConfigError(f"snapshot_times: {t} outside [{params.t0}, {params.T}]")

    sweep_values = _get_list(entries, "sweep_values")
    if sweep_values is None:
        sweep_values = DEFAULT_SWEEPS.get(kind, ())
    if kind in DEFAULT_SWEEPS and not sweep_values:
        raise ConfigError("sweep_values must not be empty for sweep runs")
    if kind is RunKind.SWEEP_KC:
        for v in sweep_values:
            if not 0 < v <= 1:
                raise ConfigError(f"sweep_values: k_c = {v} outside (0, 1]")
    if kind is RunKind.SWEEP_COMPETITION:
        for v in sweep_values:
            if v != int(v) or v < 1:
                raise ConfigError(f"sweep_values: M = {v} is not a positive integer")

    t_eval = _get_float(entries, "t_eval")
    if t_eval is None:
        t_eval = min(30.0, params.T)
    if not params.t0 <= t_eval <= params.T:
        raise ConfigError(f"t_eval: {t_eval} outside [{params.t0}, {params.T}]")

    threshold = _get_float(entries, "threshold")
    if threshold is None:
        threshold = 100.0

    n_paths = _get_int(entries, "n_paths")
    if n_paths is None:
        n_paths = 100_000
    if n_paths < 1:
        raise ConfigError("n_paths must be positive")

    seed = _get_int(entries, "seed")
    if seed is None:
        seed = 0

    return RunConfig(
        run_kind=kind,
        params=params,
        grid=grid,
        solver=solver,
        init=init,
        snapshot_times=snapshots,
        threshold=threshold,
        sweep_values=sweep_values,
        t_eval=t_eval,
        n_paths=n_paths,
        seed=seed,
    )
