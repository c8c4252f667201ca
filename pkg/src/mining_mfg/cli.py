"""Batch front door: parse a config file, run a solve / simulation / sweep,
emit CSV artifacts, and report convergence diagnostics.

CSV files use a header row, comma separators, '.' decimal points, Unix
newlines, and 12 significant digits, so identical configs (and seeds)
produce byte-identical files.  Exit status: 0 on success, 2 when a fixed
point failed to converge, 1 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .advanced import best_response_beta
from .analytics import concentration_series, expected_instant_profit_row
from .closed_form import (
    advanced_equilibrium,
    exponential_equilibrium,
    social_cost,
    social_cost_bound,
)
from .config import ConfigError, RunConfig, RunKind, parse_config, sweep_grid_dx
from .equilibrium import EquilibriumResult, solve_equilibrium
from .params import (
    ConstraintKind,
    GridSpec,
    ModelParams,
    UtilityKind,
)
from .simulate import ConstantPolicy, simulate_homogeneous, simulate_with_advanced


def _fmt(value) -> str:
    """12-significant-digit cell; empty for NaN/None (flagged-invalid values)."""
    if value is None:
        return ""
    value = float(value)
    if np.isnan(value):
        return ""
    return f"{value:.12g}"


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = zip(*columns)
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(cell) for cell in row) + "\n")


def _time_label(t: float) -> str:
    return f"{t:g}"


def _solve(config: RunConfig, params: ModelParams | None = None,
           grid: GridSpec | None = None) -> EquilibriumResult:
    return solve_equilibrium(
        params if params is not None else config.params,
        grid if grid is not None else config.grid,
        config.init,
        config.solver,
    )


def _write_solve_outputs(config: RunConfig, result: EquilibriumResult, out: Path) -> None:
    params, grid = config.params, result.control.grid
    nt = grid.n_t
    beta = result.beta_path if result.beta_path is not None else np.zeros(nt + 1)

    write_csv(out / "equilibrium.csv",
              ["t", "mean_alpha", "beta"],
              [grid.t, result.mean_path, beta])

    snap_idx = [grid.time_index(t) for t in config.snapshot_times]
    header = ["x"] + [f"m{_time_label(t)}" for t in config.snapshot_times]
    cols = [grid.x] + [result.density.m[n] for n in snap_idx]
    write_csv(out / "density_snapshots.csv", header, cols)

    header = ["x"] + [f"profit{_time_label(t)}" for t in config.snapshot_times]
    cols = [grid.x] + [
        expected_instant_profit_row(
            result.control.alpha[n], result.mean_path[n], beta[n], params
        )
        for n in snap_idx
    ]
    write_csv(out / "profit_curves.csv", header, cols)

    conc = concentration_series(result, config.threshold, params)
    write_csv(out / "concentration.csv",
              ["t", "proportion", "profit_share"],
              [conc.t, conc.proportion, conc.profit_share])

    write_csv(out / "diagnostics.csv",
              ["iteration", "residual", "mass_error_max"],
              [np.arange(1, result.iterations + 1),
               result.residual_history, result.mass_error_history])


def run_solve(config: RunConfig, out: Path) -> int:
    result = _solve(config)
    _write_solve_outputs(config, result, out)
    return 0 if result.converged else 2


def run_closed_form(config: RunConfig, out: Path) -> int:
    params = config.params
    if params.utility_kind is not UtilityKind.EXPONENTIAL:
        raise ConfigError("closed-form runs require utility = exponential")
    cf = exponential_equilibrium(params)
    header = ["alpha_star", "lambda", "value_decay",
              "alpha_star_upper_bound", "social_cost", "social_cost_bound"]
    row = [cf.alpha_star, cf.lam, cf.value_decay,
           1.0 / (params.c * params.gamma * (1 + params.M) * params.D),
           social_cost(params), social_cost_bound(params)]
    if params.has_advanced:
        adv = advanced_equilibrium(params)
        share = (adv.kappa2 - params.M * adv.kappa1) / (adv.kappa1 + adv.kappa2) \
            if adv.beta_positive else 0.0
        header += ["kappa1", "kappa2", "alpha_star_advanced", "beta_star_advanced",
                   "rho", "advanced_reward_share"]
        row += [adv.kappa1, adv.kappa2, adv.alpha_star, adv.beta_star, adv.rho, share]
    write_csv(out / "closed_form.csv", header, [np.array([v]) for v in row])
    return 0


def run_simulate(config: RunConfig, out: Path) -> int:
    params = config.params
    if params.utility_kind is not UtilityKind.EXPONENTIAL:
        raise ConfigError("simulate runs use the exponential closed-form policies")
    if params.has_advanced:
        adv = advanced_equilibrium(params)
        stats = simulate_with_advanced(
            params,
            ConstantPolicy(adv.alpha_star),
            ConstantPolicy(adv.beta_star),
            config.n_paths,
            config.seed,
        )
    else:
        cf = exponential_equilibrium(params)
        stats = simulate_homogeneous(
            params, ConstantPolicy(cf.alpha_star), config.n_paths, config.seed
        )
    classes = sorted(stats.profit_by_class)
    header = ["class", "mean_profit", "var_profit", "se_mean", "se_var",
              "reward_share", "se_reward_share", "frac_zero_rewards", "se_frac_zero"]
    with open(out / "simulation_stats.csv", "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for name in classes:
            cs = stats.profit_by_class[name]
            frac0 = stats.frac_zero_rewards if name == "individual" else None
            se0 = stats.se_frac_zero if name == "individual" else None
            cells = [name] + [_fmt(v) for v in (
                cs.mean, cs.var, cs.se_mean, cs.se_var,
                stats.reward_share_by_class[name], stats.se_reward_share[name],
                frac0, se0,
            )]
            f.write(",".join(cells) + "\n")
    return 0


def _sweep_diag_rows(tag: str, values, results) -> tuple[list[str], list[np.ndarray]]:
    cols_v, cols_i, cols_r, cols_m = [], [], [], []
    for value, result in zip(values, results):
        n = result.iterations
        cols_v.append(np.full(n, value))
        cols_i.append(np.arange(1, n + 1))
        cols_r.append(result.residual_history)
        cols_m.append(result.mass_error_history)
    header = [tag, "iteration", "residual", "mass_error_max"]
    cols = [np.concatenate(cols_v), np.concatenate(cols_i),
            np.concatenate(cols_r), np.concatenate(cols_m)]
    return header, cols


def sweep_price_results(config: RunConfig) -> list[tuple[ModelParams, EquilibriumResult]]:
    """Solve at each price on one shared grid (every p divides into it)."""
    base = config.params
    dx = sweep_grid_dx(config.sweep_values)
    x_max_cells = -(-(config.init.mean + 70.0 * max(config.sweep_values)) // dx)
    x_max = float(x_max_cells * dx)
    out = []
    for p in config.sweep_values:
        params = replace(base, p=p)
        grid = GridSpec.build(params, 0.0, x_max, dx, config.grid.dt)
        out.append((params, _solve(config, params=params, grid=grid)))
    return out


def run_sweep_price(config: RunConfig, out: Path) -> int:
    """Tabulate density and profit rows at t_eval per price (m_p<v>, profit_p<v>)."""
    pairs = sweep_price_results(config)
    results = [r for _, r in pairs]
    grid = results[0].control.grid
    n_eval = grid.time_index(config.t_eval)
    header, cols = ["x"], [grid.x]
    for (params, result) in pairs:
        header.append(f"m_p{params.p:g}")
        cols.append(result.density.m[n_eval])
    for (params, result) in pairs:
        beta = result.beta_path[n_eval] if result.beta_path is not None else 0.0
        header.append(f"profit_p{params.p:g}")
        cols.append(expected_instant_profit_row(
            result.control.alpha[n_eval], result.mean_path[n_eval], beta, params))
    write_csv(out / "sweep_price.csv", header, cols)
    write_csv(out / "diagnostics.csv",
              *_sweep_diag_rows("p", config.sweep_values, results))
    return 0 if all(r.converged for r in results) else 2


def sweep_competition_results(config: RunConfig) -> list[tuple[ModelParams, EquilibriumResult]]:
    base = config.params
    out = []
    for m_value in config.sweep_values:
        params = replace(base, M=int(m_value))
        out.append((params, _solve(config, params=params)))
    return out


def run_sweep_competition(config: RunConfig, out: Path) -> int:
    pairs = sweep_competition_results(config)
    results = [r for _, r in pairs]
    grid = config.grid
    n_eval = grid.time_index(config.t_eval)
    header, cols = ["x"], [grid.x]
    for (params, result) in pairs:
        header.append(f"m_M{params.M:g}")
        cols.append(result.density.m[n_eval])
    for (params, result) in pairs:
        beta = result.beta_path[n_eval] if result.beta_path is not None else 0.0
        header.append(f"profit_M{params.M:g}")
        cols.append(expected_instant_profit_row(
            result.control.alpha[n_eval], result.mean_path[n_eval], beta, params))
    write_csv(out / "sweep_competition.csv", header, cols)
    write_csv(out / "diagnostics.csv",
              *_sweep_diag_rows("M", config.sweep_values, results))
    return 0 if all(r.converged for r in results) else 2


def sweep_kc_results(config: RunConfig) -> list[tuple[ModelParams, EquilibriumResult]]:
    base = config.params
    out = []
    for kc in config.sweep_values:
        params = replace(base, k_c=kc)
        out.append((params, _solve(config, params=params)))
    return out


def run_sweep_kc(config: RunConfig, out: Path) -> int:
    from .analytics import advanced_shares

    pairs = sweep_kc_results(config)
    results, rewards, profits = [], [], []
    for params, result in pairs:
        reward, profit = advanced_shares(result, params, config.t_eval)
        results.append(result)
        rewards.append(reward)
        profits.append(profit)
    write_csv(out / "sweep_kc.csv",
              ["kc", "reward_share", "profit_share"],
              [np.array(config.sweep_values), np.array(rewards), np.array(profits)])
    write_csv(out / "diagnostics.csv",
              *_sweep_diag_rows("kc", config.sweep_values, results))
    return 0 if all(r.converged for r in results) else 2


_RUNNERS = {
    RunKind.SOLVE: run_solve,
    RunKind.CLOSED_FORM: run_closed_form,
    RunKind.SIMULATE: run_simulate,
    RunKind.SWEEP_PRICE: run_sweep_price,
    RunKind.SWEEP_COMPETITION: run_sweep_competition,
    RunKind.SWEEP_KC: run_sweep_kc,
}


def run(config: RunConfig, out_dir: str | Path) -> int:
    """Execute a run and write its CSV artifacts; returns the exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[config.run_kind](config, out)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mining-mfg",
        description="Equilibrium solver and analytics for the mining mean field game",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in RunKind:
        s = sub.add_parser(kind.value)
        s.add_argument("--config", required=True, help="flat key = value file")
        s.add_argument("--out", required=True, help="output directory for CSVs")
        s.add_argument("--seed", type=int, default=None, help="RNG seed override")
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text, run_kind=args.command)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        return run(config, args.out)
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
