"""Command-line runner: plan, sweep, simulate, map-eval and verify."""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import realize_channel, transmitted_bits
from .config import ConfigError, RunConfig, load_config
from .energy import total_energy, upper_bound_derivative
from .geometry import max_distance_in_window, parked_distance
from .io import read_dataset, write_csv, write_dataset, write_grid, write_manifest
from .mission import evaluate_map, mapping_poses, simulate_mission
from .planner import (
    PracticalRangeWarning,
    check_feasibility,
    optimal_plan,
    sweep_area,
    sweep_speed,
    sweep_t_sens,
    upper_bound_at,
    upper_bound_link_terms,
)
from .power import PowerSolverError, comm_energy, solve_period_powers, upper_bound_power, verify_full_window_optimal, xi
from .world import build_square_world

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3
EXIT_IO = 4
EXIT_CONFIG = 5

OUT_ENV = "SLAMENERGY_OUT"


class DatasetError(OSError):
    """A scan dataset that cannot be read back."""

ROW_DIGITS = 9


@dataclass
class RunResult:
    status: int
    summary: dict
    outputs: list[Path] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def output_dir(config: RunConfig) -> Path:
    return Path(config.out_dir or os.environ.get(OUT_ENV) or "slamenergy-out")


def _finish(config, outputs, started) -> list[Path]:
    return outputs + [write_manifest(output_dir(config), config, outputs, time.perf_counter() - started)]


def run_plan(config: RunConfig) -> RunResult:
    """Optimal speed and period, per-period powers, energy and constraint report."""
    started = time.perf_counter()
    mission, model, payload = config.mission, config.channel, config.payload
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PracticalRangeWarning)
        plan = optimal_plan(mission)
    realization = realize_channel(model, plan.n_periods)
    powers = solve_period_powers(
        plan, mission, model, realization, payload, config.n_sub_intervals, strict=False
    )
    energy = total_energy(plan, powers, config.mechanical, mission)
    report = check_feasibility(plan, powers, mission, payload, model, realization)

    rows = []
    for k, p in zip(powers.periods, powers.powers):
        t0 = (k - 1) * plan.t_sens
        d0, d1 = parked_distance([t0, t0 + plan.t_comm], mission, plan.v)
        rows.append([int(k), t0, d0, d1, max_distance_in_window(int(k), plan, mission), p, p * plan.t_comm])
    path = write_csv(
        output_dir(config) / "plan.csv", ["k", "t_start", "d_start", "d_end", "d_max", "p_tx", "E_comm_k"], rows
    )
    summary = {
        "v_star": plan.v,
        "t_sens_star": plan.t_sens,
        "N_m": plan.n_periods,
        **energy.as_row(),
        "feasible": report.verdict,
        "constraints": {c.name: (c.passed, c.slack) for c in report.checks},
    }
    status = EXIT_OK if report.verdict else EXIT_INFEASIBLE
    return RunResult(status, summary, _finish(config, [path], started), [str(w.message) for w in caught])


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with ``stop`` included when it lies on the grid."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"grid must be start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ConfigError(f"empty grid {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


SWEEPS = {"t_sens": sweep_t_sens, "L": sweep_area, "v": sweep_speed}


def run_sweep(config: RunConfig, axis: str, grid) -> RunResult:
    started = time.perf_counter()
    if axis not in SWEEPS:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEPS)}")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ConfigError("sweep grid is empty")
    table = SWEEPS[axis](
        grid, config.mission, config.channel, config.payload, config.mechanical,
        n_sub=config.n_sub_intervals, workers=config.workers,
    )
    rows = []
    for x, r in zip(table.grid, table.rows):
        vals = r.as_row() if r is not None else dict.fromkeys(("E_comm", "E_LiDAR", "E_mech", "E_total"), math.nan)
        rows.append([x, vals["E_comm"], vals["E_LiDAR"], vals["E_mech"], vals["E_total"]])
    path = write_csv(output_dir(config) / f"sweep_{axis}.csv", [axis, "E_comm", "E_LiDAR", "E_mech", "E_total"], rows)
    status = EXIT_SOLVER if table.errors else EXIT_OK
    return RunResult(status, {"axis": axis, "points": len(rows), "errors": table.errors}, _finish(config, [path], started))


def run_simulate(config: RunConfig) -> RunResult:
    started = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PracticalRangeWarning)
        plan = optimal_plan(config.mission)
    world = build_square_world(config.L, config.grid_resolution)
    records = simulate_mission(plan, config.mission, world, config.noise, config.workers)
    path = write_dataset(output_dir(config) / "scans.csv", records)
    return RunResult(EXIT_OK, {"records": len(records)}, _finish(config, [path], started))


def run_map_eval(config: RunConfig, dataset) -> RunResult:
    started = time.perf_counter()
    try:
        records = read_dataset(dataset)
    except (ValueError, StopIteration) as exc:
        raise DatasetError(f"{dataset}: {exc or 'empty file'}") from None
    if not records:
        raise DatasetError(f"{dataset}: no records")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PracticalRangeWarning)
        plan = optimal_plan(config.mission)
    world = build_square_world(config.L, config.grid_resolution)
    poses = mapping_poses(records, plan, config.mission, config.pose_source)
    ev = evaluate_map(records, poses, world, config.metrics, config.grid_resolution, config.iou_threshold)
    out = output_dir(config)
    grid_path = write_grid(out / "grid.txt", ev.grid)
    summary = {"L_cls": ev.losses.cls, "L_ch": ev.losses.chamfer, "L_total": ev.losses.total, "IoU": ev.iou}
    metrics_path = write_csv(out / "map_metrics.csv", list(summary), [list(summary.values())])
    return RunResult(EXIT_OK, summary, _finish(config, [metrics_path, grid_path], started))


def run_verify(config: RunConfig) -> RunResult:
    """Numerical checks of the optimiser's analytic claims."""
    started = time.perf_counter()
    mission, model, payload, mech = config.mission, config.channel, config.payload, config.mechanical
    n_sub = config.n_sub_intervals
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PracticalRangeWarning)
        plan = optimal_plan(mission)
    realization = realize_channel(model, plan.n_periods)
    checks = []

    duty = verify_full_window_optimal(plan, mission, model, realization, payload, [0.25, 0.5, 0.75, 1.0], n_sub)
    checks.append(("full_window_cheapest", duty.verdict, float(duty.e_comm[-1]), math.nan))

    d_max, mu = upper_bound_link_terms(plan.v, mission, model)
    xi_v = xi(mission, payload, model.B)
    worst_fd, min_deriv = 0.0, math.inf
    for v in np.geomspace(0.05, 20, 20):
        h = 1e-5 * v
        fd = (upper_bound_at(v + h, mission, mech, d_max, mu, payload, model.B)
              - upper_bound_at(v - h, mission, mech, d_max, mu, payload, model.B)) / (2 * h)
        an = upper_bound_derivative(v, mission, mech, d_max, mu, xi_v)
        worst_fd = max(worst_fd, abs(fd / an - 1))
        min_deriv = min(min_deriv, an)
    checks.append(("derivative_matches_fd", worst_fd <= 1e-6, worst_fd, 1e-6))
    checks.append(("derivative_positive", min_deriv > 0, min_deriv, 0.0))

    powers = solve_period_powers(plan, mission, model, realization, payload, n_sub)
    bound = upper_bound_power(plan.v, d_max[: len(powers)], mu[: len(powers)], xi_v)
    ratio = float(np.min(bound / powers.powers))
    checks.append(("upper_bound_dominates", ratio >= 1 - 1e-12, ratio, 1.0))

    actual = total_energy(plan, powers, mech, mission).E_total
    bound_energy = upper_bound_at(plan.v, mission, mech, d_max, mu, payload, model.B)
    checks.append(("upper_bound_energy_dominates", bound_energy >= actual, bound_energy - actual, 0.0))

    change = max(
        abs(transmitted_bits(int(k), float(p), plan, mission, model, realization, 2 * n_sub)
            / transmitted_bits(int(k), float(p), plan, mission, model, realization, n_sub) - 1)
        for k, p in zip(powers.periods, powers.powers)
    )
    checks.append(("quadrature_converged", change < 1e-3, change, 1e-3))

    coarse = solve_period_powers(plan, mission, model, realization, payload, 1)
    fine = solve_period_powers(plan, mission, model, realization, payload, 1024)
    total_gap = abs(comm_energy(coarse, plan) / comm_energy(fine, plan) - 1)
    checks.append(("single_vs_fine_subintervals_total", total_gap <= 0.05, total_gap, 0.05))
    per_period_gap = float(np.max(np.abs(coarse.powers / fine.powers - 1)))
    checks.append(("single_vs_fine_subintervals_max_period", None, per_period_gap, 0.05))

    path = write_csv(
        output_dir(config) / "verify.csv",
        ["check", "passed", "value", "threshold"],
        [[name, "info" if ok is None else ("pass" if ok else "fail"), value, thr] for name, ok, value, thr in checks],
    )
    failed = [name for name, ok, _, _ in checks if ok is False]
    status = EXIT_CHECK_FAILED if failed else EXIT_OK
    return RunResult(status, {"failed": failed, "checks": len(checks)}, _finish(config, [path], started))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./slamenergy-out)")
    common.add_argument("--deterministic-channel", action="store_true", help="use |h|^2 = 1 in every period")
    common.add_argument("--n-sub-intervals", type=int, dest="n_sub_intervals")
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(prog="slamenergy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("plan", parents=[common], help="optimal speed, period and powers")
    sweep = sub.add_parser("sweep", parents=[common], help="energy versus one parameter")
    sweep.add_argument("--axis", required=True, choices=sorted(SWEEPS))
    sweep.add_argument("--grid", required=True, help="start:stop:step")
    sub.add_parser("simulate", parents=[common], help="write a simulated scan dataset")
    map_eval = sub.add_parser("map-eval", parents=[common], help="map metrics for a scan dataset")
    map_eval.add_argument("dataset", type=Path)
    sub.add_parser("verify", parents=[common], help="numerical checks of the optimiser")
    return parser


def _resolve_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = str(args.out)
    if args.deterministic_channel:
        changes["deterministic_channel"] = True
    if args.n_sub_intervals is not None:
        changes["n_sub_intervals"] = args.n_sub_intervals
    if args.workers is not None:
        changes["workers"] = args.workers
    return replace(config, **changes) if changes else config


def _print_summary(result: RunResult, stream):
    for msg in result.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    for key, val in result.summary.items():
        if isinstance(val, float):
            val = format(val, f".{ROW_DIGITS}g")
        print(f"{key}: {val}", file=stream)
    for path in result.outputs:
        print(f"wrote {path}", file=stream)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        if args.command == "plan":
            result = run_plan(config)
        elif args.command == "sweep":
            result = run_sweep(config, args.axis, parse_grid(args.grid))
        elif args.command == "simulate":
            result = run_simulate(config)
        elif args.command == "map-eval":
            result = run_map_eval(config, args.dataset)
        else:
            result = run_verify(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PowerSolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    _print_summary(result, sys.stdout)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
