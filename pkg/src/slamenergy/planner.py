"""Feasibility checks, the closed-form optimum and energy sweeps."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelModel, ChannelRealization, FramePayload, link_mu, realize_channel, transmitted_bits
from .energy import EnergyBreakdown, MechanicalParams, total_energy, total_energy_upper_bound
from .geometry import MissionConfig, SchedulePlan, make_plan, max_distance_in_window
from .power import DEFAULT_N_SUB, PowerSolution, PowerSolverError, solve_period_powers, xi

# Relative tolerance used when a constraint is meant to hold with equality.
CONSTRAINT_RTOL = 1e-9


class PracticalRangeWarning(UserWarning):
    """Sensing period outside the practical LiDAR range."""


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    slack: float
    note: str = ""


@dataclass(frozen=True)
class FeasibilityReport:
    checks: tuple[ConstraintCheck, ...]
    failing_periods: tuple[int, ...] = ()

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_feasibility(
    plan: SchedulePlan,
    powers: PowerSolution,
    config: MissionConfig,
    payload: FramePayload,
    model: ChannelModel,
    realization: ChannelRealization,
    n_sub: int | None = None,
) -> FeasibilityReport:
    """Evaluate the five mission constraints with their slacks.

    The data constraint is checked on the transmitting periods
    k = 2 .. N_m + 1; period 1 has nothing buffered yet.
    """
    n_sub = powers.n_sub if n_sub is None else n_sub
    need = payload.bits
    failing = []
    worst = math.inf
    for k, p in zip(powers.periods, powers.powers):
        bits = transmitted_bits(int(k), float(p), plan, config, model, realization, n_sub) if p > 0 else 0.0
        slack = bits - need
        worst = min(worst, slack)
        if slack < -CONSTRAINT_RTOL * need:
            failing.append(int(k))
    if not len(powers):
        worst = 0.0
    data = ConstraintCheck("data_delivered", not failing, worst, "checked on k = 2..N_m+1")
    time_slack = config.T_max - plan.n_periods * plan.t_sens
    timing = ConstraintCheck("task_time", time_slack >= -CONSTRAINT_RTOL * config.T_max, time_slack)
    min_p = float(np.min(powers.powers)) if len(powers) else math.inf
    positive = ConstraintCheck("positive_power", bool(min_p > 0), min_p)
    duty = ConstraintCheck("duty_ratio", 0 < plan.rho <= 1, 1 - plan.rho)
    count = ConstraintCheck("min_cycles", plan.n_periods >= config.N_D, float(plan.n_periods - config.N_D))
    return FeasibilityReport((data, timing, positive, duty, count), tuple(failing))


def optimal_speed(config: MissionConfig) -> float:
    """Slowest speed that still finishes the path within T_max."""
    return config.path_length / config.T_max


def optimal_t_sens(v: float, config: MissionConfig) -> float:
    """Longest sensing period that still yields N_D periods at speed ``v``."""
    if not v > 0:
        raise ValueError(f"speed must be positive, got {v}")
    t = config.path_length / (v * config.N_D)
    if v >= optimal_speed(config) and t > config.T_max / config.N_D * (1 + CONSTRAINT_RTOL):
        raise AssertionError("optimal sensing period exceeds T_max / N_D")
    lo, hi = config.t_sens_range
    if not lo <= t <= hi:
        warnings.warn(
            f"t_sens = {t:.6g} s lies outside the practical range [{lo}, {hi}] s",
            PracticalRangeWarning,
            stacklevel=2,
        )
    return t


def optimal_plan(config: MissionConfig) -> SchedulePlan:
    v = optimal_speed(config)
    return make_plan(config, v, optimal_t_sens(v, config), rho=1.0)


def upper_bound_link_terms(
    v: float, config: MissionConfig, model: ChannelModel, n_grid: int = 64
) -> tuple[np.ndarray, np.ndarray]:
    """Window maxima d_k,max and link gains mu_k for k = 2 .. N_D + 1.

    Both are evaluated for the plan that runs at ``v`` with the optimal
    sensing period for that speed.
    """
    t = config.path_length / (v * config.N_D)
    plan = make_plan(config, v, t)
    if plan.n_periods < config.N_D:
        plan = replace(plan, n_periods=config.N_D)
    realization = realize_channel(model, plan.n_periods)
    ks = np.arange(2, config.N_D + 2)
    d_max = np.array([max_distance_in_window(int(k), plan, config, n_grid) for k in ks])
    return d_max, link_mu(model, realization.gain(ks))


def min_upper_bound_energy(
    config: MissionConfig, params: MechanicalParams, d_max, mu, payload: FramePayload, B: float
) -> float:
    """Upper-bound energy at the optimal speed, written out in T_max form."""
    run = config.path_length
    v_star = run / config.T_max
    growth = math.expm1(4 * xi(config, payload, B) * config.side / config.T_max * math.log(2))
    comm = config.T_max / config.N_D * growth * float(np.sum(np.asarray(d_max) ** 2 / np.asarray(mu)))
    return (0.5 * params.kappa1 * v_star**2 + params.kappa2) * run + config.N_D * params.E_L + comm


def upper_bound_at(v, config, params, d_max, mu, payload, B) -> float:
    return total_energy_upper_bound(v, config, params, d_max, mu, xi(config, payload, B))


@dataclass
class SweepTable:
    axis: str
    grid: np.ndarray
    rows: list[EnergyBreakdown | None]
    errors: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("sweep grid must be strictly increasing")
        if len(self.rows) != len(self.grid):
            raise ValueError("one breakdown per grid point required")

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if r is None else r.as_row()[name] for r in self.rows])


def _energy_at(config, plan, model, payload, params, n_sub) -> EnergyBreakdown:
    realization = realize_channel(model, plan.n_periods)
    powers = solve_period_powers(plan, config, model, realization, payload, n_sub)
    return total_energy(plan, powers, params, config)


def _run_sweep(axis, grid, jobs, workers) -> SweepTable:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty sweep grid")

    def run(job):
        try:
            return job(), None
        except PowerSolverError as exc:
            return None, str(exc)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]
    rows = [r for r, _ in results]
    errors = {i: err for i, (_, err) in enumerate(results) if err}
    return SweepTable(axis, grid, rows, errors)


def sweep_t_sens(
    grid,
    config: MissionConfig,
    model: ChannelModel,
    payload: FramePayload,
    params: MechanicalParams,
    v: float | None = None,
    n_sub: int = DEFAULT_N_SUB,
    workers: int = 1,
) -> SweepTable:
    """Energy versus sensing period at a fixed speed (optimal speed by default), rho = 1."""
    v = optimal_speed(config) if v is None else v
    jobs = [
        (lambda t=t: _energy_at(config, make_plan(config, v, t), model, payload, params, n_sub))
        for t in np.asarray(grid, dtype=float)
    ]
    return _run_sweep("t_sens", grid, jobs, workers)


def sweep_area(
    L_grid,
    config: MissionConfig,
    model: ChannelModel,
    payload: FramePayload,
    params: MechanicalParams,
    n_sub: int = DEFAULT_N_SUB,
    workers: int = 1,
) -> SweepTable:
    """Energy versus arena side, each point run at its own optimal speed and period."""

    def job(L):
        cfg = replace(config, L=float(L))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PracticalRangeWarning)
            plan = optimal_plan(cfg)
        return _energy_at(cfg, plan, model, payload, params, n_sub)

    jobs = [(lambda L=L: job(L)) for L in np.asarray(L_grid, dtype=float)]
    return _run_sweep("L", L_grid, jobs, workers)


def sweep_speed(
    v_grid,
    config: MissionConfig,
    model: ChannelModel,
    payload: FramePayload,
    params: MechanicalParams,
    n_sub: int = DEFAULT_N_SUB,
    workers: int = 1,
) -> SweepTable:
    """Energy versus speed with the sensing period set optimally for each speed."""

    def job(v):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PracticalRangeWarning)
            plan = make_plan(config, v, optimal_t_sens(v, config))
        return _energy_at(config, plan, model, payload, params, n_sub)

    jobs = [(lambda v=v: job(v)) for v in np.asarray(v_grid, dtype=float)]
    return _run_sweep("v", v_grid, jobs, workers)
