"""Minimum per-period transmit power, its closed-form upper bound, and a
numerical check that a full communication window is the cheapest choice."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import (
    ChannelModel,
    ChannelRealization,
    FramePayload,
    bits_from_gains,
    link_mu,
    window_distance_sq,
)
from .geometry import MissionConfig, SchedulePlan

P_START = 1e-6
P_CEILING = 1e3
DEFAULT_TOL = 1e-9
DEFAULT_N_SUB = 512


class PowerSolverError(RuntimeError):
    """The required power exceeds the ceiling or the residual check failed."""


@dataclass(frozen=True)
class PowerSolution:
    """Powers for periods k = 2 .. N_m + 1 (entry ``i`` is period ``i + 2``)."""

    powers: np.ndarray
    tol: float
    n_sub: int
    feasible: np.ndarray | None = None

    def __len__(self):
        return len(self.powers)

    @property
    def periods(self) -> np.ndarray:
        return np.arange(2, len(self.powers) + 2)

    @property
    def all_feasible(self) -> bool:
        return self.feasible is None or bool(np.all(self.feasible))


def solve_from_gains(
    beta: np.ndarray,
    payload_bits: float,
    B: float,
    dt: float,
    tol: float = DEFAULT_TOL,
    ceiling: float = P_CEILING,
    strict: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Smallest p per row of ``beta`` with sum_i B log2(1 + p beta_i) dt >= payload.

    ``beta`` has shape ``(K, n_sub)``.  The bracket is grown by doubling from
    1e-6 W up to ``ceiling`` and then bisected until it cannot shrink; the
    upper end is returned so the bit constraint is always met.  Returns the
    powers and a mask of rows that were feasible under the ceiling; rows that
    are not come back as ``ceiling``.
    """
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    K = beta.shape[0]

    def deficit(p, rows=slice(None)):
        return bits_from_gains(p, beta[rows], B, dt) - payload_bits

    hi = np.full(K, P_START)
    lo = np.zeros(K)
    open_rows = deficit(hi) < 0
    feasible = np.ones(K, dtype=bool)
    while np.any(open_rows):
        idx = np.flatnonzero(open_rows)
        capped = hi[idx] >= ceiling
        feasible[idx[capped]] = False
        idx = idx[~capped]
        lo[idx] = hi[idx]
        hi[idx] = np.minimum(2 * hi[idx], ceiling)
        open_rows[:] = False
        if idx.size:
            open_rows[idx] = deficit(hi[idx], idx) < 0
    if strict and not feasible.all():
        raise PowerSolverError(
            f"{int((~feasible).sum())} period(s) need more than the {ceiling} W ceiling"
        )

    active = feasible.copy()
    for _ in range(2200):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        mid = 0.5 * (lo[idx] + hi[idx])
        done = (mid <= lo[idx]) | (mid >= hi[idx])
        active[idx[done]] = False
        idx, mid = idx[~done], mid[~done]
        if idx.size == 0:
            break
        upper = deficit(mid, idx) >= 0
        hi[idx[upper]] = mid[upper]
        lo[idx[~upper]] = mid[~upper]

    hi[~feasible] = ceiling
    if feasible.any():
        residual = np.abs(deficit(hi[feasible], feasible)) / payload_bits
        if np.any(residual > tol):
            raise PowerSolverError(f"bit residual {residual.max():.3e} above tolerance {tol:.1e}")
    return hi, feasible


def period_gains(ks, plan, config, model, realization, n_sub) -> np.ndarray:
    """mu_k / d^2 at each sub-interval sample of each requested period."""
    ks = np.atleast_1d(np.asarray(ks))
    if np.any(ks < 2) or np.any(ks > plan.n_periods + 1):
        raise IndexError(f"periods must lie in 2..{plan.n_periods + 1}")
    if len(realization) < plan.n_periods + 1:
        raise ValueError(f"realization covers {len(realization)} periods, plan needs {plan.n_periods + 1}")
    mu = link_mu(model, realization.gain(ks))
    return mu[:, None] / window_distance_sq(ks, plan, config, n_sub)


def solve_period_powers(
    plan: SchedulePlan,
    config: MissionConfig,
    model: ChannelModel,
    realization: ChannelRealization,
    payload: FramePayload,
    n_sub: int = DEFAULT_N_SUB,
    tol: float = DEFAULT_TOL,
    strict: bool = True,
) -> PowerSolution:
    """Solve the minimum power of every period k = 2 .. N_m + 1."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    ks = np.arange(2, plan.n_periods + 2)
    if ks.size == 0:
        return PowerSolution(np.zeros(0), tol, n_sub, np.ones(0, dtype=bool))
    beta = period_gains(ks, plan, config, model, realization, n_sub)
    powers, feasible = solve_from_gains(beta, payload.bits, model.B, plan.t_comm / n_sub, tol, strict=strict)
    return PowerSolution(powers, tol, n_sub, feasible)


def solve_period_power(
    k: int,
    plan: SchedulePlan,
    config: MissionConfig,
    model: ChannelModel,
    realization: ChannelRealization,
    payload: FramePayload,
    n_sub: int = DEFAULT_N_SUB,
    tol: float = DEFAULT_TOL,
) -> float:
    """Minimum power for period ``k`` alone; raises PowerSolverError if infeasible."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    beta = period_gains([k], plan, config, model, realization, n_sub)
    powers, _ = solve_from_gains(beta, payload.bits, model.B, plan.t_comm / n_sub, tol)
    return float(powers[0])


def xi(config: MissionConfig, payload: FramePayload, B: float) -> float:
    """Exponent rate such that 2^(xi v) - 1 sets the upper-bound power (s/m)."""
    return payload.bits * config.N_D / (4 * B * config.side)


def upper_bound_power(v, d_max, mu, xi_value: float):
    """(2^(xi v) - 1) d_max^2 / mu, the power that covers the worst distance."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0) or np.any(np.asarray(d_max) <= 0) or np.any(np.asarray(mu) <= 0):
        raise ValueError("upper_bound_power needs positive v, d_max and mu")
    return np.expm1(xi_value * v * math.log(2)) * np.asarray(d_max) ** 2 / mu


@dataclass(frozen=True)
class DutyRatioReport:
    rho_grid: np.ndarray
    e_comm: np.ndarray
    verdict: bool
    params: dict


def comm_energy(solution: PowerSolution, plan: SchedulePlan) -> float:
    return float(np.sum(solution.powers) * plan.t_comm)


def verify_full_window_optimal(
    plan: SchedulePlan,
    config: MissionConfig,
    model: ChannelModel,
    realization: ChannelRealization,
    payload: FramePayload,
    rho_grid,
    n_sub: int = DEFAULT_N_SUB,
    tol: float = DEFAULT_TOL,
) -> DutyRatioReport:
    """Solve all period powers for each duty ratio and check that the
    communication energy falls strictly as rho grows.

    The shortened window always starts at the beginning of its period.
    """
    rho_grid = np.asarray(rho_grid, dtype=float)
    if rho_grid.ndim != 1 or rho_grid.size == 0:
        raise ValueError("rho_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(rho_grid) <= 0) or rho_grid[0] <= 0 or rho_grid[-1] > 1:
        raise ValueError("rho_grid must be strictly increasing inside (0, 1]")
    energies = []
    for rho in rho_grid:
        p = replace(plan, rho=float(rho))
        energies.append(comm_energy(solve_period_powers(p, config, model, realization, payload, n_sub, tol), p))
    energies = np.array(energies)
    verdict = bool(np.all(np.diff(energies) < 0)) and int(np.argmin(energies)) == len(energies) - 1
    params = dict(v=plan.v, t_sens=plan.t_sens, n_periods=plan.n_periods, n_sub=n_sub, payload_bits=payload.bits)
    return DutyRatioReport(rho_grid, energies, verdict, params)
