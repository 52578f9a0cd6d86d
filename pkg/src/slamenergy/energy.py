"""Mechanical power, mission energy budget and the speed-dependent upper bound."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import MissionConfig, SchedulePlan
from .power import PowerSolution


@dataclass(frozen=True)
class MechanicalParams:
    kappa1: float = 0.003  # air resistance
    kappa2: float = 0.4  # rolling friction
    E_L: float = 0.025  # LiDAR energy per sensing cycle (J)

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "E_L"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")


@dataclass(frozen=True)
class EnergyBreakdown:
    E_comm: float
    E_lidar: float
    E_mech: float

    @property
    def E_total(self) -> float:
        return self.E_comm + self.E_lidar + self.E_mech

    def as_row(self) -> dict:
        return dict(E_comm=self.E_comm, E_LiDAR=self.E_lidar, E_mech=self.E_mech, E_total=self.E_total)


def mechanical_power(v, params: MechanicalParams):
    """Average drive power 0.5 kappa1 v^3 + kappa2 v (W)."""
    if np.any(np.asarray(v) < 0):
        raise ValueError("speed must be non-negative")
    return 0.5 * params.kappa1 * v**3 + params.kappa2 * v


def mechanical_energy(v: float, params: MechanicalParams, config: MissionConfig) -> float:
    """Drive power times travel time."""
    return mechanical_power(v, params) * (config.path_length / v)


def mechanical_energy_expanded(v, params: MechanicalParams, config: MissionConfig):
    """Same quantity written per metre of path: (0.5 kappa1 v^2 + kappa2) 4(L - 2e)."""
    return (0.5 * params.kappa1 * v**2 + params.kappa2) * config.path_length


def total_energy(
    plan: SchedulePlan, powers: PowerSolution, params: MechanicalParams, config: MissionConfig
) -> EnergyBreakdown:
    if len(powers) != plan.n_periods:
        raise ValueError(f"{len(powers)} powers supplied for {plan.n_periods} transmitting periods")
    return EnergyBreakdown(
        E_comm=float(np.sum(powers.powers) * plan.t_comm),
        E_lidar=plan.n_periods * params.E_L,
        E_mech=float(mechanical_energy(plan.v, params, config)),
    )


def link_sum(d_max, mu) -> float:
    """sum_k d_k,max^2 / mu_k over the N_D transmitting periods."""
    d_max, mu = np.asarray(d_max, dtype=float), np.asarray(mu, dtype=float)
    if d_max.shape != mu.shape:
        raise ValueError("d_max and mu must have the same shape")
    return float(np.sum(d_max**2 / mu))


def total_energy_upper_bound(
    v: float, config: MissionConfig, params: MechanicalParams, d_max, mu, xi_value: float
) -> float:
    """Mission energy with every period transmitting at its worst-case distance.

    ``d_max`` and ``mu`` are the per-period window maxima and link gains for
    k = 2 .. N_D + 1 and are held fixed while ``v`` varies.
    """
    if not v > 0:
        raise ValueError(f"speed must be positive, got {v}")
    comm = config.path_length / (v * config.N_D) * math.expm1(xi_value * v * math.log(2)) * link_sum(d_max, mu)
    return mechanical_energy_expanded(v, params, config) + config.N_D * params.E_L + comm


def derivative_numerator(v, config: MissionConfig, params: MechanicalParams, d_max, mu, xi_value: float):
    """Numerator of the bound's derivative; positive and increasing for v > 0."""
    v = np.asarray(v, dtype=float)
    x = xi_value * v * math.log(2)
    # (x - 1) e^x + 1 written to stay accurate for small x
    tail = x * np.expm1(x) - np.expm1(x) + x
    return v**3 * params.kappa1 * config.N_D + tail * link_sum(d_max, mu)


def upper_bound_derivative(
    v, config: MissionConfig, params: MechanicalParams, d_max, mu, xi_value: float
):
    """Analytic d/dv of :func:`total_energy_upper_bound`."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("speed must be positive")
    out = config.path_length * derivative_numerator(v, config, params, d_max, mu, xi_value) / (config.N_D * v**2)
    return out if out.ndim else float(out)
