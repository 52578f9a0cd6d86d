"""Arena geometry for the perimeter-following mission.

The arena is the square [0, L] x [0, L] with the access point at the corner
(0, 0).  The robot starts at (e, e), drives along +x and follows the square
inset by ``e`` counterclockwise until it is back at the start corner.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Relative slack used when a floating quotient should be an exact integer
# (e.g. 76.4 / (1.91 * 0.1)) or a time should equal the mission end.
_INT_GUARD = 1e-9
_TIME_GUARD = 1e-12


@dataclass(frozen=True)
class MissionConfig:
    """Arena and timing constraints of one mapping mission."""

    L: float = 20.0
    e: float = 0.45
    T_max: float = 40.0
    N_D: int = 400
    t_sens_range: tuple[float, float] = (0.06, 0.2)

    def __post_init__(self):
        if not (self.e > 0 and self.L > 2 * self.e):
            raise ValueError(f"need L > 2e > 0, got L={self.L}, e={self.e}")
        if not self.T_max > 0:
            raise ValueError(f"T_max must be positive, got {self.T_max}")
        if int(self.N_D) != self.N_D or self.N_D < 1:
            raise ValueError(f"N_D must be an integer >= 1, got {self.N_D}")
        lo, hi = self.t_sens_range
        if not 0 < lo <= hi:
            raise ValueError(f"invalid t_sens_range {self.t_sens_range}")

    @property
    def side(self) -> float:
        """Length of one leg of the inset square, L - 2e."""
        return self.L - 2 * self.e

    @property
    def path_length(self) -> float:
        return 4 * (self.L - 2 * self.e)


@dataclass(frozen=True)
class SchedulePlan:
    """Speed, sensing period and duty ratio plus the derived period count."""

    v: float
    t_sens: float
    rho: float
    n_periods: int
    path_length: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"speed must be positive, got {self.v}")
        if not self.t_sens > 0:
            raise ValueError(f"t_sens must be positive, got {self.t_sens}")
        if not 0 < self.rho <= 1:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")

    @property
    def t_comm(self) -> float:
        return self.rho * self.t_sens

    @property
    def mission_time(self) -> float:
        return self.path_length / self.v


def _guarded_floor(x: float) -> int:
    n = round(x)
    if abs(x - n) <= _INT_GUARD * max(1.0, abs(x)):
        return int(n)
    return math.floor(x)


def period_count(config: MissionConfig, v: float, t_sens: float) -> int:
    """Number of full sensing periods, floor(4(L - 2e) / (v t_sens)).

    Quotients within 1e-9 relative of an integer are rounded to it so that
    exact-division cases survive floating point.
    """
    if not v > 0:
        raise ValueError(f"speed must be positive, got {v}")
    if not t_sens > 0:
        raise ValueError(f"t_sens must be positive, got {t_sens}")
    return _guarded_floor(config.path_length / (v * t_sens))


def make_plan(config: MissionConfig, v: float, t_sens: float, rho: float = 1.0) -> SchedulePlan:
    return SchedulePlan(
        v=float(v),
        t_sens=float(t_sens),
        rho=float(rho),
        n_periods=period_count(config, v, t_sens),
        path_length=config.path_length,
    )


def mission_duration(config: MissionConfig, v: float) -> float:
    return config.path_length / v


def _check_times(t, config: MissionConfig, v: float) -> np.ndarray:
    if not v > 0:
        raise ValueError(f"speed must be positive, got {v}")
    t = np.asarray(t, dtype=float)
    t_end = mission_duration(config, v)
    if np.any(t < 0) or np.any(t > t_end * (1 + _TIME_GUARD)):
        raise ValueError(f"time outside mission duration [0, {t_end}]")
    return np.minimum(t, t_end)


def leg_boundaries(config: MissionConfig, v: float) -> np.ndarray:
    """Instants at which the robot turns a corner, including start and end."""
    return np.arange(5) * config.side / v


def robot_position(t, config: MissionConfig, v: float) -> np.ndarray:
    """Position on the inset square at time ``t``; shape ``(..., 2)``."""
    t = _check_times(t, config, v)
    side, e = config.side, config.e
    s = v * t
    leg = np.minimum(np.floor(s / side), 3).astype(int)
    u = s - leg * side
    corners = np.array([[e, e], [e + side, e], [e + side, e + side], [e, e + side]])
    headings = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    return corners[leg] + u[..., None] * headings[leg]


def distance_to_ap(t, config: MissionConfig, v: float):
    """Robot to access-point distance, evaluated with the four-piece formula."""
    t = _check_times(t, config, v)
    L, e = config.L, config.e
    b1, b2, b3 = (np.arange(1, 4) * config.side / v)
    vt = v * t
    pieces = [
        np.sqrt((vt + e) ** 2 + e**2),
        np.sqrt((vt - L + 3 * e) ** 2 + (L - e) ** 2),
        np.sqrt((3 * L - 5 * e - vt) ** 2 + (L - e) ** 2),
        np.sqrt((4 * L - 7 * e - vt) ** 2 + e**2),
    ]
    out = np.select([t < b1, t < b2, t < b3], pieces[:3], pieces[3])
    return out if out.ndim else float(out)


def parked_distance(t, config: MissionConfig, v: float) -> np.ndarray:
    """Distance with the robot parked at its end point after the mission ends.

    The final communication window may run past the end of the path; the
    robot then sits at (e, e).
    """
    t = np.asarray(t, dtype=float)
    t_end = mission_duration(config, v)
    return np.asarray(distance_to_ap(np.clip(t, 0.0, t_end), config, v))


def max_distance_in_window(k: int, plan: SchedulePlan, config: MissionConfig, n_grid: int = 64) -> float:
    """Largest access-point distance over period ``k``'s communication window.

    The window is [(k-1) t_sens, (k-1) t_sens + rho t_sens].  The distance is
    sampled on a uniform grid plus every corner instant inside the window.
    """
    if not 2 <= k <= plan.n_periods + 1:
        raise IndexError(f"period {k} outside 2..{plan.n_periods + 1}")
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    start = (k - 1) * plan.t_sens
    stop = start + plan.t_comm
    times = np.linspace(start, stop, n_grid)
    corners = leg_boundaries(config, plan.v)
    inside = corners[(corners > start) & (corners < stop)]
    return float(np.max(parked_distance(np.concatenate([times, inside]), config, plan.v)))
