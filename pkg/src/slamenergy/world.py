"""Synthetic fenced square, 2D LiDAR ray casting and noisy odometry."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import MissionConfig, leg_boundaries, mission_duration, robot_position
from .rng import keyed_rng

N_BEAMS = 360
LIDAR_STREAM = 1
ODOM_STREAM = 2


@dataclass(frozen=True)
class WorldMap:
    """Closed fence made of line segments, shape ``(n, 2, 2)``."""

    segments: np.ndarray
    resolution: float = 0.05

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        pts = self.segments.reshape(-1, 2)
        return pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max()

    def occupancy(self, x, y) -> np.ndarray:
        """1 where the point lies within half a resolution of the fence."""
        p = np.stack(np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float)), axis=-1)
        a, b = self.segments[:, 0], self.segments[:, 1]
        ab = b - a
        rel = p[..., None, :] - a
        s = np.clip(np.sum(rel * ab, axis=-1) / np.sum(ab * ab, axis=-1), 0.0, 1.0)
        dist = np.linalg.norm(rel - s[..., None] * ab, axis=-1).min(axis=-1)
        return (dist <= 0.5 * self.resolution).astype(int)

    def contains(self, point) -> bool:
        x0, y0, x1, y1 = self.bounds
        return bool(x0 < point[0] < x1 and y0 < point[1] < y1)


def build_square_world(L: float, resolution: float = 0.05) -> WorldMap:
    if not L > 0:
        raise ValueError(f"side length must be positive, got {L}")
    c = np.array([[0.0, 0.0], [L, 0.0], [L, L], [0.0, L]])
    return WorldMap(np.stack([c, np.roll(c, -1, axis=0)], axis=1), resolution)


@dataclass(frozen=True)
class RobotState:
    position: np.ndarray
    velocity: np.ndarray
    angular_velocity: np.ndarray
    acceleration: np.ndarray
    heading: float = 0.0

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity, self.angular_velocity, self.acceleration])


@dataclass(frozen=True)
class SensorNoiseModel:
    lidar_std: np.ndarray = field(default_factory=lambda: np.full(N_BEAMS, 0.01))
    odom_cov: np.ndarray = field(default_factory=lambda: np.eye(6) * 0.01**2)
    seed: int = 0

    def __post_init__(self):
        std = np.broadcast_to(np.asarray(self.lidar_std, dtype=float), (N_BEAMS,)).copy()
        cov = np.asarray(self.odom_cov, dtype=float)
        if np.any(std < 0):
            raise ValueError("lidar standard deviations must be non-negative")
        if cov.shape != (6, 6) or not np.allclose(cov, cov.T):
            raise ValueError("odometry covariance must be a symmetric 6x6 matrix")
        if np.linalg.eigvalsh(cov).min() < -1e-12:
            raise ValueError("odometry covariance must be positive semidefinite")
        object.__setattr__(self, "lidar_std", std)
        object.__setattr__(self, "odom_cov", cov)

    @classmethod
    def noiseless(cls, seed: int = 0) -> "SensorNoiseModel":
        return cls(np.zeros(N_BEAMS), np.zeros((6, 6)), seed)


@dataclass(frozen=True)
class LidarScan:
    """Ranges indexed by world-frame bearing in whole degrees."""

    ranges: np.ndarray
    k: int

    def __post_init__(self):
        r = np.asarray(self.ranges, dtype=float)
        if r.shape != (N_BEAMS,) or not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValueError("a scan holds 360 finite non-negative ranges")
        object.__setattr__(self, "ranges", r)


@dataclass(frozen=True)
class OdometryReading:
    acceleration: np.ndarray
    angular_velocity: np.ndarray
    k: int

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.acceleration, self.angular_velocity])


def beam_directions() -> np.ndarray:
    theta = np.deg2rad(np.arange(N_BEAMS))
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def ray_distances(origin, world: WorldMap) -> np.ndarray:
    """Distance along each world-frame beam to the nearest fence segment."""
    o = np.asarray(origin, dtype=float)[:2]
    dirs = beam_directions()
    a = world.segments[:, 0]
    seg = world.segments[:, 1] - a
    # o + t dir = a + s seg, solved with 2D cross products
    denom = dirs[:, None, 0] * seg[None, :, 1] - dirs[:, None, 1] * seg[None, :, 0]
    rel = a - o
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rel[None, :, 0] * seg[None, :, 1] - rel[None, :, 1] * seg[None, :, 0]) / denom
        s = (rel[None, :, 0] * dirs[:, None, 1] - rel[None, :, 1] * dirs[:, None, 0]) / denom
    hit = (denom != 0) & (t > 0) & (s >= 0) & (s <= 1)
    dist = np.where(hit, t, np.inf).min(axis=1)
    if not np.all(np.isfinite(dist)):
        raise ValueError("some beams escape the world; is the robot inside the fence?")
    return dist


def raycast_scan(state: RobotState, world: WorldMap, noise: SensorNoiseModel, k: int) -> LidarScan:
    if not world.contains(state.position):
        raise ValueError(f"robot position {state.position[:2]} is not strictly inside the fence")
    ranges = ray_distances(state.position, world)
    if np.any(noise.lidar_std > 0):
        ranges = ranges + noise.lidar_std * keyed_rng(noise.seed, LIDAR_STREAM, k).standard_normal(N_BEAMS)
    return LidarScan(np.maximum(ranges, 0.0), k)


def odometry_read(prev_state: RobotState, noise: SensorNoiseModel, k: int) -> OdometryReading:
    truth = np.concatenate([prev_state.acceleration, prev_state.angular_velocity])
    if not np.all(np.isfinite(truth)):
        raise ValueError("state must be finite")
    if np.any(noise.odom_cov != 0):
        truth = truth + keyed_rng(noise.seed, ODOM_STREAM, k).multivariate_normal(
            np.zeros(6), noise.odom_cov, method="eigh"
        )
    return OdometryReading(truth[:3].copy(), truth[3:].copy(), k)


def _heading(t, config, v):
    corners = leg_boundaries(config, v)
    return (np.pi / 2) * min(int(np.searchsorted(corners[1:4], t, side="right")), 3)


def robot_state(t: float, config: MissionConfig, v: float, dt: float) -> RobotState:
    """Kinematic state at ``t``; rates are averages over [t, t + dt].

    Turns at the corners are instantaneous, so acceleration and yaw rate are
    reported as the mean change over the coming period.  The robot is parked
    at its end point after the path is finished.
    """
    t_end = mission_duration(config, v)
    t0, t1 = min(t, t_end), min(t + dt, t_end)
    p0 = robot_position(t0, config, v)

    def vel(tt):
        if tt >= t_end:
            return np.zeros(2)
        h = _heading(tt, config, v)
        return v * np.array([np.cos(h), np.sin(h)])

    v0 = vel(t0)
    acc = (vel(t1) - v0) / dt
    h0 = _heading(t0, config, v)
    h1 = _heading(t1, config, v) if t1 < t_end else h0
    zero = np.zeros(1)
    return RobotState(
        position=np.concatenate([p0, zero]),
        velocity=np.concatenate([v0, zero]),
        angular_velocity=np.array([0.0, 0.0, (h1 - h0) / dt]),
        acceleration=np.concatenate([acc, zero]),
        heading=float(h0),
    )
