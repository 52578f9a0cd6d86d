"""Drive the robot around the arena and collect one record per sensing period."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import MissionConfig, SchedulePlan
from .mapping import (
    GridSpec,
    MapLosses,
    MapMetricsConfig,
    OccupancyGrid,
    PoseEstimate,
    dead_reckon,
    map_iou,
    map_losses,
    rasterize_occupancy,
    sample_free_space,
    to_global,
)
from .world import LidarScan, OdometryReading, SensorNoiseModel, WorldMap, odometry_read, raycast_scan, robot_state


@dataclass(frozen=True)
class ScanRecord:
    k: int
    scan: LidarScan
    odometry: OdometryReading
    pose: tuple[float, float, float]  # ground truth x, y, heading


def simulate_record(k: int, plan: SchedulePlan, config: MissionConfig, world: WorldMap, noise: SensorNoiseModel):
    """Scan ``k`` is taken at (k - 1) t_sens; its odometry reading describes
    the period that ended there."""
    dt = plan.t_sens
    state = robot_state((k - 1) * dt, config, plan.v, dt)
    prev = robot_state(max(k - 2, 0) * dt, config, plan.v, dt)
    scan = raycast_scan(state, world, noise, k)
    odom = odometry_read(prev, noise, k)
    return ScanRecord(k, scan, odom, (float(state.position[0]), float(state.position[1]), state.heading))


def simulate_mission(
    plan: SchedulePlan, config: MissionConfig, world: WorldMap, noise: SensorNoiseModel, workers: int = 1
) -> list[ScanRecord]:
    """Records for periods 1 .. N_m; identical for any ``workers``."""
    ks = range(1, plan.n_periods + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda k: simulate_record(k, plan, config, world, noise), ks))
    return [simulate_record(k, plan, config, world, noise) for k in ks]


def mapping_poses(records, plan: SchedulePlan, config: MissionConfig, source: str = "truth") -> list[PoseEstimate]:
    """Sensor poses for mapping.

    Scans are already world-aligned, so the sensor frame has zero rotation
    whatever the robot heading; only the position is estimated.
    """
    if source == "truth":
        return [PoseEstimate(r.pose[0], r.pose[1], 0.0) for r in records]
    if source == "dead_reckoning":
        start = robot_state(0.0, config, plan.v, plan.t_sens)
        first = records[0].pose
        est = dead_reckon(
            [r.odometry for r in records], PoseEstimate(first[0], first[1], first[2]), start.velocity, plan.t_sens
        )
        return [PoseEstimate(p.x, p.y, 0.0) for p in est]
    raise ValueError(f"unknown pose source {source!r}")


@dataclass(frozen=True)
class MapEvaluation:
    grid: OccupancyGrid
    losses: MapLosses
    iou: float


def evaluate_map(
    records,
    poses,
    world: WorldMap,
    metrics: MapMetricsConfig = MapMetricsConfig(),
    resolution: float = 0.05,
    threshold: float = 0.5,
) -> MapEvaluation:
    clouds = [to_global(r.scan, p) for r, p in zip(records, poses)]
    free = [sample_free_space(r.scan, p, metrics.free_spacing) for r, p in zip(records, poses)]
    grid = rasterize_occupancy(clouds, free, GridSpec.for_world(world, resolution))
    return MapEvaluation(grid, map_losses(grid, clouds, free, metrics), map_iou(grid, world, threshold))


def scan_point_spacing(cloud) -> float:
    """Mean gap between angularly adjacent returns of one scan."""
    pts = cloud.points
    return float(np.mean(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)))
