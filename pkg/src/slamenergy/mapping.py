"""Deterministic map building from scans and the reconstruction losses used
to score it.

Pose and occupancy come from ground truth (or dead reckoning) plus a
counting occupancy grid instead of learned networks; the classification and
Chamfer losses are evaluated on that grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .world import N_BEAMS, LidarScan, OdometryReading, WorldMap


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    k: int = 0
    beams: np.ndarray | None = None  # beam index of each point, when known

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)
        if self.beams is not None:
            object.__setattr__(self, "beams", np.asarray(self.beams, dtype=int))

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class PoseEstimate:
    x: float
    y: float
    heading: float = 0.0


@dataclass(frozen=True)
class MapMetricsConfig:
    gamma: float = 1.0
    free_spacing: float = 0.1
    clamp_eps: float = 1e-7
    squared_chamfer: bool = False
    # literal normalisation 1/(N+1) over N clouds, and j = i kept in the
    # temporal neighbourhood of the Chamfer term
    printed_normalisation: bool = True
    include_self_pair: bool = True

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")
        if not self.free_spacing > 0:
            raise ValueError("free-space spacing must be positive")
        if not 0 < self.clamp_eps < 0.5:
            raise ValueError("clamp_eps must lie in (0, 0.5)")


@dataclass(frozen=True)
class GridSpec:
    origin: tuple[float, float]
    resolution: float
    width: int
    height: int

    @classmethod
    def for_world(cls, world: WorldMap, resolution: float = 0.05) -> "GridSpec":
        """Grid covering the fence, shifted half a cell so that the walls at
        x = 0 and y = 0 run through cell centres."""
        x0, y0, x1, y1 = world.bounds
        ox, oy = x0 - resolution / 2, y0 - resolution / 2
        width = int(math.floor((x1 - ox) / resolution)) + 1
        height = int(math.floor((y1 - oy) / resolution)) + 1
        return cls((ox, oy), resolution, width, height)

    def cell_index(self, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row, column and in-bounds mask for each point."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        col = np.floor((pts[:, 0] - self.origin[0]) / self.resolution).astype(int)
        row = np.floor((pts[:, 1] - self.origin[1]) / self.resolution).astype(int)
        ok = (col >= 0) & (col < self.width) & (row >= 0) & (row < self.height)
        return row, col, ok


@dataclass(frozen=True)
class OccupancyGrid:
    spec: GridSpec
    prob: np.ndarray  # (height, width), row 0 at the origin side

    def query(self, points, eps: float | None = None) -> np.ndarray:
        """Occupancy probability at each point; 0.5 outside the grid."""
        row, col, ok = self.spec.cell_index(points)
        out = np.full(len(row), 0.5)
        out[ok] = self.prob[row[ok], col[ok]]
        if eps is not None:
            out = np.clip(out, eps, 1 - eps)
        return out


def to_global(scan: LidarScan, pose: PoseEstimate) -> PointCloud:
    theta = np.deg2rad(np.arange(N_BEAMS)) + pose.heading
    r = scan.ranges
    pts = np.stack([pose.x + r * np.cos(theta), pose.y + r * np.sin(theta)], axis=1)
    return PointCloud(pts, scan.k, np.arange(N_BEAMS))


def sample_free_space(scan: LidarScan, pose: PoseEstimate, spacing: float) -> PointCloud:
    """Points every ``spacing`` metres along each beam, short of the return.

    Neither the sensor origin nor the return point is included; a sample
    within 1e-9 spacing of the return counts as the return.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    theta = np.deg2rad(np.arange(N_BEAMS)) + pose.heading
    counts = np.maximum(np.ceil(scan.ranges / spacing - 1e-9).astype(int) - 1, 0)
    beam = np.repeat(np.arange(N_BEAMS), counts)
    step = np.concatenate([np.arange(1, c + 1) for c in counts]) if counts.sum() else np.zeros(0)
    radius = step * spacing
    pts = np.stack([pose.x + radius * np.cos(theta[beam]), pose.y + radius * np.sin(theta[beam])], axis=1)
    return PointCloud(pts, scan.k, beam)


def _tally(counts: np.ndarray, points, spec: GridSpec, keep=None):
    row, col, ok = spec.cell_index(points)
    if keep is not None:
        ok &= keep
    np.add.at(counts, (row[ok], col[ok]), 1)


def _outside_return_cell(occ: PointCloud, emp: PointCloud, spec: GridSpec) -> np.ndarray | None:
    """Mask of free samples that do not share a cell with their own beam's return."""
    if occ.beams is None or emp.beams is None:
        return None
    lookup = np.full(N_BEAMS, -1)
    lookup[occ.beams] = np.arange(len(occ))
    ret = lookup[emp.beams]
    r_row, r_col, _ = spec.cell_index(occ.points)
    f_row, f_col, _ = spec.cell_index(emp.points)
    same = (ret >= 0) & (f_row == r_row[ret]) & (f_col == r_col[ret])
    return ~same


def rasterize_occupancy(clouds, free, spec: GridSpec) -> OccupancyGrid:
    """Laplace-smoothed hit ratio (hits + 1) / (hits + misses + 2) per cell.

    When ``clouds`` and ``free`` pair up scan by scan and carry beam indices,
    a free sample is not counted in the cell holding its own beam's return.
    """
    if not clouds:
        raise ValueError("need at least one occupied point cloud")
    hits = np.zeros((spec.height, spec.width), dtype=np.int64)
    misses = np.zeros_like(hits)
    for cloud in clouds:
        _tally(hits, cloud.points, spec)
    paired = len(clouds) == len(free)
    for i, emp in enumerate(free):
        keep = _outside_return_cell(clouds[i], emp, spec) if paired else None
        _tally(misses, emp.points, spec, keep)
    return OccupancyGrid(spec, (hits + 1) / (hits + misses + 2))


def fence_mask(world: WorldMap, spec: GridSpec) -> np.ndarray:
    """Cells crossed by a fence segment, found by dense sampling along it."""
    mask = np.zeros((spec.height, spec.width), dtype=bool)
    for a, b in world.segments:
        n = int(np.ceil(np.linalg.norm(b - a) / (spec.resolution / 8))) + 1
        pts = a + np.linspace(0.0, 1.0, n)[:, None] * (b - a)
        row, col, ok = spec.cell_index(pts)
        mask[row[ok], col[ok]] = True
    return mask


def ground_truth_grid(world: WorldMap, spec: GridSpec) -> OccupancyGrid:
    return OccupancyGrid(spec, fence_mask(world, spec).astype(float))


def map_iou(grid: OccupancyGrid, world: WorldMap, threshold: float = 0.5) -> float:
    """Intersection over union of cells above ``threshold`` and fence cells."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    occupied = grid.prob > threshold
    truth = fence_mask(world, grid.spec)
    union = np.count_nonzero(occupied | truth)
    return np.count_nonzero(occupied & truth) / union if union else 0.0


def chamfer_distance(a: PointCloud, b: PointCloud, squared: bool = False) -> float:
    """Mean nearest-neighbour distance from a to b plus the same from b to a."""
    if not len(a) or not len(b):
        raise ValueError("chamfer distance needs two non-empty clouds")
    d_ab, _ = cKDTree(b.points).query(a.points)
    d_ba, _ = cKDTree(a.points).query(b.points)
    if squared:
        d_ab, d_ba = d_ab**2, d_ba**2
    return float(d_ab.mean() + d_ba.mean())


def bce(prob, label: int, eps: float) -> np.ndarray:
    p = np.asarray(prob, dtype=float)
    # clamp the probability of the true label so the loss never exceeds -ln eps
    q = p if label == 1 else 1 - p
    return -np.log(np.clip(q, eps, 1 - eps))


@dataclass(frozen=True)
class MapLosses:
    cls: float
    chamfer: float
    total: float


def map_losses(grid: OccupancyGrid, clouds, free, config: MapMetricsConfig = MapMetricsConfig(), window: int = 1):
    """Classification, Chamfer and combined reconstruction losses.

    The classification loss averages BCE over each cloud's points (label 1)
    and free samples (label 0) and sums over scans; the Chamfer loss sums
    over each scan and its temporal neighbours within ``window``.
    """
    if len(clouds) != len(free):
        raise ValueError("one free-space cloud per scan is required")
    n = len(clouds)
    eps = config.clamp_eps
    cls_sum = 0.0
    for occ, emp in zip(clouds, free):
        cls_sum += bce(grid.query(occ.points), 1, eps).mean()
        if len(emp):
            cls_sum += bce(grid.query(emp.points), 0, eps).mean()
    l_cls = cls_sum / ((n + 1) if config.printed_normalisation else max(n, 1))

    l_ch = 0.0
    for i in range(n):
        for j in range(max(0, i - window), min(n, i + window + 1)):
            if j == i and not config.include_self_pair:
                continue
            l_ch += chamfer_distance(clouds[i], clouds[j], config.squared_chamfer)
    return MapLosses(l_cls, l_ch, l_ch + config.gamma * l_cls)


def dead_reckon(
    readings: list[OdometryReading],
    start: PoseEstimate,
    start_velocity,
    dt: float,
) -> list[PoseEstimate]:
    """Integrate odometry into poses, one per reading.

    Reading ``k`` describes the motion during the period before scan ``k``;
    the first reading is only used to anchor the start pose.  Accelerations
    are world-frame; position uses the trapezoid rule on velocity.
    """
    poses = [start]
    x, y, h = start.x, start.y, start.heading
    vel = np.asarray(start_velocity, dtype=float)[:2].copy()
    for reading in readings[1:]:
        new_vel = vel + reading.acceleration[:2] * dt
        x, y = np.array([x, y]) + 0.5 * (vel + new_vel) * dt
        h += reading.angular_velocity[2] * dt
        vel = new_vel
        poses.append(PoseEstimate(float(x), float(y), float(h)))
    return poses
