"""CSV tables, the scan dataset, occupancy-grid export and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .mapping import GridSpec, OccupancyGrid
from .mission import ScanRecord
from .world import N_BEAMS, LidarScan, OdometryReading


def fmt(value) -> str:
    """17 significant digits, enough to round-trip any float64 exactly."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


SCAN_HEADER = (
    ["k"]
    + [f"range_world_deg_{i}" for i in range(N_BEAMS)]
    + ["odom_ax", "odom_ay", "odom_az", "odom_wx", "odom_wy", "odom_wz"]
    + ["true_x", "true_y", "true_heading"]
)


def write_dataset(path, records) -> Path:
    """One row per sensing period; ranges are indexed by world-frame bearing."""
    rows = (
        [r.k, *r.scan.ranges, *r.odometry.as_vector(), *r.pose]
        for r in records
    )
    return write_csv(path, SCAN_HEADER, rows)


def read_dataset(path) -> list[ScanRecord]:
    header, rows = read_csv(path)
    if header != SCAN_HEADER:
        raise ValueError(f"{path}: not a scan dataset (unexpected header)")
    records = []
    for lineno, row in enumerate(rows, 2):
        if len(row) != len(SCAN_HEADER):
            raise ValueError(f"{path}:{lineno}: expected {len(SCAN_HEADER)} fields, got {len(row)}")
        k = int(row[0])
        if not 0 <= k < 2**32:
            raise ValueError(f"{path}:{lineno}: period index out of range")
        vals = np.array([float(x) for x in row[1:]])
        ranges, odom, pose = vals[:N_BEAMS], vals[N_BEAMS : N_BEAMS + 6], vals[N_BEAMS + 6 :]
        records.append(
            ScanRecord(
                k,
                LidarScan(ranges, k),
                OdometryReading(odom[:3], odom[3:], k),
                (float(pose[0]), float(pose[1]), float(pose[2])),
            )
        )
    return records


def write_grid(path, grid: OccupancyGrid) -> Path:
    """Text export: ``origin_x origin_y resolution width height`` then one
    line of probabilities per grid row, starting at the origin row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    s = grid.spec
    lines = [" ".join([fmt(s.origin[0]), fmt(s.origin[1]), fmt(s.resolution), str(s.width), str(s.height)])]
    lines += [" ".join(fmt(p) for p in row) for row in grid.prob]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_grid(path) -> OccupancyGrid:
    lines = Path(path).read_text().splitlines()
    ox, oy, res, width, height = lines[0].split()
    prob = np.array([[float(x) for x in line.split()] for line in lines[1:]])
    spec = GridSpec((float(ox), float(oy)), float(res), int(width), int(height))
    if prob.shape != (spec.height, spec.width):
        raise ValueError(f"{path}: grid body does not match its {spec.width}x{spec.height} header")
    return OccupancyGrid(spec, prob)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, config, outputs, duration: float) -> Path:
    """Written after every other output so its checksums are final."""
    out_dir = Path(out_dir)
    manifest = {
        "config_sha256": config.digest(),
        "seed": config.seed,
        "version": __version__,
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
        "wall_clock_s": round(duration, 6),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
