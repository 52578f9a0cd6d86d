"""Run configuration: ``key = value`` text files with unit suffixes.

Example::

    # arena
    L = 20 m
    B = 10MHz
    noise_psd = -110dBm/Hz
    deterministic_channel = true

Omitted keys take the defaults of the reference setup.  Values without a
unit are read in SI base units.
"""
from __future__ import annotations

import dataclasses
import difflib
import hashlib
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .channel import ChannelModel, FramePayload
from .energy import MechanicalParams
from .geometry import MissionConfig
from .mapping import MapMetricsConfig
from .world import N_BEAMS, SensorNoiseModel


class ConfigError(ValueError):
    pass


_SCALE = {
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "km": 1e3},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6},
    "energy": {"j": 1.0, "mj": 1e-3},
    "psd": {"w/hz": 1.0, "mw/hz": 1e-3},
}
# logarithmic units: value in dB -> linear in the kind's base unit
_LOG = {
    "psd": {"dbm/hz": 1e-3, "dbw/hz": 1.0},
    "gain": {"db": 1.0, "dbi": 1.0},
}

# key -> kind: "int", "bool", "str", "float" (unitless) or a unit kind
_KINDS = {
    "L": "length",
    "e": "length",
    "T_max": "time",
    "N_D": "int",
    "t_sens_min": "time",
    "t_sens_max": "time",
    "B": "frequency",
    "wavelength": "length",
    "G_t": "gain",
    "G_r": "gain",
    "noise_psd": "psd",
    "rice_k": "gain",
    "n_nlos": "int",
    "deterministic_channel": "bool",
    "a1": "int",
    "a2": "int",
    "E_L": "energy",
    "kappa1": "float",
    "kappa2": "float",
    "lidar_std": "length",
    "odom_std": "float",
    "gamma": "float",
    "free_spacing": "length",
    "clamp_eps": "float",
    "grid_resolution": "length",
    "iou_threshold": "float",
    "pose_source": "str",
    "seed": "int",
    "n_sub_intervals": "int",
    "workers": "int",
    "out_dir": "str",
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


def _parse_value(key: str, raw: str):
    kind = _KINDS[key]
    text = raw.strip()
    if kind == "str":
        return text
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    m = _NUMBER.match(text)
    if not m:
        raise ConfigError(f"{key}: cannot parse number in {raw!r}")
    number, unit = float(m.group(1)), m.group(2).lower()
    if kind == "int":
        if unit or number != int(number):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(number)
    if not unit:
        return number
    if unit in _LOG.get(kind, {}):
        return 10 ** (number / 10) * _LOG[kind][unit]
    if unit in _SCALE.get(kind, {}):
        return number * _SCALE[kind][unit]
    allowed = sorted(set(_SCALE.get(kind, {})) | set(_LOG.get(kind, {})))
    raise ConfigError(f"{key}: unit {m.group(2)!r} not allowed here (use one of {allowed or 'no unit'})")


@dataclass(frozen=True)
class RunConfig:
    L: float = 20.0
    e: float = 0.45
    T_max: float = 40.0
    N_D: int = 400
    t_sens_min: float = 0.06
    t_sens_max: float = 0.2
    B: float = 1e7
    wavelength: float = 0.125
    G_t: float = 1.0
    G_r: float = 1.0
    noise_psd: float = 1e-14
    rice_k: float = 10.0
    n_nlos: int = 8
    deterministic_channel: bool = False
    a1: int = 64
    a2: int = 64
    E_L: float = 0.025
    kappa1: float = 0.003
    kappa2: float = 0.4
    lidar_std: float = 0.01
    odom_std: float = 0.01
    gamma: float = 1.0
    free_spacing: float = 0.1
    clamp_eps: float = 1e-7
    grid_resolution: float = 0.05
    iou_threshold: float = 0.5
    pose_source: str = "truth"
    seed: int = 0
    n_sub_intervals: int = 512
    workers: int = 1
    out_dir: str = ""

    def __post_init__(self):
        try:
            self.mission
            self.channel
            self.payload
            self.mechanical
            self.noise
            self.metrics
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.n_sub_intervals < 1:
            raise ConfigError("n_sub_intervals must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.grid_resolution <= 0:
            raise ConfigError("grid_resolution must be positive")
        if not 0 < self.iou_threshold < 1:
            raise ConfigError("iou_threshold must lie in (0, 1)")
        if self.pose_source not in ("truth", "dead_reckoning"):
            raise ConfigError("pose_source must be 'truth' or 'dead_reckoning'")

    @property
    def mission(self) -> MissionConfig:
        return MissionConfig(self.L, self.e, self.T_max, self.N_D, (self.t_sens_min, self.t_sens_max))

    @property
    def channel(self) -> ChannelModel:
        return ChannelModel(
            self.B, self.wavelength, self.G_t, self.G_r, self.noise_psd, self.rice_k,
            self.n_nlos, self.seed, self.deterministic_channel,
        )

    @property
    def payload(self) -> FramePayload:
        return FramePayload(self.a1, self.a2)

    @property
    def mechanical(self) -> MechanicalParams:
        return MechanicalParams(self.kappa1, self.kappa2, self.E_L)

    @property
    def noise(self) -> SensorNoiseModel:
        if self.lidar_std < 0 or self.odom_std < 0:
            raise ValueError("noise standard deviations must be non-negative")
        return SensorNoiseModel(np.full(N_BEAMS, self.lidar_std), np.eye(6) * self.odom_std**2, self.seed)

    @property
    def metrics(self) -> MapMetricsConfig:
        return MapMetricsConfig(self.gamma, self.free_spacing, self.clamp_eps)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def canonical(self) -> str:
        """Stable text form; ``out_dir`` and ``workers`` do not affect results."""
        items = []
        for f in fields(self):
            if f.name in ("out_dir", "workers"):
                continue
            val = getattr(self, f.name)
            items.append(f"{f.name}={val!r}")
        return "\n".join(items)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _KINDS:
            close = difflib.get_close_matches(key, list(_KINDS), n=1)
            hint = f"; did you mean {close[0]!r}?" if close else ""
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}{hint}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    for key, val in values.items():
        if isinstance(val, float) and not math.isfinite(val):
            raise ConfigError(f"{source}: {key} must be finite")
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))
