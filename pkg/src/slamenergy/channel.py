"""Wireless link: Rician fading draws, Friis received power and the
per-period data amount the robot can push through the link."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import MissionConfig, SchedulePlan, parked_distance
from .rng import keyed_rng

CHANNEL_STREAM = 3


@dataclass(frozen=True)
class ChannelModel:
    B: float = 1e7
    wavelength: float = 0.125
    G_t: float = 1.0
    G_r: float = 1.0
    noise_psd: float = 1e-14
    rice_k: float = 10.0
    n_nlos: int = 8
    seed: int = 0
    deterministic: bool = False

    def __post_init__(self):
        for name in ("B", "wavelength", "G_t", "G_r", "noise_psd", "rice_k"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_nlos < 1:
            raise ValueError(f"n_nlos must be >= 1, got {self.n_nlos}")

    @property
    def noise_power(self) -> float:
        """sigma^2 = noise PSD times bandwidth (W)."""
        return self.noise_psd * self.B


@dataclass(frozen=True)
class ChannelRealization:
    """|h_k|^2 for periods k = 1 .. N_m + 1 (entry ``k - 1`` is period k)."""

    h_mag_sq: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h_mag_sq, dtype=float)
        if h.ndim != 1 or np.any(~(h > 0)):
            raise ValueError("channel gains must be a 1-D array of positive values")
        object.__setattr__(self, "h_mag_sq", h)

    def __len__(self):
        return len(self.h_mag_sq)

    def gain(self, k) -> np.ndarray:
        return self.h_mag_sq[np.asarray(k) - 1]


@dataclass(frozen=True)
class FramePayload:
    a1: int = 64
    a2: int = 64
    n_ranges: int = field(default=360, repr=False)
    n_odometry: int = field(default=6, repr=False)

    def __post_init__(self):
        for name in ("a1", "a2"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val}")

    @property
    def bits(self) -> int:
        return self.n_ranges * self.a1 + self.n_odometry * self.a2


def sample_channel(model: ChannelModel, k: int) -> float:
    """|h_k|^2 for period ``k``, normalised so that E|h|^2 = 1.

    The LoS path carries K/(K+1) of the power and the NLoS part is the sum
    of ``n_nlos`` paths with Rayleigh amplitudes and uniform phases, which
    makes |h| exactly Rice distributed.
    """
    if model.deterministic or math.isinf(model.rice_k):
        return 1.0
    rng = keyed_rng(model.seed, CHANNEL_STREAM, k)
    K, m = model.rice_k, model.n_nlos
    los = math.sqrt(K / (K + 1))
    path_power = 1.0 / ((K + 1) * m)
    amps = rng.rayleigh(scale=math.sqrt(path_power / 2), size=m)
    phases = rng.uniform(0.0, 2 * math.pi, size=m)
    h = los + np.sum(amps * np.exp(1j * phases))
    return float(abs(h) ** 2)


def realize_channel(model: ChannelModel, n_periods: int) -> ChannelRealization:
    """Draw |h_k|^2 for k = 1 .. n_periods + 1."""
    return ChannelRealization(np.array([sample_channel(model, k) for k in range(1, n_periods + 2)]))


def received_power(p_tx, d, model: ChannelModel):
    """Free-space (Friis) received power in W."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return p_tx * model.G_t * model.G_r * model.wavelength**2 / (4 * math.pi * d) ** 2


def instantaneous_rate(p_tx, d, h_mag_sq, model: ChannelModel):
    """Shannon rate in bit/s with the fading gain on top of the Friis power."""
    snr = received_power(p_tx, d, model) * h_mag_sq / model.noise_power
    return model.B * np.log1p(snr) / math.log(2)


def link_mu(model: ChannelModel, h_mag_sq):
    """Aggregate link gain mu such that SNR = p_tx * mu / d^2."""
    return model.G_t * model.G_r * model.wavelength**2 * h_mag_sq / (model.noise_power * (4 * math.pi) ** 2)


def window_sample_times(ks, plan: SchedulePlan, n_sub: int) -> np.ndarray:
    """Right endpoints of the ``n_sub`` equal sub-intervals of each window.

    Returns an array of shape ``(len(ks), n_sub)``.
    """
    ks = np.atleast_1d(np.asarray(ks))
    frac = np.arange(1, n_sub + 1) / n_sub
    return ((ks[:, None] - 1) + plan.rho * frac[None, :]) * plan.t_sens


def window_distance_sq(ks, plan: SchedulePlan, config: MissionConfig, n_sub: int) -> np.ndarray:
    return parked_distance(window_sample_times(ks, plan, n_sub), config, plan.v) ** 2


def bits_from_gains(p_tx, beta: np.ndarray, B: float, dt: float) -> np.ndarray:
    """Riemann sum of B log2(1 + p beta_i) dt over the last axis of ``beta``.

    ``beta`` holds mu_k / d_i^2 per sub-interval and ``p_tx`` broadcasts
    against its leading axes.
    """
    p = np.asarray(p_tx, dtype=float)[..., None]
    return B * dt * np.sum(np.log1p(p * beta), axis=-1) / math.log(2)


def _check_period(k, plan: SchedulePlan):
    if not 2 <= k <= plan.n_periods + 1:
        raise IndexError(f"period {k} outside 2..{plan.n_periods + 1}")


def transmitted_bits(
    k: int,
    p_tx: float,
    plan: SchedulePlan,
    config: MissionConfig,
    model: ChannelModel,
    realization: ChannelRealization,
    n_sub: int = 512,
) -> float:
    """Bits delivered in period ``k`` at constant power ``p_tx``.

    Right-endpoint Riemann sum of the rate over the communication window
    [(k-1) t_sens, (k-1 + rho) t_sens] with ``n_sub`` equal sub-intervals.
    """
    _check_period(k, plan)
    if not p_tx > 0:
        raise ValueError(f"transmit power must be positive, got {p_tx}")
    if n_sub < 1:
        raise ValueError("n_sub must be >= 1")
    mu = link_mu(model, realization.gain(k))
    beta = mu / window_distance_sq([k], plan, config, n_sub)[0]
    return float(bits_from_gains(p_tx, beta, model.B, plan.t_comm / n_sub))
