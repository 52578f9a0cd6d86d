import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slamenergy.channel import (
    ChannelModel,
    ChannelRealization,
    FramePayload,
    instantaneous_rate,
    link_mu,
    realize_channel,
    received_power,
    sample_channel,
    transmitted_bits,
)
from slamenergy.geometry import distance_to_ap, make_plan


def test_noise_power():
    assert ChannelModel().noise_power == pytest.approx(1e-7, rel=1e-15)


def test_payload_bits():
    assert FramePayload().bits == 360 * 64 + 6 * 64 == 23424
    with pytest.raises(ValueError):
        FramePayload(a1=0)


def test_deterministic_channel_is_unity():
    r = realize_channel(ChannelModel(deterministic=True), 50)
    np.testing.assert_array_equal(r.h_mag_sq, 1.0)
    assert len(r) == 51


def test_large_k_factor_limit():
    vals = [sample_channel(ChannelModel(rice_k=1e12), k) for k in range(1, 200)]
    np.testing.assert_allclose(vals, 1.0, atol=1e-5)


def test_rice_normalisation_monte_carlo():
    model = ChannelModel(rice_k=10.0, seed=7)
    draws = realize_channel(model, 100_000 - 1).h_mag_sq
    assert draws.mean() == pytest.approx(1.0, abs=0.02)
    assert np.all(draws > 0)


def test_rice_second_moment():
    # for Rice with E|h|^2 = 1: E|h|^4 = (K^2 + 4K + 2) / (K + 1)^2
    K = 10.0
    draws = realize_channel(ChannelModel(rice_k=K, seed=2), 100_000).h_mag_sq
    assert np.mean(draws**2) == pytest.approx((K**2 + 4 * K + 2) / (K + 1) ** 2, rel=0.01)


def test_channel_keyed_by_period():
    m = ChannelModel(seed=4)
    assert sample_channel(m, 9) == sample_channel(m, 9)
    assert realize_channel(m, 20).h_mag_sq[8] == sample_channel(m, 9)
    assert sample_channel(ChannelModel(seed=5), 9) != sample_channel(m, 9)


def test_realization_validation():
    with pytest.raises(ValueError):
        ChannelRealization(np.array([1.0, 0.0]))


def test_friis_examples():
    m = ChannelModel()
    assert received_power(1.0, 1.0, m) == pytest.approx(9.8946e-5, rel=1e-4)
    assert received_power(1.0, 1.0, m) == pytest.approx((0.125 / (4 * math.pi)) ** 2, rel=1e-14)
    assert received_power(0.01, 10.0, m) == pytest.approx(9.8946e-9, rel=1e-4)
    with pytest.raises(ValueError):
        received_power(1.0, 0.0, m)


def test_rate_and_mu_examples():
    m = ChannelModel()
    assert link_mu(m, 1.0) == pytest.approx(989.47, rel=1e-5)
    assert instantaneous_rate(1.0, 1.0, 1.0, m) == pytest.approx(9.952e7, rel=1e-4)
    assert instantaneous_rate(1e-300, 1.0, 1.0, m) == pytest.approx(0.0, abs=1e-200)


def test_single_subinterval_matches_closed_form(mission, opt_plan, det_model, det_realization):
    k, p = 37, 2e-3
    t_end = (k - 1 + opt_plan.rho) * opt_plan.t_sens
    d = distance_to_ap(t_end, mission, opt_plan.v)
    expected = det_model.B * math.log2(1 + p * link_mu(det_model, 1.0) / d**2) * opt_plan.t_comm
    got = transmitted_bits(k, p, opt_plan, mission, det_model, det_realization, n_sub=1)
    assert got == pytest.approx(expected, rel=1e-12)


def test_window_split_additivity(mission, det_model):
    # two half windows of rho = 0.5 with N_s each cover the full window with 2 N_s
    full = make_plan(mission, 1.91, 0.1, rho=1.0)
    real = realize_channel(det_model, full.n_periods)
    k, p, n = 10, 1e-3, 64
    whole = transmitted_bits(k, p, full, mission, det_model, real, 2 * n)
    first_half = transmitted_bits(k, p, make_plan(mission, 1.91, 0.1, rho=0.5), mission, det_model, real, n)
    assert first_half < whole
    assert first_half == pytest.approx(whole / 2, rel=0.05)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-6, 1.0), st.floats(1.01, 4.0), st.integers(2, 401))
def test_bits_increase_with_power(p, factor, k):
    from slamenergy.geometry import MissionConfig
    from slamenergy.planner import optimal_plan

    cfg = MissionConfig()
    plan = optimal_plan(cfg)
    model = ChannelModel(deterministic=True)
    real = realize_channel(model, plan.n_periods)
    lo = transmitted_bits(k, p, plan, cfg, model, real, 16)
    hi = transmitted_bits(k, p * factor, plan, cfg, model, real, 16)
    assert hi > lo > 0


def test_bits_increase_with_rho(mission, det_model):
    real = realize_channel(det_model, 400)
    vals = [
        transmitted_bits(50, 1e-3, make_plan(mission, 1.91, 0.1, rho=r), mission, det_model, real, 64)
        for r in (0.25, 0.5, 0.75, 1.0)
    ]
    assert np.all(np.diff(vals) > 0)


def test_period_range_and_power_checked(mission, opt_plan, det_model, det_realization):
    with pytest.raises(IndexError):
        transmitted_bits(1, 1e-3, opt_plan, mission, det_model, det_realization)
    with pytest.raises(ValueError):
        transmitted_bits(2, 0.0, opt_plan, mission, det_model, det_realization)


@pytest.mark.parametrize("kw", [dict(B=0), dict(noise_psd=-1), dict(n_nlos=0)])
def test_model_validation(kw):
    with pytest.raises(ValueError):
        ChannelModel(**kw)
