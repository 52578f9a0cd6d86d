import numpy as np
import pytest

from slamenergy.channel import ChannelModel, FramePayload, realize_channel
from slamenergy.energy import MechanicalParams
from slamenergy.geometry import MissionConfig
from slamenergy.planner import optimal_plan


@pytest.fixture(scope="session")
def mission():
    return MissionConfig()


@pytest.fixture(scope="session")
def det_model():
    return ChannelModel(deterministic=True)


@pytest.fixture(scope="session")
def payload():
    return FramePayload()


@pytest.fixture(scope="session")
def mech():
    return MechanicalParams()


@pytest.fixture(scope="session")
def opt_plan(mission):
    return optimal_plan(mission)


@pytest.fixture(scope="session")
def det_realization(opt_plan, det_model):
    return realize_channel(det_model, opt_plan.n_periods)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
