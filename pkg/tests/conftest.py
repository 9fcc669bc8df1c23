import numpy as np
import pytest

from maggait import gait, rig
from maggait.robot import RobotGeometry


@pytest.fixture(scope="session")
def default_rig():
    return rig.RigConfig()


@pytest.fixture(scope="session")
def wp_cone(default_rig):
    return rig.cone_parameters(default_rig, 0.0, default_rig.working_point)


@pytest.fixture(scope="session")
def calibrated_span(wp_cone):
    return gait.calibrate_foot_span(2.0e-3 / 1.2, wp_cone.pitch_theta, 72.0)


@pytest.fixture(scope="session")
def calibrated_robot(calibrated_span):
    return RobotGeometry().with_span(calibrated_span)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
