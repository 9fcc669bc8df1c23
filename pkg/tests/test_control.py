import numpy as np
import pytest

from maggait import quat
from maggait.control import (
    SteeringSchedule,
    WaypointCursor,
    WaypointPlan,
    bearing_to,
    heading_of,
    waypoint_controller,
)
from maggait.robot import Anchor, RobotGeometry, RobotState, SurfacePlane

FLOOR = SurfacePlane(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]))


def state_with_heading(heading_deg: float) -> RobotState:
    q = quat.from_axis_angle(np.array([0.0, 1.0, 0.0]), np.radians(heading_deg))
    return RobotState(reference_position=np.zeros(3), orientation=q, anchor=Anchor.FR)


def test_schedule_interp():
    s = SteeringSchedule(points=((0.0, 0.0), (2.0, 40.0)))
    assert s.beta_at(-1.0) == 0.0
    assert s.beta_at(1.0) == pytest.approx(20.0)
    assert s.beta_at(5.0) == 40.0
    assert SteeringSchedule().beta_at(3.0) == 0.0
    with pytest.raises(ValueError):
        SteeringSchedule(points=((2.0, 0.0), (1.0, 1.0)))


def test_heading_identity_is_zero():
    assert heading_of(state_with_heading(0.0), FLOOR) == pytest.approx(0.0)


def test_heading_matches_yaw():
    for h in (-120.0, -30.0, 15.0, 90.0):
        assert heading_of(state_with_heading(h), FLOOR) == pytest.approx(h, abs=1e-9)


def test_heading_degenerate_raises():
    q = quat.minimal_rotation(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    vertical = RobotState(reference_position=np.zeros(3), orientation=q)
    with pytest.raises(ValueError):
        heading_of(vertical, FLOOR)


def test_bearing():
    assert bearing_to(np.zeros(3), (0.01, 0.0)) == pytest.approx(0.0)
    assert bearing_to(np.zeros(3), (0.0, -0.01)) == pytest.approx(90.0)
    assert abs(bearing_to(np.zeros(3), (-0.01, 0.0))) == pytest.approx(180.0)


def test_plan_validation():
    with pytest.raises(ValueError):
        WaypointPlan(waypoints=())
    with pytest.raises(ValueError):
        WaypointPlan(waypoints=((0.0, 0.0), (0.0, 0.0)))


def test_controller_holds_when_aligned():
    plan = WaypointPlan(waypoints=((0.05, 0.0),))
    cursor = WaypointCursor()
    state = state_with_heading(0.0)
    beta = 0.0
    for _ in range(400):  # more than one alpha cycle of steps
        beta = waypoint_controller(state, plan, cursor, beta, 1.0 / 432, FLOOR, RobotGeometry())
    assert beta == 0.0  # no chattering while the bearing error is inside tolerance


def test_controller_slews_toward_bearing():
    plan = WaypointPlan(waypoints=((0.0, -0.05),), slew_rate=30.0)
    cursor = WaypointCursor()
    state = state_with_heading(0.0)
    dt = 0.1
    beta = 0.0
    rates = []
    for _ in range(50):
        new_beta = waypoint_controller(state, plan, cursor, beta, dt, FLOOR, RobotGeometry())
        rates.append((new_beta - beta) / dt)
        beta = new_beta
    assert beta == pytest.approx(90.0, abs=plan.heading_tolerance + 1e-9)
    assert max(rates) <= 30.0 + 1e-9


def test_controller_arrival_advances_cursor():
    plan = WaypointPlan(waypoints=((0.0001, 0.0), (0.05, 0.0)))
    cursor = WaypointCursor()
    state = state_with_heading(0.0)  # at origin, within tolerance of wp0
    waypoint_controller(state, plan, cursor, 0.0, 0.01, FLOOR, RobotGeometry())
    assert cursor.index == 1


def test_controller_timeout():
    plan = WaypointPlan(waypoints=((0.05, 0.0),), step_budget=3)
    cursor = WaypointCursor()
    state = state_with_heading(0.0)
    for _ in range(5):
        waypoint_controller(state, plan, cursor, 0.0, 0.01, FLOOR, RobotGeometry())
    assert cursor.timed_out


def test_heading_invariant_over_full_cycle(calibrated_robot, wp_cone):
    # a pure alpha oscillation leaves no net yaw once the cycle closes
    from maggait import gait

    _, state = gait.run_cone_cycle(calibrated_robot, wp_cone, 72.0)
    assert heading_of(state, FLOOR, calibrated_robot) == pytest.approx(0.0, abs=0.5)
