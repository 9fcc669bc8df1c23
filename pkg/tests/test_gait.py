import numpy as np
import pytest

from maggait import gait, quat
from maggait.rig import ConeParameters
from maggait.robot import Anchor, RobotGeometry, SurfacePlane

FLOOR = SurfacePlane(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]))


def planar_chord_oracle(d, theta_deg, alpha_max_deg, steps=720):
    """Independent 2D oracle: rotate the foot pair about alternating anchors.

    Pure complex-plane arithmetic over the yaw sequence
    psi(alpha) = -atan(tan(theta) sin(alpha)); no quaternions, no shared code
    with the implementation under test.
    """
    tan_t = np.tan(np.radians(theta_deg))
    quarter = steps // 4
    seq = np.concatenate(
        [
            np.linspace(0.0, alpha_max_deg, quarter + 1)[1:],
            np.linspace(alpha_max_deg, -alpha_max_deg, 2 * quarter + 1)[1:],
            np.linspace(-alpha_max_deg, 0.0, quarter + 1)[1:],
        ]
    )
    # feet as complex numbers in the (x, z) plane: FR right of heading (+z)
    fl, fr = -0.5j * d, +0.5j * d
    yaw_prev = 0.0
    prev_alpha = 0.0
    anchor = "FR"
    for alpha in seq:
        new_anchor = "FR" if alpha > prev_alpha else ("FL" if alpha < prev_alpha else anchor)
        anchor = new_anchor
        yaw = -np.arctan(tan_t * np.sin(np.radians(alpha)))
        spin = np.exp(-1j * (yaw - yaw_prev))  # positive yaw turns x toward -z
        if anchor == "FR":
            fl = fr + (fl - fr) * spin
        else:
            fr = fl + (fr - fl) * spin
        yaw_prev = yaw
        prev_alpha = alpha
    mid = 0.5 * (fl + fr)
    return mid.real, mid.imag


@pytest.fixture(scope="module")
def cone66():
    return gait.synthetic_cone(66.0)


def test_gait_params_validation():
    with pytest.raises(ValueError):
        gait.GaitParams(alpha_max=-1.0)
    with pytest.raises(ValueError):
        gait.GaitParams(frequency=0.0)
    with pytest.raises(ValueError):
        gait.GaitParams(steps_per_cycle=7)
    with pytest.raises(ValueError):
        gait.GaitParams(waveform="square")


def test_waveforms():
    p = gait.GaitParams(alpha_max=72.0, frequency=1.0)
    assert p.alpha_at(0.0) == pytest.approx(0.0)
    assert p.alpha_at(0.25) == pytest.approx(72.0)
    assert p.alpha_at(0.5) == pytest.approx(0.0, abs=1e-12)
    assert p.alpha_at(0.75) == pytest.approx(-72.0)
    s = gait.GaitParams(alpha_max=72.0, frequency=1.0, waveform="sinusoidal")
    assert s.alpha_at(0.25) == pytest.approx(72.0)


def test_align_orientation_identity():
    q0 = quat.from_axis_angle(np.array([0.0, 1.0, 0.0]), 0.3)
    axis = np.array([1.0, 0.0, 0.0])
    B = quat.rotate(q0, axis) * 4.2e-3
    q1 = gait.align_orientation(q0, B, axis)
    np.testing.assert_allclose(q1, q0, atol=1e-15)


def test_align_orientation_maps_axis(rng):
    axis = np.array([1.0, 0.0, 0.0])
    q = quat.IDENTITY.copy()
    for _ in range(50):
        B = rng.normal(size=3)
        q = gait.align_orientation(q, B, axis)
        assert abs(np.linalg.norm(q) - 1.0) < 1e-12
        np.testing.assert_allclose(
            quat.rotate(q, axis), B / np.linalg.norm(B), atol=1e-9
        )


def test_align_orientation_small_rotations_commute():
    # the residual is the enclosed solid angle, second order in step size
    axis = np.array([1.0, 0.0, 0.0])
    q0 = quat.IDENTITY.copy()
    B1 = np.array([1.0, 0.001, 0.0])
    B2 = np.array([1.0, 0.001, 0.0012])
    two_step = gait.align_orientation(gait.align_orientation(q0, B1, axis), B2, axis)
    one_step = gait.align_orientation(q0, B2, axis)
    v = quat.rotate(two_step, np.array([0.0, 1.0, 0.0]))
    w = quat.rotate(one_step, np.array([0.0, 1.0, 0.0]))
    assert np.linalg.norm(v - w) < 1e-6


def test_anchor_rule():
    assert gait.anchor_rule(1) == Anchor.FR
    assert gait.anchor_rule(-1) == Anchor.FL
    assert gait.anchor_rule(0) is None


def test_step_pose_field_unchanged_is_identity(cone66, calibrated_robot):
    state = gait.standing_state(calibrated_robot, cone66, FLOOR, np.zeros(3))
    B = gait.cone_field(cone66, 0.0)
    stepped = gait.step_pose(state, B, Anchor.FR, FLOOR, calibrated_robot)
    np.testing.assert_allclose(stepped.reference_position, state.reference_position, atol=1e-15)
    np.testing.assert_allclose(stepped.orientation, state.orientation, atol=1e-15)


def test_anchored_foot_immobile(cone66, calibrated_robot):
    state = gait.standing_state(calibrated_robot, cone66, FLOOR, np.zeros(3))
    anchor_w = state.point_world(calibrated_robot.anchor_offset(Anchor.FR))
    worst = 0.0
    for alpha in np.linspace(0.0, 72.0, 100)[1:]:
        state = gait.step_pose(state, gait.cone_field(cone66, alpha), Anchor.FR, FLOOR, calibrated_robot)
        now = state.point_world(calibrated_robot.anchor_offset(Anchor.FR))
        worst = max(worst, float(np.linalg.norm(now - anchor_w)))
    assert worst < 1e-9


def test_body_axis_tracks_cone(cone66, calibrated_robot):
    state = gait.standing_state(calibrated_robot, cone66, FLOOR, np.zeros(3))
    for alpha in np.linspace(0.0, 72.0, 30)[1:]:
        B = gait.cone_field(cone66, alpha)
        state = gait.step_pose(state, B, Anchor.FR, FLOOR, calibrated_robot)
        axis = state.body_axis_world(calibrated_robot)
        np.testing.assert_allclose(axis, B / np.linalg.norm(B), atol=1e-9)
        assert abs(np.linalg.norm(state.orientation) - 1.0) < 1e-12


def test_stride_matches_planar_oracle(calibrated_robot):
    for theta, amax in [(66.0, 72.0), (52.0, 60.0), (39.0, 90.0), (60.0, 40.0)]:
        cone = gait.synthetic_cone(theta)
        disp, _ = gait.run_cone_cycle(calibrated_robot, cone, amax, steps=720)
        ox, oz = planar_chord_oracle(calibrated_robot.front_foot_span, theta, amax)
        assert disp[0] == pytest.approx(ox, rel=1e-6, abs=1e-12)
        assert abs(disp[2] - oz) < 1e-9


def test_stride_estimate_trivials():
    assert gait.stride_estimate(1e-3, 66.0, 0.0) == 0.0
    assert gait.stride_estimate(1e-3, 0.0, 72.0) == 0.0


def test_stride_cycle_height_returns(cone66, calibrated_robot):
    state0 = gait.standing_state(calibrated_robot, cone66, FLOOR, np.zeros(3))
    disp, state1 = gait.run_cone_cycle(calibrated_robot, cone66, 72.0, steps=360, start=state0)
    assert abs(disp[1]) < 1e-9  # reference height returns each full cycle
    np.testing.assert_allclose(state1.orientation, state0.orientation, atol=1e-12)


def test_stride_lateral_cancels(cone66, calibrated_robot):
    disp, _ = gait.run_cone_cycle(calibrated_robot, cone66, 72.0)
    assert abs(disp[2]) < 0.05 * abs(disp[0])
    assert abs(disp[2]) < 1e-9


def test_stride_monotone_in_alpha_and_theta(calibrated_robot):
    cone = gait.synthetic_cone(60.0)
    strides = [gait.stride_from_cone(calibrated_robot, cone, a) for a in (0.0, 20.0, 45.0, 72.0, 90.0)]
    assert all(b > a for a, b in zip(strides, strides[1:]))
    by_theta = [
        gait.stride_from_cone(calibrated_robot, gait.synthetic_cone(t), 72.0) for t in (30.0, 45.0, 60.0, 66.0)
    ]
    assert all(b > a for a, b in zip(by_theta, by_theta[1:]))


def test_stride_waveform_independent(calibrated_robot, cone66):
    # stride depends only on the alpha extremes in the quasi-static model:
    # simulate full time-domain cycles with both waveforms
    from maggait.scenario import Scenario, simulate

    base = dict(robot=calibrated_robot, duration=1.0 / 1.2)
    tri = simulate(Scenario(gait=gait.GaitParams(waveform="triangular"), **base))
    sin = simulate(Scenario(gait=gait.GaitParams(waveform="sinusoidal"), **base))
    d_tri = tri.displacement()
    d_sin = sin.displacement()
    assert d_tri[0] == pytest.approx(d_sin[0], rel=1e-3)


def test_mirror_symmetry(calibrated_robot, cone66):
    state0 = gait.standing_state(calibrated_robot, cone66, FLOOR, np.zeros(3))
    steps = 360
    quarter = steps // 4
    seq = np.concatenate(
        [
            np.linspace(0.0, 72.0, quarter + 1)[1:],
            np.linspace(72.0, -72.0, 2 * quarter + 1)[1:],
            np.linspace(-72.0, 0.0, quarter + 1)[1:],
        ]
    )

    def run(sign):
        state = state0
        prev = 0.0
        for alpha in sign * seq:
            rate = int(np.sign(alpha - prev))
            anchor = gait.anchor_rule(rate) or state.anchor
            state = gait.step_pose(state, gait.cone_field(cone66, alpha), anchor, FLOOR, calibrated_robot)
            prev = alpha
        return state.reference_position - state0.reference_position

    fwd = run(+1.0)
    rev = run(-1.0)
    assert fwd[0] == pytest.approx(rev[0], abs=1e-9)
    assert fwd[2] == pytest.approx(-rev[2], abs=1e-9)


def test_heading_equivariance(calibrated_robot, cone66):
    disp0, _ = gait.run_cone_cycle(calibrated_robot, cone66, 72.0, beta_deg=0.0)
    disp35, _ = gait.run_cone_cycle(calibrated_robot, cone66, 72.0, beta_deg=35.0)
    R = quat.rotation_about_y(np.radians(35.0))
    assert np.linalg.norm(disp35 - R @ disp0) < 1e-9


def test_stride_convergence_in_steps(calibrated_robot, cone66):
    ref = gait.stride_from_cone(calibrated_robot, cone66, 72.0, steps=1440)
    for steps in (180, 360, 720):
        s = gait.stride_from_cone(calibrated_robot, cone66, 72.0, steps=steps)
        assert abs(s / ref - 1.0) < 1e-3


def test_calibration_round_trip(calibrated_robot, wp_cone):
    target = 2.0e-3 / 1.2
    stride = gait.stride_from_cone(calibrated_robot, gait.synthetic_cone(wp_cone.pitch_theta), 72.0)
    assert abs(stride - target) < 1e-6
    assert 0.7e-3 <= calibrated_robot.front_foot_span <= 1.3e-3


def test_calibration_errors():
    with pytest.raises(gait.CalibrationError):
        gait.calibrate_foot_span(0.0, 66.0, 72.0)
    with pytest.raises(gait.CalibrationError):
        gait.calibrate_foot_span(1.0, 66.0, 72.0)  # 1 m stride is unreachable


def test_calibration_example_band():
    d = gait.calibrate_foot_span(2.0e-3 / 1.2, 66.0, 72.0)
    assert 0.7e-3 <= d <= 1.3e-3


def test_load_factor():
    assert gait.load_factor(0.0) == 1.0
    assert gait.load_factor(100e-6) == pytest.approx(0.7)
    assert gait.load_factor(50e-6) == pytest.approx(0.85)
    assert gait.load_factor(150e-6) == 0.0
    with pytest.raises(ValueError):
        gait.load_factor(-1e-6)


def test_stability_flags():
    p = gait.GaitParams(alpha_max=72.0, frequency=1.2)
    assert not gait.stability_check(p, 66.0).any()
    assert gait.stability_check(gait.GaitParams(alpha_max=80.0), 66.0).alpha_exceeds_72
    assert gait.stability_check(p, 71.0).pitch_exceeds_70
    assert gait.stability_check(gait.GaitParams(frequency=1.6), 66.0).freq_exceeds_1p5
    flags = gait.StabilityFlags(alpha_exceeds_72=True, freq_exceeds_1p5=True)
    assert flags.as_bitmask() == 5
