"""Quasi-static anchored-pivot walking kinematics.

The robot's magnetic axis tracks the applied field with zero lag. Walking is
driven by the idealized circular cone abstraction of the swept field: the
fitted static component B_h along the heading plus a rotating transverse
component of amplitude B_r,

    B(alpha) = R_y(beta) (B_h, B_r cos alpha, B_r sin alpha).

Driving the gait from the fitted cone rather than the raw assembly field is
deliberate: the physical sweep is elliptic (transverse sine amplitude about
half the vertical cosine amplitude on the rig axis), but the pivot-walking
stride data and the chord model both follow the circular cone, so the cone
is the better locomotion model and the raw field stays authoritative for
magnitudes, gradients and forces.

Roll handling: the body axis alignment leaves one degree of freedom. Pure
rotation-continuity (minimal rotation per step) accumulates a parallel
transport roll of alpha*(1 - cos theta) along the cone arc, which scrambles
the pivot geometry at the operating pitch; instead the roll is resolved by
keeping the front-feet lateral axis parallel to the walking surface, which
keeps both front feet on the plane and reproduces the chord model exactly.
`align_orientation` still provides the minimal-rotation update for callers
that want raw field tracking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .rig import DEG, ConeParameters
from .robot import Anchor, RobotGeometry, RobotState, SurfacePlane


class CalibrationError(ValueError):
    """Raised when the foot-span calibration cannot bracket the target."""


@dataclass(frozen=True)
class GaitParams:
    """Oscillation parameters of the walking gait."""

    alpha_max: float = 72.0
    frequency: float = 1.2
    waveform: str = "triangular"
    steps_per_cycle: int = 360

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha_max <= 180.0:
            raise ValueError("alpha_max must lie in [0, 180] degrees")
        if self.frequency <= 0:
            raise ValueError("frequency must be > 0")
        if self.waveform not in ("triangular", "sinusoidal"):
            raise ValueError("waveform must be 'triangular' or 'sinusoidal'")
        if self.steps_per_cycle < 8 or self.steps_per_cycle % 2:
            raise ValueError("steps_per_cycle must be even and >= 8")

    def alpha_at(self, t: float) -> float:
        """Commanded oscillation angle (deg) at time t."""
        phase = (t * self.frequency) % 1.0
        if self.waveform == "sinusoidal":
            return self.alpha_max * np.sin(2.0 * np.pi * phase)
        if phase < 0.25:
            return self.alpha_max * (4.0 * phase)
        if phase < 0.75:
            return self.alpha_max * (2.0 - 4.0 * phase)
        return self.alpha_max * (4.0 * phase - 4.0)

    def ramp_rate(self) -> float:
        """Slew rate (deg/s) of the triangular waveform at this amplitude."""
        return 4.0 * self.alpha_max * self.frequency


@dataclass(frozen=True)
class StabilityFlags:
    """Advisory operating-envelope flags; they never alter the kinematics."""

    alpha_exceeds_72: bool = False
    pitch_exceeds_70: bool = False
    freq_exceeds_1p5: bool = False

    def any(self) -> bool:
        return self.alpha_exceeds_72 or self.pitch_exceeds_70 or self.freq_exceeds_1p5

    def as_bitmask(self) -> int:
        return (
            (1 if self.alpha_exceeds_72 else 0)
            | (2 if self.pitch_exceeds_70 else 0)
            | (4 if self.freq_exceeds_1p5 else 0)
        )


@dataclass(frozen=True)
class StabilityThresholds:
    alpha_max: float = 72.0
    pitch: float = 70.0
    frequency: float = 1.5


def stability_check(
    params: GaitParams, pitch_theta: float, thresholds: StabilityThresholds = StabilityThresholds()
) -> StabilityFlags:
    """Pure threshold predicates of the empirical stability envelope."""
    return StabilityFlags(
        alpha_exceeds_72=params.alpha_max > thresholds.alpha_max,
        pitch_exceeds_70=pitch_theta > thresholds.pitch,
        freq_exceeds_1p5=params.frequency > thresholds.frequency,
    )


def cone_field(cone: ConeParameters, alpha_deg: float, beta_deg: float = 0.0) -> np.ndarray:
    """Idealized circular-cone field vector at oscillation angle alpha."""
    a = alpha_deg * DEG
    base = np.array([cone.B_h, cone.B_r * np.cos(a), cone.B_r * np.sin(a)])
    if beta_deg == 0.0:
        return base
    return quat.rotation_about_y(beta_deg * DEG) @ base


def synthetic_cone(pitch_theta_deg: float, field_scale: float = 5e-3) -> ConeParameters:
    """Cone parameters with a prescribed pitch (for calibration and tests)."""
    th = pitch_theta_deg * DEG
    return ConeParameters(
        pitch_theta=pitch_theta_deg,
        B_h=field_scale * np.cos(th),
        B_r=field_scale * np.sin(th),
        B_t=field_scale * np.sin(th),
        vertical_offset=0.0,
    )


def align_orientation(prev: np.ndarray, B: np.ndarray, body_axis: np.ndarray) -> np.ndarray:
    """Minimal-rotation field tracking; roll about B inherited from prev.

    Antiparallel tie-break: 180 degrees about the world vertical projected
    perpendicular to the current axis.
    """
    Bn = np.linalg.norm(B)
    if Bn <= 0:
        raise ValueError("cannot align to a zero field")
    target = np.asarray(B, float) / Bn
    current = quat.rotate(prev, np.asarray(body_axis, float))
    step = quat.minimal_rotation(current, target)
    return quat.normalize(quat.multiply(step, prev))


def surface_aligned_orientation(
    B: np.ndarray,
    surface: SurfacePlane,
    prev: np.ndarray | None = None,
    body_axis: np.ndarray | None = None,
) -> np.ndarray:
    """Orientation with body axis along B and the lateral axis in the surface.

    The sign of the lateral direction is carried over from `prev` so the
    robot never flips sides between steps.
    """
    Bn = np.linalg.norm(B)
    if Bn <= 0:
        raise ValueError("cannot align to a zero field")
    a = np.asarray(B, float) / Bn
    lateral = np.cross(a, surface.normal)
    ln = np.linalg.norm(lateral)
    if ln < 1e-12:
        raise ValueError("body axis perpendicular to the surface; lateral frame undefined")
    lateral = lateral / ln
    if prev is not None:
        prev_lateral = quat.rotate(prev, np.array([0.0, 0.0, 1.0]))
        if np.dot(lateral, prev_lateral) < 0:
            lateral = -lateral
    up = np.cross(lateral, a)
    R = np.column_stack([a, up, lateral])
    q = quat.from_matrix(R)
    if body_axis is not None and not np.allclose(body_axis, [1.0, 0.0, 0.0]):
        # body axes other than +x: post-rotate the canonical frame
        q = quat.multiply(q, quat.minimal_rotation(np.asarray(body_axis, float), np.array([1.0, 0.0, 0.0])))
    return quat.normalize(q)


def anchor_rule(alpha_rate_sign: int) -> Anchor | None:
    """Which front foot anchors for the given oscillation direction.

    Rising alpha turns the robot right about the anchored front-right foot;
    falling alpha turns left about the front-left foot. Zero rate holds the
    previous anchor (returned as None).
    """
    if alpha_rate_sign > 0:
        return Anchor.FR
    if alpha_rate_sign < 0:
        return Anchor.FL
    return None


def step_pose(
    state: RobotState,
    B: np.ndarray,
    anchor: Anchor,
    surface: SurfacePlane,
    geometry: RobotGeometry,
) -> RobotState:
    """Advance the pose one quasi-static step about the anchored point.

    The new orientation aligns the body axis to B with surface-constrained
    roll. If the anchor changed, the newly anchored point is first projected
    onto the surface (registration) so height errors cannot accumulate; the
    anchored point's world position is then invariant under the rotation.
    """
    offset = geometry.anchor_offset(anchor)
    anchor_world = state.point_world(offset)
    if anchor != state.anchor:
        anchor_world = surface.project(anchor_world)
    q_new = surface_aligned_orientation(B, surface, prev=state.orientation, body_axis=geometry.body_axis)
    ref_new = anchor_world - quat.rotate(q_new, offset)
    return RobotState(reference_position=ref_new, orientation=q_new, anchor=anchor, time=state.time)


def clearance_violations(
    state: RobotState, geometry: RobotGeometry, surface: SurfacePlane, tolerance: float = 0.2e-3
) -> list[str]:
    """Feet/tip penetrating the surface deeper than the soft-surface tolerance."""
    names = []
    for name, pos in state.foot_positions(geometry).items():
        if surface.height_of(pos) < -tolerance:
            names.append(name)
    if surface.height_of(state.point_world(geometry.capillary_tip_offset)) < -tolerance:
        names.append("TIP")
    return names


def standing_state(
    geometry: RobotGeometry,
    cone: ConeParameters,
    surface: SurfacePlane,
    position_on_surface: np.ndarray,
    beta_deg: float = 0.0,
    time: float = 0.0,
) -> RobotState:
    """Initial posture at alpha = 0 with both front feet on the surface.

    `position_on_surface` locates the midpoint of the front feet.
    """
    q = surface_aligned_orientation(cone_field(cone, 0.0, beta_deg), surface, body_axis=geometry.body_axis)
    feet = geometry.foot_offsets()
    mid = 0.5 * (feet["FL"] + feet["FR"])
    ref = surface.project(np.asarray(position_on_surface, float)) - quat.rotate(q, mid)
    return RobotState(reference_position=ref, orientation=q, anchor=Anchor.FR, time=time)


def _cycle_alphas(alpha_max: float, steps: int) -> np.ndarray:
    """One closed oscillation cycle 0 -> +amax -> -amax -> 0."""
    if steps < 8 or steps % 4:
        raise ValueError("cycle steps must be a positive multiple of 4 (>= 8)")
    quarter = steps // 4
    return np.concatenate(
        [
            np.linspace(0.0, alpha_max, quarter + 1)[1:],
            np.linspace(alpha_max, -alpha_max, 2 * quarter + 1)[1:],
            np.linspace(-alpha_max, 0.0, quarter + 1)[1:],
        ]
    )


def run_cone_cycle(
    geometry: RobotGeometry,
    cone: ConeParameters,
    alpha_max: float,
    steps: int = 360,
    beta_deg: float = 0.0,
    surface: SurfacePlane | None = None,
    start: RobotState | None = None,
) -> tuple[np.ndarray, RobotState]:
    """Walk one full oscillation cycle on a fixed cone; returns (displacement, state)."""
    surface = surface or SurfacePlane(point=np.zeros(3), normal=np.array([0.0, 1.0, 0.0]))
    state = start or standing_state(geometry, cone, surface, np.zeros(3), beta_deg)
    p0 = state.reference_position.copy()
    prev_alpha = 0.0
    for alpha in _cycle_alphas(alpha_max, steps):
        rate = np.sign(alpha - prev_alpha)
        anchor = anchor_rule(int(rate)) or state.anchor
        state = step_pose(state, cone_field(cone, alpha, beta_deg), anchor, surface, geometry)
        prev_alpha = alpha
    return state.reference_position - p0, state


def stride_estimate(d: float, theta_deg: float, alpha_max_deg: float) -> float:
    """Closed-form pivot-walking chord: 2 d sin(atan(tan theta sin alpha))."""
    psi = np.arctan(np.tan(theta_deg * DEG) * np.sin(alpha_max_deg * DEG))
    return float(2.0 * d * np.sin(psi))


def stride_from_cone(
    geometry: RobotGeometry, cone: ConeParameters, alpha_max: float, steps: int = 360
) -> float:
    """Simulated per-cycle stride along the heading on a fixed cone."""
    disp, _ = run_cone_cycle(geometry, cone, alpha_max, steps)
    return float(disp[0])


def stride_simulated(
    geometry: RobotGeometry,
    config,
    position: np.ndarray,
    alpha_max: float,
    steps: int = 360,
    beta_deg: float = 0.0,
) -> float:
    """Per-cycle stride at a rig position, from the cone fitted there."""
    from .rig import cone_parameters  # local import to avoid cycle at module load

    cone = cone_parameters(config, beta_deg, np.asarray(position, float))
    disp, _ = run_cone_cycle(geometry, cone, alpha_max, steps, beta_deg=beta_deg)
    heading = quat.rotation_about_y(beta_deg * DEG) @ np.array([1.0, 0.0, 0.0])
    return float(np.dot(disp, heading))


def calibrate_foot_span(
    target_stride: float,
    theta_deg: float,
    alpha_max_deg: float,
    steps: int = 360,
    bracket: tuple[float, float] = (0.2e-3, 3.0e-3),
    tolerance: float = 1e-7,
    geometry: RobotGeometry | None = None,
) -> float:
    """Solve stride_simulated(d) = target by bisection on the foot span d.

    Runs on a synthetic cone of the given pitch so the result depends only on
    (theta, alpha_max). Raises CalibrationError when the target lies outside
    the bracket.
    """
    if target_stride <= 0:
        raise CalibrationError("target stride must be > 0")
    base = geometry or RobotGeometry()
    cone = synthetic_cone(theta_deg)

    def stride_of(d: float) -> float:
        return stride_from_cone(base.with_span(d), cone, alpha_max_deg, steps)

    lo, hi = bracket
    s_lo, s_hi = stride_of(lo), stride_of(hi)
    if not (min(s_lo, s_hi) <= target_stride <= max(s_lo, s_hi)):
        raise CalibrationError(
            f"target stride {target_stride:.3e} m outside bracket "
            f"[{s_lo:.3e}, {s_hi:.3e}] m for d in {bracket}"
        )
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if stride_of(mid) < target_stride:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def load_factor(cargo_mass: float, capacity: float = 100e-6) -> float:
    """Empirical multiplicative stride reduction under cargo.

    Linear between the calibration endpoints factor(0) = 1.0 and
    factor(capacity) = 0.7; beyond capacity the robot is immobile (0.0).
    """
    if cargo_mass < 0:
        raise ValueError("cargo mass must be >= 0")
    if cargo_mass > capacity:
        return 0.0
    return 1.0 - 0.3 * (cargo_mass / capacity)
