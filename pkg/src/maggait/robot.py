"""Millirobot rigid-body description and force/weight analyses.

Body frame: +x is the magnet's longitudinal axis (the direction that aligns
with the applied field), +y the chassis top normal, +z the robot's right.
In the standing posture the body leans up along the field at the pitch
angle, so the anchoring feet sit at the -x end of the chassis and the
capillary tip overhangs the +x end, which dives toward the surface during
the deployment flip.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import quat
from .constants import MU0
from .magnetostatics import FieldSample


class Anchor(str, Enum):
    FL = "FL"
    FR = "FR"
    TIP = "TIP"
    NONE = "NONE"


# Default chassis scale (m): 3 mm square sheet, feet folded 0.8 mm below.
_CHASSIS_HALF_LENGTH = 1.5e-3
_FOOT_DROP = 0.8e-3


@dataclass(frozen=True)
class RobotGeometry:
    """Foot layout, dipole moment and masses of the millirobot.

    `front_foot_span` is the lateral FL-FR distance d that sets the pivot
    stride; it is normally overwritten by the gait calibration. The
    capillary tip default overhangs the chassis far edge and reaches down to
    just above the foot plane, which is what makes it meet the surface near
    the halfway point of the deployment flip.
    """

    front_foot_span: float = 1.0e-3
    body_mass: float = 25e-6
    cargo_mass: float = 0.0
    moment_magnitude: float = 8.4375e-4
    foot_drop: float = _FOOT_DROP
    chassis_half_length: float = _CHASSIS_HALF_LENGTH
    capillary_tip_offset: np.ndarray = field(
        default_factory=lambda: np.array([2.5e-3, -0.7e-3, 0.0])
    )
    body_axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    load_capacity: float = 100e-6

    def __post_init__(self) -> None:
        object.__setattr__(self, "capillary_tip_offset", np.asarray(self.capillary_tip_offset, float))
        object.__setattr__(self, "body_axis", np.asarray(self.body_axis, float))
        if self.body_mass <= 0:
            raise ValueError("body_mass must be > 0")
        if self.cargo_mass < 0:
            raise ValueError("cargo_mass must be >= 0")
        if self.front_foot_span <= 0:
            raise ValueError("front_foot_span must be > 0")
        if abs(np.linalg.norm(self.body_axis) - 1.0) > 1e-12:
            raise ValueError("body_axis must be unit length")

    def foot_offsets(self) -> dict[str, np.ndarray]:
        """Body-frame foot positions; all four share one foot-plane height."""
        d = self.front_foot_span
        x, y = self.chassis_half_length, -self.foot_drop
        return {
            "FL": np.array([-x, y, -d / 2.0]),
            "FR": np.array([-x, y, +d / 2.0]),
            "RL": np.array([+x, y, -d / 2.0]),
            "RR": np.array([+x, y, +d / 2.0]),
        }

    def anchor_offset(self, anchor: Anchor) -> np.ndarray:
        if anchor == Anchor.TIP:
            return self.capillary_tip_offset
        if anchor in (Anchor.FL, Anchor.FR):
            return self.foot_offsets()[anchor.value]
        raise ValueError(f"no anchor offset for {anchor}")

    def total_mass(self) -> float:
        return self.body_mass + self.cargo_mass

    def with_cargo(self, cargo_mass: float) -> "RobotGeometry":
        return replace(self, cargo_mass=cargo_mass)

    def with_span(self, d: float) -> "RobotGeometry":
        return replace(self, front_foot_span=d)


@dataclass(frozen=True)
class RobotState:
    """World pose, active anchor and simulation time of the robot."""

    reference_position: np.ndarray
    orientation: np.ndarray
    anchor: Anchor = Anchor.NONE
    time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "reference_position", np.asarray(self.reference_position, float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, float))
        if abs(np.linalg.norm(self.orientation) - 1.0) > 1e-9:
            raise ValueError("orientation must be unit length")

    def body_axis_world(self, geometry: RobotGeometry) -> np.ndarray:
        return quat.rotate(self.orientation, geometry.body_axis)

    def point_world(self, offset: np.ndarray) -> np.ndarray:
        return self.reference_position + quat.rotate(self.orientation, offset)

    def foot_positions(self, geometry: RobotGeometry) -> dict[str, np.ndarray]:
        return {name: self.point_world(off) for name, off in geometry.foot_offsets().items()}


@dataclass(frozen=True)
class SurfacePlane:
    """Infinite plane: a point on it plus the unit normal on the robot side."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", np.asarray(self.point, float))
        n = np.asarray(self.normal, float)
        nn = np.linalg.norm(n)
        if abs(nn - 1.0) > 1e-9:
            n = n / nn
        object.__setattr__(self, "normal", n)

    def height_of(self, point: np.ndarray) -> float:
        """Signed distance of a point above the plane (along the normal)."""
        return float(np.dot(np.asarray(point, float) - self.point, self.normal))

    def project(self, point: np.ndarray) -> np.ndarray:
        return np.asarray(point, float) - self.height_of(point) * self.normal


def magnetic_force(moment: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """Gradient force on a dipole: F_i = sum_j m_j dB_j/dx_i.

    This is grad(m . B) for a curl-free field; gradient entries are
    (i, j) = dB_i/dx_j, hence the transpose.
    """
    return np.asarray(gradient, float).T @ np.asarray(moment, float)


def weight(geometry: RobotGeometry, gravity: np.ndarray) -> np.ndarray:
    """Total gravitational force vector (N) including cargo."""
    return geometry.total_mass() * np.asarray(gravity, float)


def aligned_moment(state: RobotState, geometry: RobotGeometry) -> np.ndarray:
    """World-frame dipole moment of the quasi-statically aligned robot."""
    return geometry.moment_magnitude * state.body_axis_world(geometry)


def cylinder_moment_magnitude(remanence: float = 1.35, diameter: float = 1e-3, height: float = 1e-3) -> float:
    """|m| of the robot's cylindrical magnet from Br and dimensions (N45 default)."""
    return remanence / MU0 * np.pi * (diameter / 2.0) ** 2 * height


@dataclass(frozen=True)
class AnchoringReport:
    """Normal-force feasibility summary for one robot pose on a surface."""

    normal_force: float
    gravity_component: float
    ratio: float
    feasible: bool
    magnetic_force: np.ndarray


def anchoring_analysis(
    state: RobotState,
    sample: FieldSample,
    geometry: RobotGeometry,
    gravity: np.ndarray,
    surface: SurfacePlane,
    safety_factor: float = 1.0,
) -> AnchoringReport:
    """Compare the toward-surface gradient force against the gravity load.

    The magnetic force is projected onto the inward surface direction
    (positive = pressing onto the surface). The opposing load is the
    surface-tangential gravity magnitude on walls (the climbing load) or the
    pull-off normal gravity when inverted; on a floor where gravity itself
    presses the robot down the load is zero and any pressing force is
    feasible.
    """
    gravity = np.asarray(gravity, float)
    F = magnetic_force(aligned_moment(state, geometry), sample.gradient)
    n = surface.normal
    pressing = float(-np.dot(F, n))
    W = weight(geometry, gravity)
    w_normal = float(np.dot(W, n))  # > 0: gravity pulls the robot off the surface
    w_tangential = float(np.linalg.norm(W - w_normal * n))
    load = w_tangential if w_normal <= 1e-15 else float(np.hypot(w_tangential, w_normal))
    if load > 1e-15:
        ratio = pressing / load
        feasible = pressing > 0 and ratio >= safety_factor
    else:
        ratio = float("inf") if pressing > 0 else 0.0
        feasible = pressing > 0
    return AnchoringReport(
        normal_force=pressing,
        gravity_component=load,
        ratio=ratio,
        feasible=feasible,
        magnetic_force=F,
    )
