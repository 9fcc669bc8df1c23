"""The three-magnet actuation assembly.

World frame: +X runs from M1 toward M2 (the static field direction), +Y is
vertical up, +Z completes the right-handed set. The rig center (midpoint of
the M1-M2 axis) is the origin. M3 sits below the working volume on the Y
axis so its gradient pulls the robot onto a horizontal surface.

Control inputs:
    alpha  spin of M3 about the X axis through its own center. Positive
           alpha is clockwise when looking along +X (matching the published
           sign convention), so the superimposed field swings toward the
           robot's right and an increasing alpha drives a right turn.
    beta   yaw of the whole assembly about the vertical axis through the
           working-volume center (which lies on the Y axis).

Default geometry note: the M1-M2 spacing and the M3 offset default to values
calibrated so this free-space analytic model reproduces the measured flux
density and pitch at the working point (7.9 mT, 62 deg). The nominal
center-to-center distances quoted for the reference FEM study (0.484 m,
0.136 m) are available as `RigConfig.paper_nominal()`; in free space they
overshoot the measured center field by ~60% because the FEM's insulating
air-box boundary is absent here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import quat
from .magnetostatics import (
    Cuboid,
    FieldSample,
    Magnet,
    assembly_field,
    assembly_field_vectors,
)

# NdFeB remanence by grade (T); not quoted by the vendor datasheets used for
# the rig, so grade-typical values are applied and kept configurable.
BR_N45 = 1.35
BR_N40 = 1.28

DEG = np.pi / 180.0


def _wrap_angle(deg: float) -> float:
    """Normalize an angle to (-180, 180]."""
    wrapped = (float(deg) + 180.0) % 360.0 - 180.0
    return 180.0 if wrapped == -180.0 else wrapped


@dataclass(frozen=True)
class RigState:
    """The two control angles, degrees."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not -180.0 <= self.alpha <= 180.0:
            raise ValueError("alpha must lie in [-180, 180] degrees")

    @property
    def beta_wrapped(self) -> float:
        return _wrap_angle(self.beta)


@dataclass(frozen=True)
class RigConfig:
    """Geometry and material parameters of the three-magnet assembly.

    Distances are meters. `m1_m2_center_distance` is center-to-center along
    X; `m3_center_offset` is the center-to-center distance from the
    working-volume center down to M3. The working volume is centered at the
    working point, which sits `working_point_offset` below the rig center
    (on the side nearer M3 by default; set `working_point_side=+1` for the
    mirrored reading of the vertical axis).
    """

    m1_m2_center_distance: float = 0.550
    m3_center_offset: float = 0.156
    working_point_offset: float = 0.020
    working_point_side: int = -1
    pair_half_lengths: tuple[float, float, float] = (0.00975, 0.0553, 0.0445)
    pair_remanence: float = BR_N45
    m3_half_lengths: tuple[float, float, float] = (0.0254, 0.0254, 0.0254)
    m3_remanence: float = BR_N40
    working_volume_size: tuple[float, float, float] = (0.035, 0.040, 0.035)

    def __post_init__(self) -> None:
        if self.m1_m2_center_distance <= 4.0 * self.pair_half_lengths[0]:
            raise ValueError("M1/M2 spacing leaves no gap between the pair")
        if self.m3_center_offset <= self.m3_half_lengths[1]:
            raise ValueError("M3 overlaps the working volume")
        if self.working_point_side not in (-1, 1):
            raise ValueError("working_point_side must be -1 or +1")
        wv_bottom = self.working_point[1] - self.working_volume_size[1] / 2.0
        m3_top = self.m3_position[1] + self.m3_half_lengths[1]
        if m3_top >= wv_bottom:
            raise ValueError("working volume must lie strictly between the magnets")

    @classmethod
    def paper_nominal(cls) -> "RigConfig":
        """The nominal FEM-study distances (overshoots the measured field)."""
        return cls(m1_m2_center_distance=0.484, m3_center_offset=0.136)

    @property
    def working_point(self) -> np.ndarray:
        return np.array([0.0, self.working_point_side * self.working_point_offset, 0.0])

    @property
    def m3_position(self) -> np.ndarray:
        # M3 sits m3_center_offset beyond the working point, away from the rig center
        return self.working_point + np.array([0.0, self.working_point_side * self.m3_center_offset, 0.0])

    def replace(self, **kwargs) -> "RigConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class ConeParameters:
    """Fitted parameters of the swept field cone at one point.

    B_h is the static in-plane component along the heading, B_r the cosine
    amplitude of the vertical rotating component (which sets the robot's
    standing pitch), and B_t the sine amplitude of the transverse component.
    The physical sweep is elliptic (B_t ~ B_r/2 on the rig axis); the pitch
    and the walking-cone abstraction are defined by B_r.
    """

    pitch_theta: float
    B_h: float
    B_r: float
    B_t: float
    vertical_offset: float
    flat_cone: bool = False

    def yaw_phi_max(self, alpha_max_deg: float) -> float:
        """Peak heading swing (deg) at oscillation amplitude alpha_max."""
        return float(
            np.degrees(
                np.arctan(np.tan(self.pitch_theta * DEG) * np.sin(alpha_max_deg * DEG))
            )
        )


def build_rig(config: RigConfig, state: RigState | None = None) -> list[Magnet]:
    """Pose the three magnets for the given control angles.

    M1 and M2 are magnetized through their thickness along +X so their fields
    aid in the gap; M3 is magnetized +Y at alpha = 0. Alpha spins M3 about
    the X axis (clockwise-positive looking along +X, i.e. an active rotation
    by -alpha about +X); beta yaws all three magnets about the vertical.
    """
    state = state or RigState()
    w = config.m1_m2_center_distance / 2.0
    m1 = Magnet(
        shape=Cuboid(*config.pair_half_lengths),
        remanence=config.pair_remanence,
        magnetization_axis=np.array([1.0, 0.0, 0.0]),
        position=np.array([-w, 0.0, 0.0]),
    )
    m2 = m1.moved(position=np.array([w, 0.0, 0.0]))
    q_alpha = quat.from_axis_angle(np.array([1.0, 0.0, 0.0]), -state.alpha * DEG)
    m3 = Magnet(
        shape=Cuboid(*config.m3_half_lengths),
        remanence=config.m3_remanence,
        magnetization_axis=np.array([0.0, 1.0, 0.0]),
        position=config.m3_position,
        orientation=quat.normalize(q_alpha),
    )
    magnets = [m1, m2, m3]
    beta = state.beta_wrapped
    if beta != 0.0:
        q_beta = quat.from_axis_angle(np.array([0.0, 1.0, 0.0]), beta * DEG)
        R_beta = quat.to_matrix(q_beta)
        magnets = [
            m.moved(position=R_beta @ m.position, orientation=quat.normalize(quat.multiply(q_beta, m.orientation)))
            for m in magnets
        ]
    return magnets


def rig_field(config: RigConfig, state: RigState, point: np.ndarray, gradient_step: float = 1e-4) -> FieldSample:
    """Superposed field sample of the posed assembly at a world point."""
    return assembly_field(build_rig(config, state), point, gradient_step=gradient_step)


def rig_field_alpha_sweep(
    config: RigConfig, beta: float, point: np.ndarray, alphas_deg: np.ndarray
) -> np.ndarray:
    """Flux density at one point for many alpha values, (N, 3).

    M1/M2 do not move with alpha, so their contribution is evaluated once;
    M3's spin is folded into the evaluation point (rotating the point by
    +alpha about X through M3's center equals spinning M3 by -alpha).
    """
    alphas_deg = np.asarray(alphas_deg, float)
    point = np.asarray(point, float)
    magnets = build_rig(config, RigState(alpha=0.0, beta=beta))
    m1, m2, m3 = magnets
    B_static = assembly_field_vectors([m1, m2], point[None, :])[0]
    # The magnet spins by -alpha about the world spin axis, so evaluate the
    # unspun magnet at points rotated by +alpha and spin the field back.
    k = quat.rotate(
        quat.from_axis_angle(np.array([0.0, 1.0, 0.0]), _wrap_angle(beta) * DEG),
        np.array([1.0, 0.0, 0.0]),
    )
    rel = point - m3.position
    ang = alphas_deg * DEG
    rel_rot = (
        np.outer(np.cos(ang), rel)
        + np.outer(np.sin(ang), np.cross(k, rel))
        + np.outer((1.0 - np.cos(ang)) * np.dot(rel, k), k)
    )
    B3_rot = assembly_field_vectors([m3], m3.position + rel_rot)
    c, s = np.cos(-ang), np.sin(-ang)
    B3 = (
        B3_rot * c[:, None]
        + np.cross(np.broadcast_to(k, B3_rot.shape), B3_rot) * s[:, None]
        + np.outer((B3_rot @ k) * (1.0 - c), k)
    )
    return B_static[None, :] + B3


def pitch_angle(B: np.ndarray, heading_deg: float = 0.0) -> float:
    """Elevation (deg) of the field above the horizontal along the heading."""
    B = np.asarray(B, float)
    if np.linalg.norm(B) < 1e-12:
        raise ValueError("field too small to define a direction")
    heading = quat.rotation_about_y(heading_deg * DEG) @ np.array([1.0, 0.0, 0.0])
    return float(np.degrees(np.arctan2(B[1], float(np.dot(B, heading)))))


def cone_parameters(
    config: RigConfig,
    beta: float,
    point: np.ndarray,
    n_samples: int = 181,
    flat_threshold: float = 1e-7,
) -> ConeParameters:
    """Least-squares cone fit of the swept field at a point.

    Samples alpha over [-90, 90] and fits, per component in the heading
    frame: B_vertical ~ c_y + B_r cos(alpha), B_transverse ~ B_t sin(alpha);
    B_h is the mean heading component. The fit uses a fixed 181-point grid
    for reproducibility.
    """
    alphas = np.linspace(-90.0, 90.0, n_samples)
    B = rig_field_alpha_sweep(config, beta, point, alphas)
    R_beta = quat.rotation_about_y(beta * DEG)
    heading = R_beta @ np.array([1.0, 0.0, 0.0])
    transverse = R_beta @ np.array([0.0, 0.0, 1.0])
    b_h = float(np.mean(B @ heading))
    rad = alphas * DEG
    design = np.column_stack([np.ones(n_samples), np.cos(rad)])
    c_y, b_r = np.linalg.lstsq(design, B @ np.array([0.0, 1.0, 0.0]), rcond=None)[0]
    b_t = float(np.linalg.lstsq(np.sin(rad)[:, None], B @ transverse, rcond=None)[0][0])
    flat = abs(b_r) < flat_threshold
    theta = 0.0 if flat else float(np.degrees(np.arctan2(b_r, b_h)))
    return ConeParameters(
        pitch_theta=theta,
        B_h=b_h,
        B_r=float(b_r),
        B_t=b_t,
        vertical_offset=float(c_y),
        flat_cone=flat,
    )


@dataclass(frozen=True)
class GridBox:
    """Axis-aligned sampling box, corner-to-corner in meters."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self) -> None:
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise ValueError("box hi must be >= lo on every axis")


def sample_grid(
    config: RigConfig,
    state: RigState,
    box: GridBox,
    resolution: tuple[int, int, int],
    gradient_step: float = 1e-4,
) -> list[FieldSample]:
    """Row-major (x outer, z fastest) field samples over a regular grid."""
    if any(r < 2 for r in resolution):
        raise ValueError("resolution must be >= 2 per axis")
    if any(h <= l for l, h in zip(box.lo, box.hi)):
        raise ValueError("empty sampling box")
    axes = [np.linspace(l, h, r) for l, h, r in zip(box.lo, box.hi, resolution)]
    magnets = build_rig(config, state)
    samples = []
    for x in axes[0]:
        for y in axes[1]:
            for z in axes[2]:
                samples.append(assembly_field(magnets, np.array([x, y, z]), gradient_step=gradient_step))
    return samples


def gradient_pull_magnitude(sample: FieldSample) -> float:
    """|grad |B|| from a field sample: d|B|/dx_j = Bhat . dB/dx_j."""
    bmag = np.linalg.norm(sample.B)
    if bmag < 1e-15:
        return 0.0
    return float(np.linalg.norm(sample.gradient.T @ (sample.B / bmag)))
