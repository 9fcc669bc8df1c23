"""Analytic magnetostatics of uniformly magnetized permanent magnets.

Cuboids get the exact charged-surface (arctan/log) solution evaluated in the
magnet frame; cylinder sources are treated as point dipoles (they only appear
as field receivers in this artifact). Assemblies superpose exactly; spatial
gradients come from central finite differences of the summed field.

All quantities are SI: meters, tesla, A m^2. Gradient tensors are stored with
entry (i, j) = dB_i / dx_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quat
from .constants import MU0

# Evaluation points closer than this to a face/edge are nudged outward to keep
# the cuboid kernel finite (the rig never places samples there, grid sweeps do).
SINGULARITY_CLEARANCE = 1e-9

# Default central-difference step for assembly gradients (m).
DEFAULT_GRADIENT_STEP = 1e-4


class SingularFieldError(ValueError):
    """Raised when a field evaluation lands on a true kernel singularity."""


@dataclass(frozen=True)
class Cuboid:
    """Axis-aligned box in the magnet frame with half-lengths a, b, c (m)."""

    a: float
    b: float
    c: float

    def volume(self) -> float:
        return 8.0 * self.a * self.b * self.c


@dataclass(frozen=True)
class Cylinder:
    """Right cylinder in the magnet frame: radius and height (m), axis = frame z."""

    radius: float
    height: float

    def volume(self) -> float:
        return np.pi * self.radius**2 * self.height


@dataclass(frozen=True)
class Magnet:
    """A uniformly magnetized permanent magnet posed in the world frame.

    `magnetization_axis` is a unit vector in the magnet frame; `orientation`
    is the magnet->world unit quaternion and `position` the center (m).
    """

    shape: Cuboid | Cylinder
    remanence: float
    magnetization_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: quat.IDENTITY.copy())

    def __post_init__(self) -> None:
        object.__setattr__(self, "magnetization_axis", np.asarray(self.magnetization_axis, float))
        object.__setattr__(self, "position", np.asarray(self.position, float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, float))
        if isinstance(self.shape, Cuboid):
            if min(self.shape.a, self.shape.b, self.shape.c) <= 0:
                raise ValueError("cuboid half-lengths must be strictly positive")
        elif isinstance(self.shape, Cylinder):
            if self.shape.radius <= 0 or self.shape.height <= 0:
                raise ValueError("cylinder radius/height must be strictly positive")
        else:
            raise TypeError(f"unsupported shape {type(self.shape)!r}")
        if self.remanence <= 0:
            raise ValueError("remanence must be > 0")
        if abs(np.linalg.norm(self.magnetization_axis) - 1.0) > 1e-12:
            raise ValueError("magnetization_axis must be unit length (1e-12)")
        if abs(np.linalg.norm(self.orientation) - 1.0) > 1e-12:
            raise ValueError("orientation quaternion must be unit length (1e-12)")

    def moved(self, position=None, orientation=None) -> "Magnet":
        return Magnet(
            shape=self.shape,
            remanence=self.remanence,
            magnetization_axis=self.magnetization_axis,
            position=self.position if position is None else np.asarray(position, float),
            orientation=self.orientation if orientation is None else np.asarray(orientation, float),
        )

    def contains(self, point: np.ndarray) -> bool:
        local = quat.rotate(quat.conjugate(self.orientation), np.asarray(point, float) - self.position)
        if isinstance(self.shape, Cuboid):
            s = self.shape
            return bool(abs(local[0]) <= s.a and abs(local[1]) <= s.b and abs(local[2]) <= s.c)
        s = self.shape
        return bool(local[0] ** 2 + local[1] ** 2 <= s.radius**2 and abs(local[2]) <= s.height / 2)


@dataclass(frozen=True)
class FieldSample:
    """Field and spatial gradient at one world-frame point.

    `inside_source` marks points inside a magnet body, where the finite
    difference gradient is unreliable (curl-free no longer holds).
    """

    position: np.ndarray
    B: np.ndarray
    gradient: np.ndarray
    inside_source: bool = False


def _regularize_local(pts: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Nudge points off the cuboid's face planes to dodge log/atan singularities.

    The kernel is singular where a coordinate equals +-half-length while the
    other two are within the face extent (faces, edges, corners). Points
    within SINGULARITY_CLEARANCE of such a plane are pushed outward.
    """
    pts = np.array(pts, dtype=float)
    near_extent = np.abs(pts) <= (half + SINGULARITY_CLEARANCE)[None, :]
    for k in range(3):
        on_plane = np.abs(np.abs(pts[:, k]) - half[k]) < SINGULARITY_CLEARANCE
        others = [j for j in range(3) if j != k]
        risky = on_plane & near_extent[:, others[0]] & near_extent[:, others[1]]
        if np.any(risky):
            sign = np.where(pts[risky, k] >= 0, 1.0, -1.0)
            pts[risky, k] = sign * (half[k] + SINGULARITY_CLEARANCE)
    return pts


def _cuboid_field_local(half: np.ndarray, remanence: float, pts: np.ndarray) -> np.ndarray:
    """Exact field of a cuboid magnetized along +z, points in the magnet frame.

    Charged-face solution: two sheets of magnetic surface charge at z = +-c
    produce the classic sum of eight log/arctan corner terms.
    """
    pts = _regularize_local(np.atleast_2d(pts), half)
    a, b, c = half
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    bx = np.zeros_like(x)
    by = np.zeros_like(x)
    bz = np.zeros_like(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i, xs in enumerate((x + a, x - a)):
            for k, ys in enumerate((y + b, y - b)):
                for p, zs in enumerate((z + c, z - c)):
                    sgn = (-1.0) ** (i + k + p)
                    r = np.sqrt(xs * xs + ys * ys + zs * zs)
                    bx += sgn * np.log(ys + r)
                    by += sgn * np.log(xs + r)
                    bz += sgn * np.arctan2(xs * ys, zs * r)
    out = (remanence / (4.0 * np.pi)) * np.column_stack([bx, by, -bz])
    if not np.all(np.isfinite(out)):
        raise SingularFieldError("cuboid field evaluation hit a geometric singularity")
    return out


# Axis permutations mapping each magnet-frame axis onto the kernel's z axis.
_AXIS_PERMUTATIONS = {0: (1, 2, 0), 1: (2, 0, 1), 2: (0, 1, 2)}


def cuboid_field_many(magnet: Magnet, points: np.ndarray) -> np.ndarray:
    """Vectorized world-frame cuboid field at an (N, 3) array of points.

    Magnetization along an arbitrary unit axis is handled by linear
    superposition of the three box-axis-aligned solutions.
    """
    if not isinstance(magnet.shape, Cuboid):
        raise TypeError("cuboid_field requires a cuboid magnet")
    points = np.atleast_2d(np.asarray(points, float))
    R = quat.to_matrix(magnet.orientation)
    local = (points - magnet.position) @ R
    half = np.array([magnet.shape.a, magnet.shape.b, magnet.shape.c])
    B_local = np.zeros_like(local)
    for axis_idx in range(3):
        component = float(magnet.magnetization_axis[axis_idx])
        if abs(component) < 1e-15:
            continue
        perm = list(_AXIS_PERMUTATIONS[axis_idx])
        out = _cuboid_field_local(half[perm], magnet.remanence * component, local[:, perm])
        B_local[:, perm] += out
    return B_local @ R.T


def cuboid_field(magnet: Magnet, point: np.ndarray) -> np.ndarray:
    """World-frame flux density (T) of a cuboid magnet at one point."""
    return cuboid_field_many(magnet, np.asarray(point, float)[None, :])[0]


def dipole_field(moment: np.ndarray, source_position: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Point-dipole flux density: (mu0 / 4 pi) (3 (m.rhat) rhat - m) / r^3."""
    moment = np.asarray(moment, float)
    r = np.asarray(point, float) - np.asarray(source_position, float)
    rn = np.linalg.norm(r)
    if rn < 1e-12:
        raise SingularFieldError("dipole field evaluated at the source position")
    rhat = r / rn
    return MU0 / (4.0 * np.pi) * (3.0 * np.dot(moment, rhat) * rhat - moment) / rn**3


def dipole_field_many(moment: np.ndarray, source_position: np.ndarray, points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, float))
    r = points - np.asarray(source_position, float)
    rn = np.linalg.norm(r, axis=1, keepdims=True)
    if np.any(rn < 1e-12):
        raise SingularFieldError("dipole field evaluated at the source position")
    rhat = r / rn
    mdotr = rhat @ np.asarray(moment, float)
    return MU0 / (4.0 * np.pi) * (3.0 * rhat * mdotr[:, None] - np.asarray(moment, float)) / rn**3


def dipole_gradient(moment: np.ndarray, source_position: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Analytic gradient tensor G_ij = dB_i/dx_j of a point dipole."""
    m = np.asarray(moment, float)
    r = np.asarray(point, float) - np.asarray(source_position, float)
    rn = np.linalg.norm(r)
    if rn < 1e-12:
        raise SingularFieldError("dipole gradient evaluated at the source position")
    rhat = r / rn
    eye = np.eye(3)
    mr = float(np.dot(m, rhat))
    G = (
        np.outer(m, rhat)
        + np.outer(rhat, m)
        + mr * (eye - 5.0 * np.outer(rhat, rhat))
    )
    return 3.0 * MU0 / (4.0 * np.pi * rn**4) * G


def dipole_moment_of(magnet: Magnet) -> np.ndarray:
    """World-frame dipole moment m = (Br/mu0) V R(pose) axis (A m^2)."""
    volume = magnet.shape.volume()
    m_frame = (magnet.remanence / MU0) * volume * magnet.magnetization_axis
    return quat.rotate(magnet.orientation, m_frame)


def magnet_field_many(magnet: Magnet, points: np.ndarray) -> np.ndarray:
    """Dispatch: exact kernel for cuboids, dipole equivalent for cylinders."""
    if isinstance(magnet.shape, Cuboid):
        return cuboid_field_many(magnet, points)
    return dipole_field_many(dipole_moment_of(magnet), magnet.position, points)


def assembly_field_vectors(magnets: list[Magnet], points: np.ndarray) -> np.ndarray:
    """Superposed flux density only (no gradient) at (N, 3) points."""
    points = np.atleast_2d(np.asarray(points, float))
    total = np.zeros_like(points)
    for magnet in magnets:
        total = total + magnet_field_many(magnet, points)
    return total


def assembly_field(
    magnets: list[Magnet],
    point: np.ndarray,
    gradient_step: float = DEFAULT_GRADIENT_STEP,
) -> FieldSample:
    """Superposed field and central-difference gradient at one point.

    The six stencil evaluations are batched into one vectorized call per
    magnet. Points inside any magnet body return a flagged sample.
    """
    point = np.asarray(point, float)
    h = float(gradient_step)
    stencil = np.vstack(
        [
            point,
            point + [h, 0, 0],
            point - [h, 0, 0],
            point + [0, h, 0],
            point - [0, h, 0],
            point + [0, 0, h],
            point - [0, 0, h],
        ]
    )
    B = assembly_field_vectors(magnets, stencil)
    grad = np.column_stack(
        [
            (B[1] - B[2]) / (2 * h),
            (B[3] - B[4]) / (2 * h),
            (B[5] - B[6]) / (2 * h),
        ]
    )
    inside = any(m.contains(point) for m in magnets)
    return FieldSample(position=point, B=B[0], gradient=grad, inside_source=inside)
