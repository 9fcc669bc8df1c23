"""Steering: open-loop beta schedules and a scripted waypoint follower.

The rig is steered only through beta (the published system was driven by a
human turning the whole magnet assembly). The waypoint follower reproduces
the complex-trajectory demonstration without an operator: it slews beta
toward the bearing of the next waypoint while the walking oscillation keeps
running, then holds beta and walks straight once the heading error is small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rig import _wrap_angle
from .robot import RobotGeometry, RobotState, SurfacePlane


@dataclass(frozen=True)
class SteeringSchedule:
    """Piecewise-linear beta(t): sorted (time, beta_deg) breakpoints.

    Before the first breakpoint the first value holds; after the last, the
    last value holds. An empty schedule means beta = 0.
    """

    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        times = [t for t, _ in self.points]
        if any(not np.isfinite(t) or not np.isfinite(b) for t, b in self.points):
            raise ValueError("schedule values must be finite")
        if times != sorted(times):
            raise ValueError("schedule breakpoints must be time-sorted")

    def beta_at(self, t: float) -> float:
        if not self.points:
            return 0.0
        times = np.array([p[0] for p in self.points])
        betas = np.array([p[1] for p in self.points])
        return float(np.interp(t, times, betas))


@dataclass(frozen=True)
class WaypointPlan:
    """Ordered surface targets [(x, z), ...] in meters with tolerances."""

    waypoints: tuple[tuple[float, float], ...]
    arrival_tolerance: float = 0.5e-3
    heading_tolerance: float = 5.0
    slew_rate: float = 30.0
    step_budget: int = 200_000

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("waypoint plan must contain at least one waypoint")
        prev = None
        for w in self.waypoints:
            if prev is not None:
                if float(np.hypot(w[0] - prev[0], w[1] - prev[1])) <= self.arrival_tolerance:
                    raise ValueError("consecutive waypoints must be distinct beyond the arrival tolerance")
            prev = w


@dataclass
class WaypointCursor:
    """Mutable progress through a plan (part of the simulation state)."""

    index: int = 0
    steps_used: int = 0
    timed_out: bool = False

    def done(self, plan: WaypointPlan) -> bool:
        return self.index >= len(plan.waypoints)


def heading_of(state: RobotState, surface: SurfacePlane, geometry: RobotGeometry | None = None) -> float:
    """Azimuth (deg) of the body axis projected into the surface plane.

    Measured in the beta convention: heading h corresponds to the direction
    R_y(h) applied to +X, so +X is 0 and the walking direction equals beta
    once transients settle.
    """
    geometry = geometry or RobotGeometry()
    axis = state.body_axis_world(geometry)
    proj = axis - np.dot(axis, surface.normal) * surface.normal
    if np.linalg.norm(proj) < 1e-9:
        raise ValueError("body axis perpendicular to surface; heading undefined")
    return float(np.degrees(np.arctan2(-proj[2], proj[0])))


def bearing_to(position: np.ndarray, target_xz: tuple[float, float]) -> float:
    """Bearing (deg, beta convention) from a world position to a surface point."""
    dx = target_xz[0] - float(position[0])
    dz = target_xz[1] - float(position[2])
    return float(np.degrees(np.arctan2(-dz, dx)))


def surface_position(state: RobotState, surface: SurfacePlane, geometry: RobotGeometry) -> np.ndarray:
    """Robot reference point projected onto the surface."""
    return surface.project(state.reference_position)


def waypoint_controller(
    state: RobotState,
    plan: WaypointPlan,
    cursor: WaypointCursor,
    current_beta: float,
    dt: float,
    surface: SurfacePlane,
    geometry: RobotGeometry,
) -> float:
    """Next beta command for the two-phase turn-then-walk policy.

    Mutates the cursor (waypoint advance, step budget). When the plan is
    exhausted or timed out the current beta is held.
    """
    if cursor.done(plan) or cursor.timed_out:
        return current_beta
    cursor.steps_used += 1
    if cursor.steps_used > plan.step_budget:
        cursor.timed_out = True
        return current_beta
    pos = surface_position(state, surface, geometry)
    target = plan.waypoints[cursor.index]
    dist = float(np.hypot(target[0] - pos[0], target[1] - pos[2]))
    if dist <= plan.arrival_tolerance:
        cursor.index += 1
        if cursor.done(plan):
            return current_beta
        target = plan.waypoints[cursor.index]
    # The commanded cone axis is the robot's mean heading, so beta itself is
    # the heading proxy; the instantaneous body azimuth oscillates around it.
    bearing = bearing_to(pos, target)
    error = _wrap_angle(bearing - current_beta)
    if abs(error) <= plan.heading_tolerance:
        return current_beta
    max_step = plan.slew_rate * dt
    return current_beta + float(np.clip(error, -max_step, max_step))
