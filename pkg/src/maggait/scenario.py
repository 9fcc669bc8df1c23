"""Time-domain scenario runner.

One engine drives walking, steering, the cargo-deployment flip sequence and
the feasibility-checked climbing runs; the batch `simulate` entry point and
the interactive teleop sessions share this stepping code path, which is what
makes replayed command logs reproduce trajectories bit for bit.

Stepping model per fixed timestep dt (default: one oscillation cycle divided
into `steps_per_cycle` equal slices, so every cycle is discretized the same
way at any frequency):

    1. advance the oscillator / deployment ramp to get alpha
    2. look up beta (schedule, waypoint follower, or live command)
    3. fit the swept-field cone at the robot's position and build the
       idealized cone field vector for the current alpha
    4. pick the anchor (oscillation-direction rule on near-horizontal
       surfaces, projected-field pivot sense otherwise), register it on the
       surface if it changed, and rotate the body about it
    5. apply the empirical cargo slip factor to the in-plane displacement
    6. run the optional anchoring feasibility check and record the sample
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .control import SteeringSchedule, WaypointCursor, WaypointPlan, waypoint_controller
from .gait import (
    GaitParams,
    StabilityFlags,
    StabilityThresholds,
    clearance_violations,
    cone_field,
    load_factor,
    stability_check,
    standing_state,
    step_pose,
    stride_from_cone,
)
from .rig import ConeParameters, RigConfig, RigState, cone_parameters, rig_field
from .robot import (
    Anchor,
    AnchoringReport,
    RobotGeometry,
    RobotState,
    SurfacePlane,
    anchoring_analysis,
)


class DeploymentPhase(str, Enum):
    WALKING = "WALKING"
    FLIPPING = "FLIPPING"
    TIP_CONTACT = "TIP_CONTACT"
    INJECTING = "INJECTING"
    RECOVERING = "RECOVERING"


_PHASE_ORDER = [
    DeploymentPhase.WALKING,
    DeploymentPhase.FLIPPING,
    DeploymentPhase.TIP_CONTACT,
    DeploymentPhase.INJECTING,
    DeploymentPhase.RECOVERING,
    DeploymentPhase.WALKING,
]


@dataclass(frozen=True)
class Scenario:
    """Everything a deterministic run needs."""

    rig: RigConfig = field(default_factory=RigConfig)
    robot: RobotGeometry = field(default_factory=RobotGeometry)
    gait: GaitParams = field(default_factory=GaitParams)
    surface: SurfacePlane | None = None
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, -9.81, 0.0]))
    duration: float = 10.0
    dt: float | None = None
    start_position: np.ndarray | None = None
    beta_schedule: SteeringSchedule = field(default_factory=SteeringSchedule)
    waypoints: WaypointPlan | None = None
    deploy_at: float | None = None
    deploy_dwell: float = 20.0
    deploy_ramp_rate: float | None = None
    check_anchoring: bool = False
    anchoring_safety_factor: float = 0.0
    clearance_tolerance: float = 0.2e-3
    stability: StabilityThresholds = field(default_factory=StabilityThresholds)
    cone_refit_distance: float = 5e-4
    name: str = "scenario"

    def __post_init__(self) -> None:
        object.__setattr__(self, "gravity", np.asarray(self.gravity, float))
        if self.surface is None:
            wp = self.rig.working_point
            object.__setattr__(self, "surface", SurfacePlane(point=wp, normal=np.array([0.0, 1.0, 0.0])))
        if self.start_position is None:
            object.__setattr__(self, "start_position", self.surface.project(self.rig.working_point))
        else:
            object.__setattr__(self, "start_position", np.asarray(self.start_position, float))
        if self.effective_dt() <= 0:
            raise ValueError("dt must be > 0")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")

    def effective_dt(self) -> float:
        if self.dt is not None:
            return float(self.dt)
        return 1.0 / (self.gait.frequency * self.gait.steps_per_cycle)


@dataclass(frozen=True)
class TrajectorySample:
    time: float
    state: RobotState
    alpha: float
    beta: float
    anchor: Anchor
    flags: StabilityFlags
    pitch_theta: float


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    data: dict


@dataclass
class Trajectory:
    samples: list[TrajectorySample]
    events: list[Event]
    deployment_log: list[dict]
    dose_released: float
    truncated: bool = False

    def positions(self) -> np.ndarray:
        return np.array([s.state.reference_position for s in self.samples])

    def displacement(self) -> np.ndarray:
        return self.samples[-1].state.reference_position - self.samples[0].state.reference_position


class PhaseOrderError(RuntimeError):
    pass


@dataclass
class _Oscillator:
    """Phase-continuous triangular/sinusoidal oscillation source."""

    params: GaitParams
    phase: float = 0.0  # cycle fraction in [0, 1)

    def advance(self, dt: float) -> float:
        self.phase = (self.phase + self.params.frequency * dt) % 1.0
        return self.alpha()

    def alpha(self) -> float:
        p = self.params
        if p.waveform == "sinusoidal":
            return p.alpha_max * float(np.sin(2.0 * np.pi * self.phase))
        if self.phase < 0.25:
            return p.alpha_max * 4.0 * self.phase
        if self.phase < 0.75:
            return p.alpha_max * (2.0 - 4.0 * self.phase)
        return p.alpha_max * (4.0 * self.phase - 4.0)

    def set_descending_from_peak(self) -> None:
        """Re-enter the cycle at +alpha_max heading down (post-deployment)."""
        self.phase = 0.25


class SimulationEngine:
    """Deterministic fixed-step state machine shared by batch and teleop runs."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.dt = scenario.effective_dt()
        self.time = 0.0
        self.gait = scenario.gait
        self.osc = _Oscillator(self.gait)
        self.beta = scenario.beta_schedule.beta_at(0.0)
        self.beta_override: float | None = None
        self.alpha = 0.0
        self.prev_alpha = 0.0
        self.phase = DeploymentPhase.WALKING
        self.dose_released = 0.0
        self._inject_elapsed = 0.0
        self.deploy_pending = False
        self.truncated = False
        self.events: list[Event] = []
        self.deployment_log: list[dict] = []
        self.cursor = WaypointCursor()
        self._last_anchoring: AnchoringReport | None = None
        self._last_clearance: list[str] = []
        cone = self._fit_cone(scenario.start_position, self.beta)
        self.cone = cone
        self.state = standing_state(
            scenario.robot, cone, scenario.surface, scenario.start_position, beta_deg=self.beta
        )
        self.samples: list[TrajectorySample] = [self._sample()]
        self._log_phase(DeploymentPhase.WALKING)

    # -- helpers ---------------------------------------------------------

    def _fit_cone(self, position: np.ndarray, beta: float) -> ConeParameters:
        """Cone fit with a deterministic movement-threshold cache.

        The fit varies on the mm scale while steps move the robot microns,
        so it is refit only after `cone_refit_distance` of travel or any
        beta change. The cache state depends only on the trajectory itself,
        which keeps replays bit-identical.
        """
        position = np.asarray(position, float)
        cached = getattr(self, "_cone_cache", None)
        if cached is not None:
            last_pos, last_beta, cone = cached
            if beta == last_beta and float(np.linalg.norm(position - last_pos)) <= self.scenario.cone_refit_distance:
                return cone
        cone = cone_parameters(self.scenario.rig, beta, position)
        self._cone_cache = (position.copy(), beta, cone)
        return cone

    def _flags(self) -> StabilityFlags:
        return stability_check(self.gait, self.cone.pitch_theta, self.scenario.stability)

    def _sample(self) -> TrajectorySample:
        return TrajectorySample(
            time=self.time,
            state=self.state,
            alpha=self.alpha,
            beta=self.beta,
            anchor=self.state.anchor,
            flags=self._flags(),
            pitch_theta=self.cone.pitch_theta,
        )

    def _emit(self, kind: str, **data) -> None:
        self.events.append(Event(time=self.time, kind=kind, data=data))

    def _log_phase(self, phase: DeploymentPhase) -> None:
        self.deployment_log.append({"phase": phase.value, "time": self.time, "alpha": self.alpha})

    def _enter_phase(self, phase: DeploymentPhase) -> None:
        expected = {
            DeploymentPhase.WALKING: (DeploymentPhase.RECOVERING,),
            DeploymentPhase.FLIPPING: (DeploymentPhase.WALKING,),
            DeploymentPhase.TIP_CONTACT: (DeploymentPhase.FLIPPING,),
            DeploymentPhase.INJECTING: (DeploymentPhase.TIP_CONTACT,),
            DeploymentPhase.RECOVERING: (DeploymentPhase.INJECTING,),
        }
        if self.phase not in expected[phase]:
            raise PhaseOrderError(f"illegal transition {self.phase} -> {phase}")
        self.phase = phase
        self._log_phase(phase)
        self._emit("phase", phase=phase.value)

    def _ramp_rate(self) -> float:
        if self.scenario.deploy_ramp_rate is not None:
            return float(self.scenario.deploy_ramp_rate)
        return self.gait.ramp_rate()

    # -- command surface (teleop) ---------------------------------------

    def command_beta(self, beta: float) -> None:
        self.beta_override = float(beta)

    def command_gait(self, params: GaitParams) -> None:
        # amplitude/frequency changes keep the oscillation phase continuous
        self.gait = params
        self.osc.params = params

    def request_deploy(self) -> None:
        if self.phase != DeploymentPhase.WALKING:
            raise PhaseOrderError("deployment can only start while walking")
        self.deploy_pending = True

    # -- stepping --------------------------------------------------------

    def _next_alpha(self) -> float:
        rate = self._ramp_rate() * self.dt
        if self.phase == DeploymentPhase.WALKING:
            if self.deploy_pending:
                self.deploy_pending = False
                self._enter_phase(DeploymentPhase.FLIPPING)
                return min(self.alpha + rate, 180.0)
            return self.osc.advance(self.dt)
        if self.phase in (DeploymentPhase.FLIPPING, DeploymentPhase.TIP_CONTACT):
            return min(self.alpha + rate, 180.0)
        if self.phase == DeploymentPhase.INJECTING:
            return self.alpha
        # RECOVERING
        return max(self.alpha - rate, self.gait.alpha_max)

    def _pick_anchor(self, B_new: np.ndarray) -> Anchor:
        surface = self.scenario.surface
        if self.phase in (DeploymentPhase.TIP_CONTACT, DeploymentPhase.INJECTING):
            return Anchor.TIP
        if self.phase == DeploymentPhase.RECOVERING:
            # stay on the tip until a front foot is back on the surface
            feet = self.state.foot_positions(self.scenario.robot)
            for name in ("FR", "FL"):
                if surface.height_of(feet[name]) <= 0.0:
                    return Anchor(name)
            return Anchor.TIP
        if self.phase == DeploymentPhase.FLIPPING:
            return self.state.anchor if self.state.anchor in (Anchor.FL, Anchor.FR) else Anchor.FR
        if abs(surface.normal[1]) > 0.99:
            dalpha = self.alpha - self.prev_alpha
            if dalpha > 0:
                return Anchor.FR
            if dalpha < 0:
                return Anchor.FL
            return self.state.anchor
        # general surface: pivot sense of the projected field about the normal
        n = surface.normal
        B_old = cone_field(self.cone, self.prev_alpha, self.beta)
        p_old = B_old - np.dot(B_old, n) * n
        p_new = B_new - np.dot(B_new, n) * n
        sense = float(np.dot(np.cross(p_old, p_new), n))
        if sense < -1e-18:
            return Anchor.FR
        if sense > 1e-18:
            return Anchor.FL
        return self.state.anchor

    def step(self) -> bool:
        """Advance one dt; returns False once the run is truncated."""
        if self.truncated:
            return False
        scen = self.scenario
        self.prev_alpha = self.alpha
        self.alpha = self._next_alpha()
        self.time += self.dt

        if self.beta_override is not None:
            self.beta = self.beta_override
        elif scen.waypoints is not None:
            was_done = self.cursor.done(scen.waypoints)
            self.beta = waypoint_controller(
                self.state, scen.waypoints, self.cursor, self.beta, self.dt, scen.surface, scen.robot
            )
            if self.cursor.timed_out and not any(e.kind == "controller_timeout" for e in self.events):
                self._emit("controller_timeout", waypoint=self.cursor.index)
            if not was_done and self.cursor.done(scen.waypoints):
                p = self.state.reference_position
                self._emit("plan_complete", x=float(p[0]), z=float(p[2]))
        else:
            self.beta = scen.beta_schedule.beta_at(self.time)

        self.cone = self._fit_cone(self.state.reference_position, self.beta)
        B = cone_field(self.cone, self.alpha, self.beta)

        anchor = self._pick_anchor(B)
        if anchor != self.state.anchor:
            self._emit("anchor_switch", anchor=anchor.value, alpha=self.alpha)
        prev_state = self.state
        new_state = step_pose(self.state, B, anchor, scen.surface, scen.robot)

        # empirical cargo slip: scale the in-plane displacement
        factor = load_factor(scen.robot.cargo_mass, scen.robot.load_capacity)
        if factor <= 0.0:
            if not any(e.kind == "immobile" for e in self.events):
                self._emit("immobile", cargo_mass=scen.robot.cargo_mass)
            delta = new_state.reference_position - prev_state.reference_position
            normal_part = np.dot(delta, scen.surface.normal) * scen.surface.normal
            new_state = replace(new_state, reference_position=prev_state.reference_position + normal_part)
        elif factor < 1.0:
            delta = new_state.reference_position - prev_state.reference_position
            normal_part = np.dot(delta, scen.surface.normal) * scen.surface.normal
            tangential = delta - normal_part
            new_state = replace(
                new_state,
                reference_position=prev_state.reference_position + normal_part + factor * tangential,
            )
        self.state = replace(new_state, time=self.time)

        # deployment progress
        if self.phase == DeploymentPhase.FLIPPING:
            tip_h = scen.surface.height_of(self.state.point_world(scen.robot.capillary_tip_offset))
            if tip_h <= 0.0:
                # anchor handoff happens on the next step so the tip gets
                # registered onto the surface by step_pose
                self._enter_phase(DeploymentPhase.TIP_CONTACT)
                self._emit("tip_contact", alpha=self.alpha)
            elif self.alpha >= 180.0:
                self._emit("deployment_failure", reason="tip never reached the surface")
                self.truncated = True
        elif self.phase == DeploymentPhase.TIP_CONTACT and self.alpha >= 180.0:
            self._enter_phase(DeploymentPhase.INJECTING)
            self._inject_elapsed = 0.0
        elif self.phase == DeploymentPhase.INJECTING:
            self._inject_elapsed += self.dt
            if scen.deploy_dwell > 0:
                self.dose_released = min(1.0, self._inject_elapsed / scen.deploy_dwell)
            if self._inject_elapsed >= scen.deploy_dwell:
                self._enter_phase(DeploymentPhase.RECOVERING)
        elif self.phase == DeploymentPhase.RECOVERING:
            if self.alpha <= self.gait.alpha_max and self.state.anchor in (Anchor.FL, Anchor.FR):
                self._enter_phase(DeploymentPhase.WALKING)
                self.osc.set_descending_from_peak()

        # soft-surface clearance flags, emitted on change only
        names = clearance_violations(self.state, scen.robot, scen.surface, scen.clearance_tolerance)
        if names != self._last_clearance:
            if names:
                self._emit("clearance", parts=names)
            self._last_clearance = names

        if scen.check_anchoring:
            sample = rig_field(scen.rig, RigState(alpha=self.alpha, beta=self.beta), self.state.reference_position)
            report = anchoring_analysis(
                self.state, sample, scen.robot, scen.gravity, scen.surface, scen.anchoring_safety_factor
            )
            self._last_anchoring = report
            if not report.feasible:
                self._emit(
                    "anchoring_infeasible",
                    normal_force=report.normal_force,
                    ratio=report.ratio,
                    step=len(self.samples),
                )
                self.truncated = True

        self.samples.append(self._sample())
        return not self.truncated

    def run(self, duration: float | None = None) -> None:
        duration = self.scenario.duration if duration is None else duration
        n_steps = int(np.floor(duration / self.dt + 1e-9))
        for _ in range(n_steps):
            if not self.step():
                break

    def trajectory(self) -> Trajectory:
        return Trajectory(
            samples=list(self.samples),
            events=list(self.events),
            deployment_log=list(self.deployment_log),
            dose_released=self.dose_released,
            truncated=self.truncated,
        )


def simulate(scenario: Scenario) -> Trajectory:
    """Run a scenario start to finish; pure function of its inputs."""
    engine = SimulationEngine(scenario)
    if scenario.deploy_at is not None:
        n_before = int(np.floor(scenario.deploy_at / engine.dt + 1e-9))
        for _ in range(n_before):
            if not engine.step():
                break
        if not engine.truncated:
            engine.request_deploy()
        remaining = int(np.floor(scenario.duration / engine.dt + 1e-9)) - n_before
        for _ in range(max(0, remaining)):
            if not engine.step():
                break
    else:
        engine.run()
    return engine.trajectory()


def run_deployment(scenario: Scenario, trigger_time: float) -> Trajectory:
    """Walking run that executes the full flip sequence at trigger_time."""
    return simulate(replace(scenario, deploy_at=trigger_time))


def characterization_sweep(
    kind: str,
    values: list[float],
    scenario: Scenario | None = None,
    steps: int = 360,
) -> list[dict]:
    """Locomotion characterization tables.

    kind = 'alpha' (oscillation amplitude, deg), 'pitch' (walking-plane
    vertical offsets from the rig center, m), 'frequency' (Hz) or 'load'
    (cargo mass, kg). Speeds are stride x frequency x slip factor; strides
    come from the one-cycle cone runner at the scenario's walking position.
    """
    if len(values) == 0:
        raise ValueError("sweep range is empty")
    scen = scenario or Scenario()
    base_point = scen.start_position
    rows: list[dict] = []
    for v in values:
        gait = scen.gait
        point = np.asarray(base_point, float)
        cargo = scen.robot.cargo_mass
        if kind == "alpha":
            gait = replace(gait, alpha_max=float(v))
        elif kind == "pitch":
            point = np.array([0.0, float(v), 0.0])
        elif kind == "frequency":
            gait = replace(gait, frequency=float(v))
        elif kind == "load":
            cargo = float(v)
        else:
            raise ValueError(f"unknown sweep kind {kind!r}")
        cone = cone_parameters(scen.rig, 0.0, point)
        stride = stride_from_cone(scen.robot, cone, gait.alpha_max, steps)
        factor = load_factor(cargo, scen.robot.load_capacity)
        speed = stride * gait.frequency * factor
        flags = stability_check(gait, cone.pitch_theta, scen.stability)
        rows.append(
            {
                "kind": kind,
                "x": float(v),
                "pitch_theta": cone.pitch_theta,
                "stride": stride,
                "speed": speed,
                "load_factor": factor,
                "flags": flags.as_bitmask(),
            }
        )
    return rows


@dataclass
class ClimbReport:
    min_ratio: float
    mean_ratio: float
    min_normal_force: float
    speed: float
    truncated: bool


def climb_scenario(scenario: Scenario) -> tuple[Trajectory, ClimbReport]:
    """Run a wall/ceiling scenario with per-step anchoring checks.

    The scenario's surface must be vertical (normal perpendicular to
    gravity) or inverted (normal pointing along gravity).
    """
    surface = scenario.surface
    g = scenario.gravity / np.linalg.norm(scenario.gravity)
    n_dot_g = float(np.dot(surface.normal, g))
    if not (abs(n_dot_g) < 1e-9 or n_dot_g > 0.99):
        raise ValueError("climb surface must be vertical or inverted")
    scen = replace(scenario, check_anchoring=True)
    engine = SimulationEngine(scen)
    ratios: list[float] = []
    normals: list[float] = []
    n_steps = int(np.floor(scen.duration / engine.dt + 1e-9))
    for _ in range(n_steps):
        alive = engine.step()
        report: AnchoringReport = engine._last_anchoring
        ratios.append(report.ratio)
        normals.append(report.normal_force)
        if not alive:
            break
    traj = engine.trajectory()
    elapsed = traj.samples[-1].time if len(traj.samples) > 1 else 0.0
    disp = traj.displacement()
    tangential = disp - np.dot(disp, surface.normal) * surface.normal
    speed = float(np.linalg.norm(tangential) / elapsed) if elapsed > 0 else 0.0
    finite = [r for r in ratios if np.isfinite(r)]
    report = ClimbReport(
        min_ratio=min(finite) if finite else float("inf"),
        mean_ratio=float(np.mean(finite)) if finite else float("inf"),
        min_normal_force=min(normals) if normals else 0.0,
        speed=speed,
        truncated=traj.truncated,
    )
    return traj, report


# -- trajectory export ---------------------------------------------------

TRAJECTORY_COLUMNS = [
    "t",
    "x",
    "y",
    "z",
    "qw",
    "qx",
    "qy",
    "qz",
    "alpha",
    "beta",
    "anchor",
    "flags",
]


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def trajectory_csv(traj: Trajectory) -> str:
    """Fixed-format CSV, one row per sample (diff-stable)."""
    lines = [",".join(TRAJECTORY_COLUMNS)]
    for s in traj.samples:
        p = s.state.reference_position
        q = s.state.orientation
        lines.append(
            ",".join(
                [
                    _fmt(s.time),
                    _fmt(p[0]),
                    _fmt(p[1]),
                    _fmt(p[2]),
                    _fmt(q[0]),
                    _fmt(q[1]),
                    _fmt(q[2]),
                    _fmt(q[3]),
                    _fmt(s.alpha),
                    _fmt(s.beta),
                    s.anchor.value,
                    str(s.flags.as_bitmask()),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def events_json(traj: Trajectory) -> str:
    doc = {
        "events": [{"time": e.time, "kind": e.kind, **e.data} for e in traj.events],
        "deployment": {
            "phases": traj.deployment_log,
            "dose_released": traj.dose_released,
        },
        "truncated": traj.truncated,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
