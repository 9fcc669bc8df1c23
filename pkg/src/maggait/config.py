"""Structured configuration file handling.

One JSON document configures rig, robot, gait and stability thresholds.
Missing sections or keys fall back to the defaults, so `{}` is a valid
config equal to the built-in rig. Scenario files extend the same schema
with a "scenario" section (surface, schedule, duration, waypoints...).

Example (all values optional):

    {
      "rig": {
        "m1_m2_center_distance": 0.55,
        "m3_center_offset": 0.156,
        "working_point_offset": 0.020,
        "working_point_side": -1,
        "pair_remanence": 1.35,
        "m3_remanence": 1.28
      },
      "robot": {
        "front_foot_span": 0.00095,
        "body_mass": 2.5e-05,
        "cargo_mass": 0.0,
        "moment_magnitude": 0.00084375,
        "capillary_tip_offset": [0.0025, -0.0007, 0.0]
      },
      "gait": {"alpha_max": 72.0, "frequency": 1.2, "waveform": "triangular"},
      "stability": {"alpha_max": 72.0, "pitch": 70.0, "frequency": 1.5}
    }
"""

from __future__ import annotations

import dataclasses
import json
import os
from pathlib import Path

import numpy as np

from .control import SteeringSchedule, WaypointPlan
from .gait import GaitParams, StabilityThresholds
from .rig import RigConfig
from .robot import RobotGeometry, SurfacePlane
from .scenario import Scenario

ENV_CONFIG = "MAGGAIT_CONFIG"


class ConfigError(ValueError):
    pass


def _build(cls, section: dict, caster=None):
    valid = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - valid
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = dict(section)
    if caster:
        kwargs = caster(kwargs)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {cls.__name__} section: {exc}") from exc


def _robot_caster(kwargs: dict) -> dict:
    for key in ("capillary_tip_offset", "body_axis"):
        if key in kwargs:
            kwargs[key] = np.asarray(kwargs[key], float)
    return kwargs


def _rig_caster(kwargs: dict) -> dict:
    for key in ("pair_half_lengths", "m3_half_lengths", "working_volume_size"):
        if key in kwargs:
            kwargs[key] = tuple(float(v) for v in kwargs[key])
    return kwargs


def parse_config(doc: dict) -> dict:
    """Parse the common sections; returns {'rig', 'robot', 'gait', 'stability'}."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return {
        "rig": _build(RigConfig, doc.get("rig", {}), _rig_caster),
        "robot": _build(RobotGeometry, doc.get("robot", {}), _robot_caster),
        "gait": _build(GaitParams, doc.get("gait", {})),
        "stability": _build(StabilityThresholds, doc.get("stability", {})),
    }


def load_config(path: str | Path | None = None) -> dict:
    """Load a config file; falls back to $MAGGAIT_CONFIG, then defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def parse_scenario(doc: dict) -> Scenario:
    """Build a Scenario from a full scenario document."""
    parts = parse_config(doc)
    sc = dict(doc.get("scenario", {}))
    kwargs: dict = {
        "rig": parts["rig"],
        "robot": parts["robot"],
        "gait": parts["gait"],
        "stability": parts["stability"],
    }
    if "surface" in sc:
        surf = sc.pop("surface")
        kwargs["surface"] = SurfacePlane(
            point=np.asarray(surf["point"], float), normal=np.asarray(surf["normal"], float)
        )
    if "gravity" in sc:
        kwargs["gravity"] = np.asarray(sc.pop("gravity"), float)
    if "start_position" in sc:
        kwargs["start_position"] = np.asarray(sc.pop("start_position"), float)
    if "beta_schedule" in sc:
        pts = tuple((float(t), float(b)) for t, b in sc.pop("beta_schedule"))
        kwargs["beta_schedule"] = SteeringSchedule(points=pts)
    if "waypoints" in sc:
        wps = tuple((float(x), float(z)) for x, z in sc.pop("waypoints"))
        opts = {}
        for key in ("arrival_tolerance", "heading_tolerance", "slew_rate", "step_budget"):
            if key in sc:
                opts[key] = sc.pop(key)
        kwargs["waypoints"] = WaypointPlan(waypoints=wps, **opts)
    passthrough = {
        "duration",
        "dt",
        "deploy_at",
        "deploy_dwell",
        "deploy_ramp_rate",
        "check_anchoring",
        "anchoring_safety_factor",
        "clearance_tolerance",
        "cone_refit_distance",
        "name",
    }
    unknown = set(sc) - passthrough
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    kwargs.update(sc)
    try:
        return Scenario(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)


def resolved_config_dict(parts: dict) -> dict:
    """Round-trippable JSON form of parsed config parts (for manifests)."""

    def encode(obj):
        if isinstance(obj, np.ndarray):
            return [float(v) for v in obj]
        if isinstance(obj, tuple):
            return [encode(v) for v in obj]
        return obj

    out = {}
    for name, part in parts.items():
        out[name] = {f.name: encode(getattr(part, f.name)) for f in dataclasses.fields(part)}
    return out
