import json

import numpy as np
import pytest

from maggait.config import (
    ConfigError,
    load_config,
    load_scenario,
    parse_config,
    parse_scenario,
    resolved_config_dict,
)


def test_empty_config_is_defaults():
    parts = parse_config({})
    assert parts["rig"].m1_m2_center_distance == pytest.approx(0.550)
    assert parts["robot"].body_mass == pytest.approx(25e-6)
    assert parts["gait"].alpha_max == 72.0


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        parse_config({"rig": {"coil_current": 3}})
    with pytest.raises(ConfigError):
        parse_config({"gait": {"alpha_max": 999}})


def test_load_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"rig": {"m3_remanence": 1.30}, "robot": {"cargo_mass": 5e-5}}))
    parts = load_config(path)
    assert parts["rig"].m3_remanence == 1.30
    assert parts["robot"].cargo_mass == 5e-5


def test_load_config_env(tmp_path, monkeypatch):
    path = tmp_path / "env.json"
    path.write_text(json.dumps({"gait": {"frequency": 0.8}}))
    monkeypatch.setenv("MAGGAIT_CONFIG", str(path))
    assert load_config()["gait"].frequency == 0.8


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_scenario_round_trip(tmp_path):
    doc = {
        "robot": {"front_foot_span": 0.001},
        "scenario": {
            "name": "custom",
            "duration": 3.0,
            "surface": {"point": [0, -0.02, 0], "normal": [0, 1, 0]},
            "beta_schedule": [[0.0, 0.0], [2.0, 45.0]],
            "waypoints": [[0.01, 0.0], [0.01, -0.01]],
            "arrival_tolerance": 0.001,
        },
    }
    scen = parse_scenario(doc)
    assert scen.name == "custom"
    assert scen.duration == 3.0
    assert scen.beta_schedule.beta_at(1.0) == pytest.approx(22.5)
    assert scen.waypoints.arrival_tolerance == 0.001
    np.testing.assert_allclose(scen.surface.normal, [0, 1, 0])
    path = tmp_path / "scen.json"
    path.write_text(json.dumps(doc))
    assert load_scenario(path).duration == 3.0


def test_scenario_unknown_key():
    with pytest.raises(ConfigError):
        parse_scenario({"scenario": {"warp": 9}})


def test_resolved_config_is_json(tmp_path):
    parts = parse_config({})
    doc = resolved_config_dict(parts)
    text = json.dumps(doc)
    assert "m1_m2_center_distance" in text


def test_bundled_scenarios_parse():
    from maggait.cli import bundled_scenario_path

    for name in ("straight_walk", "deploy_phantom", "climb_wall", "square_path"):
        scen = load_scenario(bundled_scenario_path(name))
        assert scen.duration > 0
