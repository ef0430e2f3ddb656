import json

import pytest

from explorebug.config import (CONFIG_KEYS, ScenarioConfig, config_from_dict, config_schema,
                               load_config)
from explorebug.errors import ConfigError


def test_defaults_and_presets():
    c = ScenarioConfig()
    assert c.dt == 0.05 and c.inflation == pytest.approx(0.45) and c.clearance == pytest.approx(0.9)
    r = ScenarioConfig.real_world()
    assert (r.size, r.sensor_range, r.safety_obstacles, r.safety_drones, r.spin_speed) == \
        (8.0, 2.0, 0.25, 1.0, 0.1)
    assert ScenarioConfig.simulation() == c


@pytest.mark.parametrize("key,value", [("size", -1), ("n_drones", 0), ("heuristic", "random"),
                                       ("map_resolution", 0), ("density", -0.1), ("seed", -2),
                                       ("frontier_min", 9.0), ("start_poses", [[1, 1]] * 2)])
def test_validation_names_the_key(key, value):
    with pytest.raises(ConfigError) as exc:
        config_from_dict({key: value})
    assert exc.value.key == key
    assert key in str(exc.value)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"n_drone": 2})
    assert exc.value.key == "n_drone"


def test_load(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"n_drones": 3.0, "density": 0.1, "sweep": {"n_drones": [1]}}))
    c = load_config(p)
    assert c.n_drones == 3 and c.density == 0.1
    with pytest.raises(ConfigError, match="config not found"):
        load_config(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.json")


def test_to_dict_roundtrip():
    c = ScenarioConfig(n_drones=2, start_poses=[[1, 1], [4, 1, 0.5]])
    assert config_from_dict(json.loads(json.dumps(c.to_dict()))) == c


def test_schema_covers_every_key():
    s = config_schema()
    assert set(s["properties"]) == set(CONFIG_KEYS) | {"sweep"}
