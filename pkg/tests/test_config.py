from __future__ import annotations

import numpy as np
import pytest

from rfisim.config import DEFAULTS, interpret, load_config, resolve, satellite_from_entry
from rfisim.errors import ConfigError
from rfisim.satellite import aperture_gain, preset


def test_defaults_resolve():
    run = interpret(resolve({}))
    assert run.iterations == 1000 and run.rhos == [1.0] and run.seed == 0
    assert run.alpha_n == [10.0, 35.0, 65.0]
    assert len(run.azimuths) == 36 and run.azimuths[1] == pytest.approx(np.deg2rad(10.0))
    assert run.material.epsilon == 5.24 and run.material.sigma_rough == 5e-5
    assert run.satellites[0][0] == preset("tempest-178") and run.satellites[0][1] is None
    assert run.d_max == 200.0 and run.placement.min_spacing == 0.5
    assert resolve({}) == resolve({"schema_version": 1})
    assert DEFAULTS["campaign"]["iterations"] == 1000  # not mutated by resolve


def test_scalars_become_lists():
    cfg = resolve({"campaign": {"rho": 0.5, "alpha_n_deg": 35}})
    assert cfg["campaign"]["rho"] == [0.5] and cfg["campaign"]["alpha_n_deg"] == [35.0]


@pytest.mark.parametrize("doc,msg", [
    ({"schema_version": 2}, "schema_version"),
    ({"bogus": 1}, "unknown key 'bogus'"),
    ({"scenario": {"lamda_g": 3}}, "scenario.'lamda_g'"),
    ({"scenario": {"type": "rural"}}, "scenario.type"),
    ({"satellites": []}, "at least one"),
    ({"campaign": {"azimuth_step_deg": 0}}, "azimuth_step_deg"),
    ({"scenario": {"lambda_g": None}}, "lambda_g or nodes_file"),
    ({"material": {"epsilon": "concrete"}}, "material"),
    ({"satellites": [{"preset": "nope"}]}, "unknown satellite preset"),
    ({"satellites": [{"preset": "tempest-178", "colour": 1}]}, "unknown satellite keys"),
    ({"satellites": [{"name": "x", "h_a_km": 500}]}, "missing"),
    ({"satellites": [{"preset": "tempest-178", "i_th_dbw": 3}]}, "threshold"),
])
def test_invalid_configs(doc, msg):
    with pytest.raises(ConfigError, match=msg):
        interpret(resolve(doc))


def test_satellite_overrides():
    sat, an = satellite_from_entry({"preset": "tempest-178", "f_c_ghz": 164, "alpha_n_deg": 35})
    assert sat.f_c == 164e9 and an == [35.0]
    assert sat.theta_hb == preset("tempest-178").theta_hb
    # a new beamwidth brings its own aperture gain unless a gain is given
    sat, _ = satellite_from_entry({"preset": "tempest-178", "theta_hb_deg": 3.0})
    assert sat.g_s == pytest.approx(aperture_gain(3.0))
    sat, _ = satellite_from_entry({"preset": "tempest-178", "theta_hb_deg": 3.0, "g_s_dbi": 30.0})
    assert sat.g_s == 30.0
    sat, an = satellite_from_entry({"name": "custom", "h_a_km": 600, "theta_hb_deg": 1.0, "f_c_ghz": 183,
                                    "scan_mode": "limb", "i_th_dbw": -190, "tangent_height_km": 20})
    assert sat.h_a == 600e3 and sat.tangent_height == 20e3 and sat.scan_mode == "limb" and an is None


def test_complex_permittivity():
    run = interpret(resolve({"material": {"epsilon": "5.24 - 0.1j"}}))
    assert run.material.epsilon == complex(5.24, -0.1)
    run = interpret(resolve({"material": {"epsilon": 6}}))
    assert run.material.epsilon == 6.0


def test_load_config_file(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("schema_version: 1\nseed: 5\ncampaign:\n  rho: [0.2, 1.0]\n")
    cfg, text = load_config(p)
    assert cfg["seed"] == 5 and cfg["campaign"]["rho"] == [0.2, 1.0] and text.startswith("schema")
    p.write_text('{"seed": 6}')  # JSON is valid YAML
    assert load_config(p)[0]["seed"] == 6


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.yaml")
    p = tmp_path / "c.yaml"
    p.write_text("seed: 1\nscenario:\n  type: [urban\n")
    with pytest.raises(ConfigError, match=r"c\.yaml:4:1"):
        load_config(p)
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(p)
    p.write_text("campaign: {bogus: 1}\n")
    with pytest.raises(ConfigError, match=r"c\.yaml: unknown key campaign\.'bogus'"):
        load_config(p)


@pytest.mark.parametrize("name", ["urban.yaml", "backhaul.yaml", "quick.yaml"])
def test_shipped_configs_resolve(name):
    from pathlib import Path

    cfg, _ = load_config(Path(__file__).parents[1] / "configs" / name)
    run = interpret(cfg)
    assert run.satellites and run.iterations >= 1
