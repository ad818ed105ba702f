import math

import pytest
import yaml

from hstfso.config import PRESETS, config_digest, load_config, parse_config, preset_text, scenario_to_dict
from hstfso.control import ControllerMode
from hstfso.errors import ConfigError
from hstfso.geometry import PlacementMode
from hstfso.units import KMH_TO_MPS


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    cfg = load_config(name)
    assert cfg.source == f"preset:{name}"
    assert cfg.scenario.optical.wavelength_m == pytest.approx(1550e-9)


def test_table1_values(table1):
    o, r = table1.optical, table1.receiver
    assert o.tx_power_w == pytest.approx(10e-3)
    assert o.rx_aperture_area_m2 == pytest.approx(95e-4)
    assert o.tx_aperture_area_m2 == pytest.approx(9e-4)
    assert r.apd_gain == 10 and r.excess_noise_factor == 3.2
    assert table1.controller.mode is ControllerMode.FIXED
    assert table1.controller.fixed_full_divergence_rad == pytest.approx(1e-3)
    assert table1.train_speed_mps == pytest.approx(400 * KMH_TO_MPS)


def test_preset_grids():
    fig8 = load_config("fig8").analysis
    assert len(fig8.ranges_m) == 1926 and fig8.ranges_m[-1] == 2000.0
    assert len(fig8.visibilities_km) == 10
    assert fig8.visibilities_km[-1] == pytest.approx(1.0)
    fig5 = load_config("fig5")
    assert fig5.analysis.wavelengths_nm == [850.0, 1310.0, 1550.0]
    assert fig5.scenario.optical.tx_power_w == pytest.approx(10e-3)
    fig2 = load_config("fig2")
    g, t = fig2.placements
    assert g.mode is PlacementMode.GANTRY and t.mode is PlacementMode.TRACKSIDE


def test_file_path(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("channel:\n  visibility_km: 0.7\n")
    cfg = load_config(path)
    assert cfg.scenario.visibility_km == 0.7
    assert cfg.source == str(path)


def test_unit_suffixes():
    cfg = parse_config(
        {
            "optical": {"wavelength_um": 1.31, "tx_power_dbm": 13.0, "rx_aperture_area_mm2": 9500},
            "controller": {"fixed_full_divergence_urad": 500},
            "train": {"speed_mps": 50},
            "channel": {"visibility_m": 800},
        }
    ).scenario
    assert cfg.optical.wavelength_m == pytest.approx(1.31e-6)
    assert cfg.optical.tx_power_w == pytest.approx(10 ** (13 / 10) * 1e-3)
    assert cfg.optical.rx_aperture_area_m2 == pytest.approx(95e-4)
    assert cfg.controller.fixed_full_divergence_rad == pytest.approx(5e-4)
    assert cfg.train_speed_mps == 50
    assert cfg.visibility_km == pytest.approx(0.8)


@pytest.mark.parametrize(
    "doc",
    [
        {"optical": {"wavelenght_nm": 1550}},
        {"weather": {}},
        {"optical": {"tx_power_mw": 10, "tx_power_w": 0.01}},
        {"optical": {"tx_power_mw": "lots"}},
        {"controller": {"mode": "warp"}},
        {"channel": {"visibility_km": 0}},
        {"analysis": {"ranges_m": {"start": 10, "stop": 5, "step": 1}}},
        {"analysis": {"ranges_m": "many"}},
        {"placements": {"overhead": {}}},
        {"receiver": {"apd_gain": 0.2}},
        [1, 2],
    ],
)
def test_rejected(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_missing_preset():
    with pytest.raises(ConfigError):
        load_config("fig99")
    with pytest.raises(ConfigError):
        preset_text("fig99")


def test_malformed_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("optical: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_roundtrip_and_digest(table1):
    canon = scenario_to_dict(table1)
    again = parse_config(canon).scenario
    assert again == table1
    assert config_digest(again) == config_digest(table1)


def test_digest_ignores_key_order(tmp_path):
    doc = yaml.safe_load(preset_text("table1"))
    reordered = {k: dict(reversed(list(v.items()))) for k, v in reversed(list(doc.items()))}
    a = tmp_path / "a.yaml"
    b = tmp_path / "b.yaml"
    a.write_text(yaml.safe_dump(doc, sort_keys=False))
    b.write_text(yaml.safe_dump(reordered, sort_keys=False))
    assert config_digest(load_config(a).scenario) == config_digest(load_config(b).scenario)


def test_digest_sees_changes(table1):
    other = parse_config({"channel": {"visibility_km": 0.9}}).scenario
    assert config_digest(other) != config_digest(table1)
    assert len(config_digest(table1)) == 64


def test_defaults_are_finite():
    cfg = parse_config(None).scenario
    assert all(math.isfinite(x) for x in cfg.controller.switch_angles_rad)
