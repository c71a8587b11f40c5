import json

import pytest

from e2mac.configio import (
    ConfigError,
    LoadedConfig,
    csma_from,
    feasibility_from,
    load_config,
    radio_from,
    scenario_from,
    sim_from,
    sim_seeds,
    sim_variants,
)
from e2mac.radio import LogBase


def write(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return p


def loaded(obj):
    raw = json.dumps(obj).encode()
    return LoadedConfig(obj, raw, None)


def test_no_config_means_defaults():
    cfg = load_config(None)
    assert cfg.data == {} and cfg.path is None
    assert sim_from(cfg).n_t == 500


def test_db_keys_convert_once():
    env = radio_from({"gamma_gap_db": 13.0, "n0_db": -204.0, "log_base": "natural"})
    assert env.gamma_gap == pytest.approx(10**1.3)
    assert env.n0 == pytest.approx(10**-20.4)
    assert env.log_base is LogBase.NATURAL


def test_linear_and_db_together_rejected():
    with pytest.raises(ConfigError, match="radio.gamma_gap"):
        radio_from({"gamma_gap": 20.0, "gamma_gap_db": 13.0})


def test_unknown_keys_and_sections(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_config(write(tmp_path, {"simulation": {}}))
    assert exc.value.field == "simulation"
    with pytest.raises(ConfigError) as exc:
        sim_from(loaded({"sim": {"e_0": 1.0}}))
    assert exc.value.field == "sim.e_0"


def test_bad_json(tmp_path):
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(write(tmp_path, "{oops"))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")


def test_invalid_value_names_nested_field():
    with pytest.raises(ConfigError) as exc:
        sim_from(loaded({"sim": {"e0": -1.0}}))
    assert exc.value.field == "sim.e0"
    with pytest.raises(ConfigError) as exc:
        sim_from(loaded({"sim": {"power": {"p_c": "high"}}}))
    assert exc.value.field == "sim.power.p_c"
    with pytest.raises(ConfigError) as exc:
        sim_from(loaded({"sim": {"n_t": 10.5}}))
    assert exc.value.field == "sim.n_t"


def test_sim_presets_and_overrides():
    table = sim_from(loaded({"sim": {"preset": "table"}}))
    assert table.n_t == 5000 and table.t_ra == 1000.0
    desk = sim_from(loaded({"sim": {"n_t": 200.0, "mac_variant": "E2MAC"}}), mac_variant="CMAC", seed=9)
    assert desk.n_t == 200 and isinstance(desk.n_t, int) and desk.mac_variant == "CMAC" and desk.seed == 9
    with pytest.raises(ConfigError):
        sim_from(loaded({"sim": {"preset": "huge"}}))


def test_seeds_and_variants():
    cfg = loaded({"sim": {"seeds": [1, 2], "variants": [{"mac_variant": "CMAC"}]}})
    assert sim_seeds(cfg) == [1, 2]
    assert sim_variants(cfg) == [{"mac_variant": "CMAC"}]
    with pytest.raises(ConfigError):
        sim_seeds(loaded({"sim": {"seeds": [-1]}}))
    assert sim_seeds(loaded({})) is None


def test_csma_sweep_forms():
    params, loads, phases = csma_from({"sweep": {"g_tau": {"start": 0.0, "stop": 2.0, "num": 3}, "n": [1, 2]}})
    assert loads == pytest.approx([0.0, 1 / params.tau_p, 2 / params.tau_p])
    assert phases == [1, 2]
    _, loads, _ = csma_from({"sweep": {"g": []}})
    assert loads == []
    _, loads, _ = csma_from({})
    assert len(loads) == 201
    with pytest.raises(ConfigError):
        csma_from({"sweep": {"g": [1.0], "g_tau": [1.0]}})
    with pytest.raises(ConfigError):
        csma_from({"sweep": {"n": [0]}})


def test_feasibility_defaults_and_overrides():
    inp = feasibility_from(loaded({}))
    assert inp.n == 10 and inp.w_m == 360e3 and inp.w_h == 144e3
    assert inp.static_margin == pytest.approx(0.016)
    inp = feasibility_from(loaded({"feasibility": {"s_h_db": 20.0, "lam": 0.5, "payload_bits": 4096}}))
    assert inp.s_h == pytest.approx(100.0) and inp.traffic.d_i == 4096
    with pytest.raises(ConfigError):
        feasibility_from(loaded({"feasibility": {"n": 2.5}}))


def test_scenario_bounds():
    sc, lo, hi, report = scenario_from(loaded({"scenario": {"z_min": 5, "z_max": 50, "report_z": [10]}}))
    assert (lo, hi, report) == (5, 50, [10])
    with pytest.raises(ConfigError):
        scenario_from(loaded({"scenario": {"z_min": 60, "z_max": 50}}))


def test_hash_is_of_raw_bytes(tmp_path):
    import hashlib

    p = write(tmp_path, {"sim": {"seed": 3}})
    assert load_config(p).sha256 == hashlib.sha256(p.read_bytes()).hexdigest()
