from dataclasses import replace

import numpy as np
import pytest

from e2mac.lifetime import TrafficProfile, fed_lifetime, node_lifetime
from e2mac.radio import fdma_rate
from e2mac.sim import (
    COMPARE_COLUMNS,
    SUMMARY_COLUMNS,
    SimConfig,
    compare_variants,
    delay_cdf,
    desk_config,
    lifetime_cdf,
    run_many,
    run_sim,
    summary_row,
)
from e2mac.sim.config import ConfigError

VARIANTS = ["E2MAC", "E2MACn", "E2MACr", "CMAC"]


def small(**kw):
    """120 devices on a desk sector with little energy: a full run takes well under a second."""
    base = dict(n_t=120, e0=0.1, seed=1, cluster_size=30.0)
    base.update(kw)
    return desk_config(**base)


@pytest.fixture(scope="module")
def outcomes():
    return {v: run_sim(small(mac_variant=v)) for v in VARIANTS}


@pytest.mark.parametrize("variant", VARIANTS)
def test_energy_conservation(outcomes, variant):
    o = outcomes[variant]
    assert o.conservation_error() <= 1e-9
    assert np.all(o.residual_energy >= -1e-12)


@pytest.mark.parametrize("variant", VARIANTS)
def test_everyone_dies_and_fed_is_min(outcomes, variant):
    o = outcomes[variant]
    deaths = list(o.death_times.values())
    assert len(deaths) == 120 and np.all(np.isfinite(deaths))
    assert o.fed == fed_lifetime(deaths)
    assert o.last_death == max(deaths)
    assert o.delivered == len(o.packet_delays)
    assert np.all(o.packet_delays >= 0)


def test_same_seed_same_outcome():
    a = run_sim(small(mac_variant="E2MACr", seed=4))
    b = run_sim(small(mac_variant="E2MACr", seed=4))
    assert a.death_times == b.death_times
    np.testing.assert_array_equal(a.packet_delays, b.packet_delays)
    c = run_sim(small(mac_variant="E2MACr", seed=5))
    assert c.death_times != a.death_times


def test_transmissions_stay_inside_phase(outcomes):
    for variant in ("E2MAC", "E2MACr"):
        for ch, m, s, e, ps, pe in outcomes[variant].transmissions:
            assert ch != m
            assert ps - 1e-12 <= s < e <= pe + 1e-9


def test_phases_split_the_window():
    o = run_sim(small(n_phases=2, cluster_size=60.0, e0=0.05))
    assert o.conservation_error() <= 1e-9
    for _, _, s, e, ps, pe in o.transmissions:
        assert e <= pe + 1e-9 and pe - ps <= 0.2 / 2 + 1e-12


def test_windows_fit_in_bunches(outcomes):
    cfg = small()
    for ch, b, layer, s, e in outcomes["E2MAC"].windows:
        t0 = np.floor(s / cfg.t_ra + 1e-9) * cfg.t_ra
        assert 0 <= b < cfg.n_bunches
        assert e - s <= cfg.z_cap * cfg.slot_per_member + 1e-12
        assert t0 + b * cfg.bunch_length - 1e-9 <= s and e <= t0 + (b + 1) * cfg.bunch_length + 1e-9


def test_single_uncontended_device_matches_closed_form():
    # one device alone on the random-access channel: preamble plus response
    # listening are its fixed per-report cost, the data goes out at the full rate
    for seed in range(3):
        cfg = SimConfig(mac_variant="CMAC", n_t=1, cluster_size=1.0, seed=seed, e0=200.0, report_interval=1000.0)
        o = run_sim(cfg)
        pw, env = cfg.power, cfg.env
        rate = fdma_rate(env, cfg.bandwidth, pw.p_t_d, env.omega_inter(float(np.hypot(*o.positions[0]))), 1)
        rar = cfg.frame - cfg.preamble_time - 1e-3
        e_s = cfg.preamble_time * (pw.p_c + pw.xi * pw.p_t_d) + rar * pw.p_l
        expected = node_lifetime(cfg.e0, TrafficProfile(t_i=cfg.report_interval, d_i=cfg.payload_bits), rate,
                                 replace(pw, e_s=e_s))
        assert o.fed == pytest.approx(expected, rel=0.05)
        assert o.conservation_error() <= 1e-9


def test_reformation_cost_is_charged():
    o = run_sim(small(mac_variant="E2MACr", e_ref=1e-4))
    assert o.conservation_error() <= 1e-9
    assert o.lump_energy["reform"].sum() > 0


def test_reselection_signalling_is_charged():
    o = run_sim(small(reselect_energy=1e-5))
    assert o.lump_energy["reselect"].sum() > 0
    assert o.conservation_error() <= 1e-9


@pytest.mark.parametrize("period", [1, 5, "tenure", "death"])
def test_reselection_modes(period):
    o = run_sim(small(ch_reselect_period=period))
    assert o.conservation_error() <= 1e-9


def test_no_reselection_variant_has_short_fed(outcomes):
    assert outcomes["E2MACn"].fed < outcomes["E2MAC"].fed
    assert small(mac_variant="E2MACn").reselect == "death"


def test_event_log():
    o = run_sim(small(event_log=True, e0=0.02))
    kinds = {e[2] for e in o.events}
    assert {"ch", "tx_start", "death"} <= kinds


def test_config_validation_names_field():
    with pytest.raises(ConfigError) as exc:
        SimConfig(mac_variant="ALOHA")
    assert exc.value.field == "mac_variant"
    for kw, name in [({"e0": 0.0}, "e0"), ({"n_phases": 0}, "n_phases"), ({"lam": 2.0}, "lam"),
                     ({"ch_reselect_period": 0}, "ch_reselect_period"), ({"z_cap": 1000}, "z_cap")]:
        with pytest.raises(ConfigError) as exc:
            SimConfig(**kw)
        assert exc.value.field == name


def test_labels_and_probability_form():
    assert SimConfig(n_phases=3, cluster_size=62.0).label == "(3,62)E2MAC"
    assert SimConfig(mac_variant="CMAC").label == "cMAC"
    assert SimConfig(cluster_size=0.01).z == pytest.approx(100.0)


def test_cdfs(outcomes):
    o = outcomes["E2MAC"]
    cdf = lifetime_cdf(o)
    t = [x for x, _ in cdf]
    f = [y for _, y in cdf]
    assert t == sorted(t) and f == sorted(f) and f[-1] == 1.0
    assert t[0] == o.fed and t[-1] == o.last_death
    d = delay_cdf(o)
    assert d[-1][1] == 1.0 and d[-1][0] == pytest.approx(o.packet_delays.max())


def test_summary_and_compare():
    cfgs = [small(mac_variant="CMAC"), small(mac_variant="E2MAC"), small(mac_variant="E2MAC", n_phases=1)]
    table, raw = compare_variants(cfgs, [1, 2])
    assert [r[0] for r in table] == ["cMAC", "(1,30)E2MAC#1", "(1,30)E2MAC#2"]
    assert all(len(r) == len(COMPARE_COLUMNS) for r in table)
    assert table[0][1] == 2
    assert table[0][2] == pytest.approx(np.mean([o.fed for o in raw["cMAC"]]))
    row = summary_row(raw["cMAC"][0], 1)
    assert len(row) == len(SUMMARY_COLUMNS) and row[:2] == ["cMAC", 1]


def test_parallel_runs_match_serial():
    cfgs = [small(mac_variant="CMAC", seed=s) for s in (1, 2)]
    serial = run_many(cfgs, jobs=1)
    parallel = run_many(cfgs, jobs=2)
    assert [o.death_times for o in serial] == [o.death_times for o in parallel]
