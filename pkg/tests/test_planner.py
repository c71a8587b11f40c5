import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from e2mac.lifetime import ClusterModel, PowerProfile, TrafficProfile
from e2mac.planner import CellScenario, fdma_lifetime_fn, optimal_cluster_size, reformation_decision
from e2mac.radio import RadioEnvironment


@given(st.floats(1.0, 500.0), st.floats(0.01, 10.0), st.integers(1, 50), st.integers(0, 600))
def test_search_matches_exhaustive_scan(peak, width, lo, span):
    hi = lo + span

    def f(z):
        return -width * (z - peak) ** 2

    z, best = optimal_cluster_size(f, lo, hi)
    brute = max(range(lo, hi + 1), key=lambda k: (f(k), -k))
    assert z == brute and best == f(brute)


def test_fdma_curve_search_matches_scan():
    fn = fdma_lifetime_fn(ClusterModel(), PowerProfile(), TrafficProfile(), RadioEnvironment(), 500.0)
    z, best = optimal_cluster_size(fn, 1, 2000)
    values = [fn(k) for k in range(1, 2001)]
    assert z == int(np.argmax(values)) + 1
    assert best == pytest.approx(max(values))


def test_infeasible_sizes_are_skipped(caplog):
    def f(z):
        if z < 20:
            raise ValueError("no rate")
        return -abs(z - 30)

    assert optimal_cluster_size(f, 1, 100) == (30, 0)
    assert "excluded" in caplog.text
    with pytest.raises(ValueError):
        optimal_cluster_size(lambda z: (_ for _ in ()).throw(ValueError("x")), 1, 10)
    with pytest.raises(ValueError):
        optimal_cluster_size(lambda z: 0.0, 5, 2)


def test_cell_scenario_optimum():
    sc = CellScenario()
    fn = sc.lifetime_fn()
    z, best = optimal_cluster_size(fn, 2, 1000)
    assert 50 <= z <= 200
    for k in (10, 50, 100, 500, 1000):
        assert best >= fn(k)


def test_cell_scenario_pieces():
    sc = CellScenario()
    assert sc.t_intra(50) == pytest.approx(0.05)
    assert sc.t_intra(500) == pytest.approx(0.2)
    assert sc.theta_b(100) == pytest.approx(0.1 / 5)
    pw = sc.power_at(100)
    assert pw.e_s == pytest.approx(1000 / (7 * 3600) * 0.02 * 0.02)
    assert pw.e_s_h == pytest.approx(0.02 * 0.1 + 1.5e-3)
    p = sc.csma(100)
    assert p.g == pytest.approx(99 * 1000 / (7 * 3600) / 0.1)
    assert 0 < sc.success_probability(100) <= 1
    # more phases see fewer contenders per phase
    assert replace(sc, n_phases=3).success_probability(100) > sc.success_probability(100)


def test_lifetime_falls_with_bs_distance():
    sc = CellScenario()
    assert sc.lifetime(100, 100.0) > sc.lifetime(100, 500.0)


def _decision(e_ref, r, t_dur=1e5):
    return reformation_decision(e_ref, t_dur, 1000.0, r, ClusterModel(), PowerProfile(), TrafficProfile(), RadioEnvironment())


def test_reformation_centre_never_pays():
    ok, savings = _decision(1e-6, 0.0)
    assert not ok and savings == pytest.approx(-1e-6)


def test_reformation_free_offset_pays():
    ok, savings = _decision(0.0, 30.0)
    assert ok and savings > 0


def test_reformation_savings_decrease_with_cost():
    costs = np.linspace(0.0, 1e-2, 41)
    s = [_decision(c, 30.0)[1] for c in costs]
    assert np.all(np.diff(s) < 0)
    verdicts = [_decision(c, 30.0)[0] for c in costs]
    # a single crossing from beneficial to not beneficial
    assert verdicts == sorted(verdicts, reverse=True)


def test_reformation_validation():
    with pytest.raises(ValueError):
        _decision(-1.0, 10.0)
    with pytest.raises(ValueError):
        _decision(0.0, 1e4)
