import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from e2mac.csma import (
    CsmaParams,
    busy_tail,
    channel_probabilities,
    csma_metrics,
    energy_efficiency,
    energy_efficiency_as_printed,
    lambert_w,
    mean_delay,
    n_phase_metrics,
    normalised_spectral_efficiency,
    optimal_load,
    per_packet_energy,
    sweep_rows,
    throughput,
    zero_dd_tradeoffs,
)
from e2mac.csma_mc import busy_tail_mc, sample_delays, simulate_channel

# energy triple and busy-period scale of the load sweeps: E_B = 2 mJ, E_S = 5 mJ, E_F = 6 mJ, T = 1 s
SWEEP = CsmaParams()

loads = st.floats(0.0, 50.0)
params = st.builds(
    CsmaParams,
    g=loads,
    tau_p=st.floats(1e-3, 1.0),
    delta_d=st.floats(0.0, 0.1),
    delta=st.floats(0.0, 0.1),
    theta_b=st.floats(1e-3, 1.0),
    theta_f=st.floats(1e-3, 1.0),
    n=st.integers(1, 8),
    e_s=st.floats(1e-4, 1e-2),
    e_f=st.floats(1e-4, 1e-2),
    e_b=st.floats(1e-4, 1e-2),
)


def test_busy_tail_limits():
    assert busy_tail(0.0, 1e-3) == 0.0
    assert busy_tail(1e-12, 1e-3) == pytest.approx(0.0, abs=1e-15)
    assert busy_tail(1e9, 1e-3) == pytest.approx(1e-3, rel=1e-6)


def test_busy_tail_monte_carlo():
    dd = 1e-3
    assert busy_tail(10 / dd, dd) == pytest.approx(busy_tail_mc(10 / dd, dd, 400_000, seed=1), rel=0.01)


def test_zero_load():
    p = SWEEP.with_load(0.0)
    assert channel_probabilities(p) == (1.0, 1.0, 1.0)
    assert per_packet_energy(p) == pytest.approx(p.energies[0])
    assert energy_efficiency(p) == pytest.approx(1000.0)
    assert throughput(p) == 0.0
    assert mean_delay(p) == pytest.approx(p.tau_p)


@given(params)
def test_probability_identities(p):
    p_i, p_s, p_is = channel_probabilities(p)
    assert p_is == pytest.approx(p_i * p_s, rel=1e-12)
    assert 0 <= p_is <= p_i <= 1
    e_s, e_f, e_b = p.energies
    assert (1 - p_i) + p_i * (1 - p_s) + p_i * p_s == pytest.approx(1.0, rel=1e-12)
    e = per_packet_energy(p)
    assert min(e_s, e_f, e_b) * (1 - 1e-12) <= e <= max(e_s, e_f, e_b) * (1 + 1e-12)


@given(params)
def test_efficiency_identity(p):
    _, _, p_is = channel_probabilities(p)
    assert energy_efficiency(p) == pytest.approx(p.d_tilde * p_is / per_packet_energy(p), rel=1e-9)


def test_per_packet_energy_substitution():
    # g T = 5 with T = 1 s split as tau_p = 1/1.005, delta_d = 0.005/1.005
    p = SWEEP.with_load(5.0)
    x = 5.0 * 0.005 / 1.005
    p_s = math.exp(-x)
    p_i = 1 / (5.0 + p_s)
    expected = (1 - p_i) * 2e-3 + p_i * (1 - p_s) * 6e-3 + p_i * p_s * 5e-3
    assert per_packet_energy(p) == pytest.approx(expected, rel=1e-12)


def test_printed_efficiency_differs_only_in_failure_weight():
    p = SWEEP.with_load(5.0)
    assert energy_efficiency_as_printed(p) != pytest.approx(energy_efficiency(p), rel=1e-6)
    q = replace(p, e_f=0.0)
    assert energy_efficiency_as_printed(q) == pytest.approx(energy_efficiency(q), rel=1e-12)


def test_derived_energy_triple():
    p = CsmaParams(e_s=None, e_f=None, e_b=None, tau_p=0.01, tau_r=0.002, theta_b=0.05, theta_f=0.07)
    e_s, e_f, e_b = p.energies
    assert e_s == pytest.approx((0.02 + 2 * 0.05) * 0.01 + 0.02 * 0.002)
    assert e_f == pytest.approx(e_s + 0.02 * 0.07)
    assert e_b == pytest.approx(0.02 * 0.05)


def test_load_degrades_efficiency_and_delay():
    g = np.linspace(0.0, 20.0, 81)
    ue = [energy_efficiency(SWEEP.with_load(x)) for x in g]
    d = [mean_delay(SWEEP.with_load(x)) for x in g]
    assert np.all(np.diff(ue) < 0)
    assert np.all(np.diff(d) > 0)


def test_lambert_w_values():
    assert lambert_w(0.0) == 0.0
    assert lambert_w(math.e) == pytest.approx(1.0, rel=1e-14)
    assert lambert_w(-math.exp(-1)) == pytest.approx(-1.0, abs=1e-7)
    with pytest.raises(ValueError):
        lambert_w(-1.0)
    assert optimal_load(0.005) == pytest.approx(13.7, abs=0.1)


@pytest.mark.parametrize("x", np.geomspace(1e-8, 1e8, 49))
def test_lambert_w_inverse(x):
    w = lambert_w(x)
    assert w * math.exp(w) == pytest.approx(x, rel=1e-12)


@given(st.floats(-math.exp(-1) + 1e-9, 1e6))
def test_lambert_w_inverse_random(x):
    w = lambert_w(x)
    assert w * math.exp(w) == pytest.approx(x, rel=1e-9, abs=1e-12)


def test_throughput_peak_location():
    a = 0.005
    tau = 1.0
    g = np.linspace(1.0, 30.0, 29_001)
    us = [throughput(CsmaParams(g=x, tau_p=tau, delta_d=a * tau)) for x in g]
    # the closed form is the small-a approximation of the true peak
    assert g[int(np.argmax(us))] * tau == pytest.approx(optimal_load(a), abs=0.05)


def test_finite_sum_vs_approximation():
    p = SWEEP.with_load(3.0)
    assert mean_delay(replace(p, k_m=10_000)) == pytest.approx(mean_delay(p, approx=True), rel=1e-3)


def test_finite_retry_budget_caps_delay():
    p = SWEEP.with_load(10.0)
    assert mean_delay(replace(p, k_m=0)) == pytest.approx(channel_probabilities(p)[2] * p.tau_p)
    assert mean_delay(replace(p, k_m=3)) < mean_delay(p)


def test_n_phase_reduces_at_one():
    for g in (0.0, 0.3, 2.0, 13.7):
        p = SWEEP.with_load(g)
        base = csma_metrics(p)
        one = n_phase_metrics(p)
        assert one == base


@pytest.mark.parametrize("g", np.linspace(0.1, 13.7, 12))
def test_n_phase_monotone(g):
    p = SWEEP.with_load(g)
    ms = [n_phase_metrics(replace(p, n=n)) for n in range(1, 9)]
    assert all(b.u_e >= a.u_e for a, b in zip(ms, ms[1:]))
    assert all(b.u_s < a.u_s for a, b in zip(ms, ms[1:]))
    assert all(b.delay >= a.delay for a, b in zip(ms, ms[1:]))


def test_n_phase_past_peak_trades_delay_for_throughput():
    # above the throughput peak, splitting the load moves each phase toward the peak
    p = SWEEP.with_load(30.0)
    one, three = n_phase_metrics(p), n_phase_metrics(replace(p, n=3))
    assert three.u_s > one.u_s and three.u_e > one.u_e


def test_zero_dd_limits():
    p = replace(SWEEP, delta_d=0.0, tau_p=1.0)
    u_e, delay = zero_dd_tradeoffs(p, np.array([0.0, 1 - 1e-12]))
    assert u_e[0] == pytest.approx(p.d_tilde / p.energies[0])
    assert u_e[1] < 1e-6 * u_e[0] and delay[1] > 1e9
    with pytest.raises(ValueError):
        zero_dd_tradeoffs(p, np.array([1.0]))


@given(st.floats(0.01, 20.0), st.integers(1, 6))
def test_zero_dd_matches_full_formulas(g, n):
    p = replace(SWEEP, delta_d=0.0, tau_p=1.0, g=g, n=n, theta_b=0.3, theta_f=0.3)
    u = normalised_spectral_efficiency(p)
    u_e, delay = zero_dd_tradeoffs(p, np.array([u]))
    full = n_phase_metrics(p, approx_delay=True)
    assert u_e[0] == pytest.approx(full.u_e, rel=1e-9)
    assert delay[0] == pytest.approx(full.delay, rel=1e-9)


def test_validation():
    with pytest.raises(ValueError):
        CsmaParams(g=-1.0)
    with pytest.raises(ValueError):
        CsmaParams(tau_p=0.0, delta_d=0.0)
    with pytest.raises(ValueError):
        CsmaParams(n=0)


def test_sweep_rows_shape():
    rows = sweep_rows(SWEEP, [0.0, 1.0, 2.0], [1, 3])
    assert len(rows) == 6 and all(len(r) == 8 for r in rows)
    assert sweep_rows(SWEEP, [], [1]) == []


@pytest.mark.parametrize("g_tau", [0.1, 1.0, 13.7])
def test_monte_carlo_channel(g_tau):
    tau = 1.0
    dd = 0.005 * tau
    p = CsmaParams(g=g_tau / tau, tau_p=tau, delta_d=dd)
    ch = simulate_channel(p.g, tau, dd, n_arrivals=200_000, seed=3)
    _, _, p_is = channel_probabilities(p)
    assert ch.p_success == pytest.approx(p_is, rel=0.02)
    assert ch.airtime == pytest.approx(throughput(p, r_in=1.0), rel=0.02)


def test_monte_carlo_delay():
    p = CsmaParams(g=1.0, tau_p=1.0, delta_d=0.005, theta_b=0.4, theta_f=0.6)
    ch = simulate_channel(p.g, p.tau_p, p.delta_d, n_arrivals=200_000, seed=5)
    delays, dropped = sample_delays(ch, p.theta_b, p.theta_f, p.k_m, 200_000, seed=6)
    assert dropped == 0
    assert delays.mean() == pytest.approx(mean_delay(p), rel=0.02)


def test_monte_carlo_requires_load():
    with pytest.raises(ValueError):
        simulate_channel(0.0, 1.0, 0.01)
