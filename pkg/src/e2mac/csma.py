"""Closed-form non-persistent and n-phase CSMA/CA metrics.

``g`` is the aggregate attempt rate (new packets plus retransmissions), and
``T = tau_p + delta_d + delta`` the busy-period scale.  Every metric is
continuously extended at ``g = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special


@dataclass(frozen=True)
class CsmaParams:
    g: float = 0.0
    tau_p: float = 1.0 / 1.005
    delta_d: float = 0.005 / 1.005
    delta: float = 0.0
    theta_b: float = 1.0
    theta_f: float = 1.0
    tau_r: float = 0.0
    k_m: int = 10_000
    n: int = 1
    d_tilde: float = 5.0
    # Energy triple; ``None`` means derive from the powers below.
    e_s: float | None = 5e-3
    e_f: float | None = 6e-3
    e_b: float | None = 2e-3
    p_l: float = 0.02
    p_c: float = 0.02
    p_t_m: float = 0.05
    xi: float = 2.0
    r_in: float = 1.0

    def __post_init__(self) -> None:
        if self.g < 0:
            raise ValueError("arrival rate must be nonnegative")
        if not self.big_t > 0:
            raise ValueError("tau_p + delta_d + delta must be positive")
        if self.n < 1 or self.k_m < 0:
            raise ValueError("need n >= 1 and k_m >= 0")

    @property
    def big_t(self) -> float:
        return self.tau_p + self.delta_d + self.delta

    @property
    def energies(self) -> tuple[float, float, float]:
        """``(E_S, E_F, E_B)``: success, failure and busy-sensed energy per attempt."""
        e_s = self.e_s
        if e_s is None:
            e_s = (self.p_c + self.xi * self.p_t_m) * self.tau_p + self.p_l * self.tau_r
        e_f = self.e_f if self.e_f is not None else e_s + self.p_l * self.theta_f
        e_b = self.e_b if self.e_b is not None else self.p_l * self.theta_b
        return e_s, e_f, e_b

    def with_load(self, g: float) -> "CsmaParams":
        return replace(self, g=g)


@dataclass(frozen=True)
class CsmaMetrics:
    y_hat: float
    p_i: float
    p_s: float
    p_is: float
    e_cons: float
    u_e: float
    u_s: float
    delay: float


def busy_tail(g: float, delta_d: float) -> float:
    """Mean start time of the last packet that joins a busy period in its vulnerable window."""
    x = g * delta_d
    if x < 1e-8:
        # series: delta_d * (x/2 - x^2/6 + ...)
        return delta_d * (x / 2 - x * x / 6)
    return delta_d + math.expm1(-x) / g


def channel_probabilities(p: CsmaParams) -> tuple[float, float, float]:
    """Idle-on-arrival, no-collision and success probabilities."""
    g = p.g
    p_s = math.exp(-g * p.delta_d)
    p_i = 1.0 / (g * p.big_t + p_s)
    p_is = 1.0 / (g * p.big_t * math.exp(g * p.delta_d) + 1.0)
    return p_i, p_s, p_is


def per_packet_energy(p: CsmaParams) -> float:
    p_i, p_s, _ = channel_probabilities(p)
    e_s, e_f, e_b = p.energies
    return (1 - p_i) * e_b + p_i * (1 - p_s) * e_f + p_i * p_s * e_s


def energy_efficiency(p: CsmaParams) -> float:
    """Delivered bits per joule, ``d_tilde * p_is / E_cons`` in closed form."""
    e_s, e_f, e_b = p.energies
    gt = p.g * p.big_t
    ex = math.exp(p.g * p.delta_d)
    denom = e_s + math.expm1(p.g * p.delta_d) * e_f + (1 + (gt - 1) * ex) * e_b
    return p.d_tilde / denom


def energy_efficiency_as_printed(p: CsmaParams) -> float:
    """Variant whose failure weight is ``gT e^{2 g dd} / (gT e^{g dd} + 1)``.

    This weight does not follow from :func:`per_packet_energy`; it is kept only
    to compare against published curves.
    """
    e_s, e_f, e_b = p.energies
    gt = p.g * p.big_t
    ex = math.exp(p.g * p.delta_d)
    denom = e_s + gt * ex * ex / (gt * ex + 1) * e_f + (1 + (gt - 1) * ex) * e_b
    return p.d_tilde / denom


def throughput(p: CsmaParams, r_in: float | None = None) -> float:
    """Successful airtime fraction times the link rate ``r_in``."""
    r_in = p.r_in if r_in is None else r_in
    return p.g * p.tau_p / (1 + p.g * p.big_t * math.exp(p.g * p.delta_d)) * r_in


def delay_from_probabilities(
    p_i: float,
    p_s: float,
    p_is: float,
    tau_p: float,
    theta_b: float,
    theta_f: float,
    k_m: int,
    approx: bool = False,
) -> float:
    if p_is <= 0:
        raise ZeroDivisionError("success probability is zero; the delay diverges")
    if p_is >= 1:
        return tau_p
    retry = (1 - p_i) / (1 - p_is) * theta_b + p_i * (1 - p_s) / (1 - p_is) * (theta_f + tau_p)
    if approx:
        return tau_p + (1 / p_is - 1) * retry
    q = 1 - p_is
    # closed sums of q^k and k q^k for k = 0..k_m
    m = k_m + 1
    qm = q**m
    s0 = (1 - qm) / p_is
    s1 = (q - m * qm + k_m * qm * q) / (p_is * p_is)
    return p_is * (tau_p * s0 + retry * s1)


def mean_delay(p: CsmaParams, approx: bool = False) -> float:
    """Mean arrival-to-success delay with at most ``k_m`` retries."""
    p_i, p_s, p_is = channel_probabilities(p)
    return delay_from_probabilities(p_i, p_s, p_is, p.tau_p, p.theta_b, p.theta_f, p.k_m, approx)


def csma_metrics(p: CsmaParams) -> CsmaMetrics:
    p_i, p_s, p_is = channel_probabilities(p)
    return CsmaMetrics(
        y_hat=busy_tail(p.g, p.delta_d),
        p_i=p_i,
        p_s=p_s,
        p_is=p_is,
        e_cons=per_packet_energy(p),
        u_e=energy_efficiency(p),
        u_s=throughput(p),
        delay=mean_delay(p),
    )


def n_phase_probabilities(p: CsmaParams) -> tuple[float, float, float]:
    """Per-attempt probabilities seen by a member that contends in 1 of ``n`` phases."""
    if p.n == 1:
        return channel_probabilities(p)
    g_n = p.g / p.n
    p_s = math.exp(-g_n * p.delta_d)
    p_i = (1.0 / p.n) / (g_n * p.big_t + p_s)
    return p_i, p_s, p_i * p_s


def n_phase_metrics(p: CsmaParams, approx_delay: bool = False) -> CsmaMetrics:
    """Metrics when each contention interval is split into ``p.n`` phases."""
    per_phase = p.with_load(p.g / p.n)
    p_i, p_s, p_is = n_phase_probabilities(p)
    return CsmaMetrics(
        y_hat=busy_tail(per_phase.g, p.delta_d),
        p_i=p_i,
        p_s=p_s,
        p_is=p_is,
        e_cons=per_packet_energy(per_phase),
        u_e=energy_efficiency(per_phase),
        u_s=throughput(per_phase),
        delay=delay_from_probabilities(p_i, p_s, p_is, p.tau_p, p.theta_b, p.theta_f, p.k_m, approx_delay),
    )


def zero_dd_tradeoffs(p: CsmaParams, u_s_n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Energy efficiency and delay as functions of normalised spectral efficiency.

    Valid in the limit of negligible detection delay, where collisions vanish
    and only busy-channel backoffs cost energy.  ``u_s_n`` must lie in
    ``[0, 1)``.
    """
    u = np.asarray(u_s_n, dtype=float)
    if np.any(u >= 1) or np.any(u < 0):
        raise ValueError("normalised spectral efficiency must lie in [0, 1)")
    e_s, _, e_b = p.energies
    ratio = u / (1 - u)
    u_e = p.d_tilde / (e_s + ratio * e_b)
    delay = p.tau_p + (p.n - 1) * p.theta_b + p.n * p.theta_b * ratio
    return u_e, delay


def normalised_spectral_efficiency(p: CsmaParams) -> float:
    """Per-phase successful airtime fraction, i.e. ``U_S(g/n) / R_in``."""
    return throughput(p.with_load(p.g / p.n), r_in=1.0)


_INV_E = math.exp(-1.0)


def lambert_w(x: float) -> float:
    """Principal branch W0 of the Lambert W function (``w * exp(w) = x``), real-valued."""
    if math.isnan(x):
        return math.nan
    if x <= -_INV_E + 1e-15:
        if x >= -_INV_E - 1e-15:
            return -1.0
        raise ValueError(f"W0 is real only for x >= -1/e, got {x!r}")
    return float(special.lambertw(x, 0).real)


def optimal_load(a: float) -> float:
    """Normalised load ``g tau_p`` maximising throughput for ``a = delta_d / tau_p << 1``."""
    if not a > 0:
        raise ValueError("detection-delay ratio must be positive")
    return 2.0 / a * lambert_w(math.sqrt(a) / 2.0)


SWEEP_COLUMNS = ["g", "n", "p_i", "p_s", "p_is", "u_e_bits_per_j", "u_s_bits_per_s", "delay_s"]


def sweep_rows(p: CsmaParams, loads, phases) -> list[list[float]]:
    """One row per (g, n) pair in the CSV column order of :data:`SWEEP_COLUMNS`."""
    rows = []
    for n in phases:
        for g in loads:
            m = n_phase_metrics(replace(p, g=float(g), n=int(n)))
            rows.append([float(g), int(n), m.p_i, m.p_s, m.p_is, m.u_e, m.u_s, m.delay])
    return rows
