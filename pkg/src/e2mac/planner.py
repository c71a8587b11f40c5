"""Cluster-size optimisation, the cell scenario used for it, and the reformation rule."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace

from .csma import CsmaParams, channel_probabilities
from .geometry import annulus_area, mean_member_distance
from .lifetime import ClusterModel, PowerProfile, TrafficProfile, cluster_lifetime
from .radio import RadioEnvironment, csma_effective_rate, fdma_rate

log = logging.getLogger(__name__)


def _safe(fn: Callable[[int], float], z: int, cache: dict[int, float]) -> float:
    if z not in cache:
        try:
            cache[z] = float(fn(z))
        except ValueError as exc:
            log.warning("cluster size %d excluded: %s", z, exc)
            cache[z] = -math.inf
    return cache[z]


def optimal_cluster_size(
    lifetime_fn: Callable[[int], float], lo: int, hi: int, neighborhood: int = 2
) -> tuple[int, float]:
    """Integer maximiser of a unimodal lifetime curve on ``[lo, hi]``.

    Ternary search followed by a scan of ``neighborhood`` sizes either side of
    the survivor.  Sizes whose evaluation raises ``ValueError`` count as
    infeasible and are skipped with a warning.
    """
    if not 1 <= lo <= hi:
        raise ValueError(f"bad search bounds [{lo}, {hi}]")
    cache: dict[int, float] = {}
    a, b = lo, hi
    while b - a > 2:
        m1 = a + (b - a) // 3
        m2 = b - (b - a) // 3
        if _safe(lifetime_fn, m1, cache) < _safe(lifetime_fn, m2, cache):
            a = m1 + 1
        else:
            b = m2
    cands = range(max(lo, a - neighborhood), min(hi, b + neighborhood) + 1)
    best = max(cands, key=lambda z: (_safe(lifetime_fn, z, cache), -z))
    value = cache[best]
    if value == -math.inf:
        raise ValueError("no feasible cluster size in the search range")
    return best, value


def fdma_lifetime_fn(
    cluster: ClusterModel, power: PowerProfile, traffic: TrafficProfile, env: RadioEnvironment, d_h: float
) -> Callable[[int], float]:
    """Cluster lifetime as a function of ``z`` with FDMA on both hops."""

    def f(z: int) -> float:
        return cluster_lifetime(replace(cluster, z=z), power, traffic, env, d_h)

    return f


@dataclass(frozen=True)
class CellScenario:
    """Single-cell deployment with CSMA/CA inside clusters and a reserved CH uplink.

    Per reporting cycle ``t_ra`` each cluster gets an intra-cluster window of
    ``min(z, z_cap)`` milliseconds and its CH relays over the whole band ``w``.
    """

    r_inner: float = 50.0
    r_outer: float = 500.0
    n_t: int = 5000
    t_ra: float = 1000.0
    w: float = 180e3
    payload_bits: float = 5 * 8192.0
    report_interval: float = 7 * 3600.0
    lam: float = 1.0
    e0: float = 2.0
    n_phases: int = 1
    delta_d: float = 1e-3
    slot_per_member: float = 1e-3
    z_cap: int = 200
    backoff_divisor: float = 5.0
    e_s_h_fixed: float = 1.5e-3
    power: PowerProfile = field(default_factory=lambda: PowerProfile(p_l=0.02, p_c=0.02, xi=2.0))
    env: RadioEnvironment = field(default_factory=lambda: RadioEnvironment(w_m=180e3, w_h=180e3))

    @property
    def sigma(self) -> float:
        return self.n_t / annulus_area(self.r_inner, self.r_outer)

    @property
    def r_g(self) -> float:
        return 1.0 / self.report_interval

    def t_intra(self, z: float) -> float:
        return min(z, self.z_cap) * self.slot_per_member

    def theta_b(self, z: float) -> float:
        return self.t_intra(z) / (self.backoff_divisor * self.n_phases)

    def packets_per_cycle(self) -> float:
        return self.r_g * self.t_ra

    def link_rate(self, z: float) -> float:
        """Unshared intra-cluster link rate at the mean member distance."""
        d_m = mean_member_distance(z, self.sigma)
        return fdma_rate(self.env, self.w, self.power.p_t_m, self.env.omega_intra(d_m), 1)

    def csma(self, z: float) -> CsmaParams:
        """Contention parameters of one cluster (aggregate load over all phases)."""
        tau_p = self.payload_bits / self.link_rate(z)
        g = (z - 1) * self.packets_per_cycle() / self.t_intra(z)
        th = self.theta_b(z)
        return CsmaParams(g=g, tau_p=tau_p, delta_d=self.delta_d, theta_b=th, theta_f=th, n=self.n_phases,
                          d_tilde=self.payload_bits, r_in=self.link_rate(z))

    def success_probability(self, z: float) -> float:
        """Per-attempt success probability inside the member's own phase."""
        p = self.csma(z)
        return channel_probabilities(p.with_load(p.g / p.n))[2]

    def cluster_model(self, z: float) -> ClusterModel:
        return ClusterModel(z=z, lam=self.lam, t_c=self.t_ra, e0=self.e0, sigma=self.sigma, n_t=self.n_t)

    def power_at(self, z: float) -> PowerProfile:
        pw = self.power
        e_s = self.packets_per_cycle() * pw.p_c * self.theta_b(z)
        e_s_h = pw.p_c * self.t_intra(z) + self.e_s_h_fixed
        return replace(pw, e_s=e_s, e_s_h=e_s_h)

    def traffic(self) -> TrafficProfile:
        return TrafficProfile(t_i=self.report_interval, d_i=self.payload_bits, r_g=self.r_g)

    def lifetime(self, z: int, d_h: float | None = None) -> float:
        d_h = self.r_outer if d_h is None else d_h
        p_is = self.success_probability(z)
        w = self.w

        def rate_m(env, _w, p_tx, omega, _u):
            return csma_effective_rate(env, w, p_tx, omega, p_is, self.r_g, self.t_ra)

        def rate_h(env, _w, p_tx, omega, _u):
            return fdma_rate(env, w, p_tx, omega, 1)

        return cluster_lifetime(
            self.cluster_model(z), self.power_at(z), self.traffic(), self.env, d_h, rate_m, rate_h
        )

    def lifetime_fn(self, d_h: float | None = None) -> Callable[[int], float]:
        return lambda z: self.lifetime(z, d_h)


def reformation_decision(
    e_ref: float,
    t_dur: float,
    t_c: float,
    r: float,
    cluster: ClusterModel,
    power: PowerProfile,
    traffic: TrafficProfile,
    env: RadioEnvironment,
) -> tuple[bool, float]:
    """Whether re-forming clusters around an off-centre CH pays for itself.

    Returns the verdict and the net saving per device over the tenure
    ``t_dur`` (saved member energy minus ``e_ref``).
    """
    if e_ref < 0 or t_dur < 0 or not t_c > 0 or r < 0:
        raise ValueError("need e_ref, t_dur, r >= 0 and t_c > 0")
    x = math.sqrt(cluster.sigma / cluster.z)
    d_cent = 0.5 / x
    d_r = 0.5 / x + 2 * r**2 * x / 3 - 0.25 * r**4 * x**3
    if not d_r > 0:
        raise ValueError(f"offset r={r!r} is outside the approximation's range")

    def member_energy(d: float) -> float:
        rate = fdma_rate(env, env.w_m, power.p_t_m, env.omega_intra(d), cluster.z)
        return power.e_s + traffic.d_i * (power.p_c + power.xi * power.p_t_m) / rate

    gain = (t_dur / t_c) * (member_energy(d_r) - member_energy(d_cent))
    savings = gain - e_ref
    return savings > 0, savings
