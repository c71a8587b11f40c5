"""Device and cluster lifetime models and the first-energy-drain reducer."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

from .radio import RATE_FUNCTIONS, RadioEnvironment

RateFn = Callable[[RadioEnvironment, float, float, float, float], float]


class InfeasibleDutyCycle(ValueError):
    """Transmission plus active time does not fit in the reporting interval."""


@dataclass(frozen=True)
class PowerProfile:
    p_c: float = 0.02
    p_s: float = 0.0
    p_l: float = 0.02
    p_t_m: float = 0.05
    p_t_h: float = 0.2
    p_t_d: float = 0.2
    xi: float = 2.0
    e_s: float = 0.0
    e_s_h: float = 1.5e-3
    e_s_d: float = 0.0
    t_a: float = 0.0

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.xi < 1:
            raise ValueError("xi (inverse amplifier efficiency) must be >= 1")


@dataclass(frozen=True)
class TrafficProfile:
    t_i: float = 7 * 3600.0
    d_i: float = 5 * 8192.0
    r_g: float = 1.0 / (7 * 3600.0)

    def __post_init__(self) -> None:
        if not (self.t_i > 0 and self.d_i > 0):
            raise ValueError("t_i and d_i must be positive")


@dataclass(frozen=True)
class ClusterModel:
    z: float = 100.0
    lam: float = 1.0
    t_c: float = 1000.0
    e0: float = 2.0
    sigma: float = 5000 / (math.pi * (500.0**2 - 50.0**2))
    n_t: int = 5000

    def __post_init__(self) -> None:
        if not 1 <= self.z <= self.n_t:
            raise ValueError(f"cluster size z={self.z} must lie in [1, n_t={self.n_t}]")
        if not 0 < self.lam <= 1:
            raise ValueError("compression coefficient must lie in (0, 1]")
        if not self.sigma > 0:
            raise ValueError("device density must be positive")


def node_lifetime(
    e_remaining: float,
    traffic: TrafficProfile,
    rate: float,
    power: PowerProfile,
    p_tx: float | None = None,
    e_static: float | None = None,
) -> float:
    """Expected lifetime of a device reporting every ``t_i`` seconds.

    ``p_tx`` defaults to the direct-mode transmit power and ``e_static`` to
    ``power.e_s``.
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    p_tx = power.p_t_d if p_tx is None else p_tx
    e_static = power.e_s if e_static is None else e_static
    t_tx = traffic.d_i / rate
    if t_tx + power.t_a > traffic.t_i:
        raise InfeasibleDutyCycle(
            f"transmission ({t_tx:.4g} s) plus active time exceeds the interval {traffic.t_i:.4g} s"
        )
    denom = e_static + power.p_s * (traffic.t_i - t_tx - power.t_a) + t_tx * (power.p_c + power.xi * p_tx)
    if not denom > 0:
        raise ValueError("per-cycle energy must be positive")
    return e_remaining * traffic.t_i / denom


def energy_efficiency(traffic: TrafficProfile, rate: float, power: PowerProfile, p_tx: float | None = None) -> float:
    """Bits per joule ``R / (P~_t(R) + P~_c)``; lifetime is ``E T_i / D_i`` times this."""
    p_tx = power.p_t_d if p_tx is None else p_tx
    p_t_eff = power.xi * p_tx + rate / traffic.d_i * (power.e_s + power.p_s * (traffic.t_i - power.t_a))
    return rate / (p_t_eff + power.p_c - power.p_s)


def cm_cycle_energy(cluster: ClusterModel, power: PowerProfile, traffic: TrafficProfile, r_m: float) -> float:
    if not r_m > 0:
        raise ValueError("intra-cluster rate must be positive")
    return power.e_s + traffic.d_i * (power.p_c + power.xi * power.p_t_m) / r_m


def ch_cycle_energy(
    cluster: ClusterModel, power: PowerProfile, traffic: TrafficProfile, r_m: float, r_h: float
) -> float:
    if not (r_m > 0 and r_h > 0):
        raise ValueError("rates must be positive")
    z = cluster.z
    d = traffic.d_i
    return (
        power.e_s_h
        + (z - 1) * d * power.p_l / r_m
        + (1 + cluster.lam * (z - 1)) * d * (power.p_c + power.xi * power.p_t_h) / r_h
    )


def _rate_fn(choice: str | RateFn) -> RateFn:
    if callable(choice):
        return choice
    return RATE_FUNCTIONS[choice]


def cluster_rates(
    cluster: ClusterModel,
    power: PowerProfile,
    env: RadioEnvironment,
    d_h: float,
    rate_m: str | RateFn = "fdma",
    rate_h: str | RateFn = "fdma",
) -> tuple[float, float]:
    """Intra- and inter-cluster rates at mean member distance and CH distance ``d_h``."""
    d_m = math.sqrt(cluster.z / (4 * cluster.sigma))
    r_m = _rate_fn(rate_m)(env, env.w_m, power.p_t_m, env.omega_intra(d_m), cluster.z)
    r_h = _rate_fn(rate_h)(env, env.w_h, power.p_t_h, env.omega_inter(d_h), cluster.n_t / cluster.z)
    return r_m, r_h


def cluster_energy_per_cycle(
    cluster: ClusterModel,
    power: PowerProfile,
    traffic: TrafficProfile,
    env: RadioEnvironment,
    d_h: float,
    rate_m: str | RateFn = "fdma",
    rate_h: str | RateFn = "fdma",
) -> float:
    """Expected per-node energy per cluster cycle, CH with probability 1/z."""
    r_m, r_h = cluster_rates(cluster, power, env, d_h, rate_m, rate_h)
    e_m = cm_cycle_energy(cluster, power, traffic, r_m)
    e_h = ch_cycle_energy(cluster, power, traffic, r_m, r_h)
    return e_h / cluster.z + (1 - 1 / cluster.z) * e_m


def cluster_lifetime(
    cluster: ClusterModel,
    power: PowerProfile,
    traffic: TrafficProfile,
    env: RadioEnvironment,
    d_h: float,
    rate_m: str | RateFn = "fdma",
    rate_h: str | RateFn = "fdma",
) -> float:
    if not d_h > 0:
        raise ValueError("distance to the BS must be positive")
    denom = cluster_energy_per_cycle(cluster, power, traffic, env, d_h, rate_m, rate_h)
    return cluster.e0 * cluster.t_c / denom


def fdma_denominator(
    z: float,
    cluster: ClusterModel,
    power: PowerProfile,
    traffic: TrafficProfile,
    env: RadioEnvironment,
    d_h: float,
) -> float:
    """Closed-form per-cycle energy for FDMA on both hops with no compression.

    Written directly in terms of the two SNR constants ``A1`` and ``A2`` so it
    can be checked against :func:`cluster_energy_per_cycle`.
    """
    gm = env.pl_intra.exponent
    a1 = power.p_t_m * (4 * cluster.sigma) ** (gm / 2) / (env.gamma_gap * env.n0 * env.w_m * env.pl_intra.beta)
    a2 = (
        power.p_t_h
        * cluster.n_t
        / (env.gamma_gap * env.n0 * env.w_h * env.pl_inter.beta * d_h**env.pl_inter.exponent)
    )
    d = traffic.d_i
    return (
        power.e_s
        + (power.e_s_h - power.e_s) / z
        + d * (z - 1) * (power.p_c + power.xi * power.p_t_m + power.p_l) / (env.w_m * env.log1p(a1 * z ** (1 - gm / 2)))
        + cluster.n_t * d * (power.p_c + power.xi * power.p_t_h) / (z * env.w_h * env.log1p(a2 / z))
    )


def fed_lifetime(lifetimes: Iterable[float]) -> float:
    """First-energy-drain network lifetime: the earliest individual lifetime."""
    values = list(lifetimes)
    if not values:
        raise ValueError("no lifetimes given")
    return min(values)
