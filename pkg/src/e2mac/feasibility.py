"""When does clustering a region outlive direct access?

A region of ``n`` devices at distance ``big_r`` from the BS either sends
directly (sharing ``w_t = w_m + w_h`` in FDMA) or elects one CH that collects
the other members over ``w_m`` and relays over ``w_h``.  Transmit powers are
set so each link just meets its SNR target, and the CH listens at ``P_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .geometry import mean_pairwise_distance_disc
from .lifetime import PowerProfile, TrafficProfile
from .radio import RadioEnvironment, fdma_rate, snr_targeted_power


@dataclass(frozen=True)
class FeasibilityInputs:
    n: int
    r: float
    big_r: float
    s_h: float
    s_b: float
    lam: float = 1.0
    w_m: float = 360e3
    w_h: float = 144e3
    power: PowerProfile = field(default_factory=PowerProfile)
    traffic: TrafficProfile = field(default_factory=TrafficProfile)
    e0: float = 2.0
    t_c: float = 1.0
    env: RadioEnvironment = field(default_factory=RadioEnvironment)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("region population must be positive")
        if not (self.s_h > 0 and self.s_b > 0):
            raise ValueError("SNR targets must be positive")
        if not (self.r > 0 and self.big_r > 0 and self.w_m > 0 and self.w_h > 0):
            raise ValueError("distances and bandwidths must be positive")
        if not 0 < self.lam <= 1:
            raise ValueError("compression coefficient must lie in (0, 1]")

    @property
    def m(self) -> float:
        """Relayed volume in payload units."""
        return 1 + self.lam * (self.n - 1)

    @property
    def w_t(self) -> float:
        return self.w_m + self.w_h

    @property
    def r_bar(self) -> float:
        """Mean member-to-CH distance in the region."""
        return mean_pairwise_distance_disc(self.r)

    def s_bar(self, s: float) -> float:
        return s / self.env.log1p(s)

    @property
    def q(self) -> float:
        """Circuit-time coefficient: seconds of circuit activity per bit, clustered minus direct."""
        n = self.n
        return (
            self.m / (self.w_h * self.env.log1p(self.s_b))
            + 2 * (n - 1) ** 2 / (self.w_m * self.env.log1p(self.s_h))
            - n * n / (self.w_t * self.env.log1p(self.s_b))
        )

    @property
    def static_margin(self) -> float:
        """``n E_s^d - E_s^h - (n-1) E_s``: static energy direct access spends beyond clustering."""
        pw = self.power
        return self.n * pw.e_s_d - pw.e_s_h - (self.n - 1) * pw.e_s

    def with_static_margin(self, margin: float) -> "FeasibilityInputs":
        """Same inputs with the direct-mode static energy chosen to give ``margin``."""
        pw = self.power
        e_s_d = (margin + pw.e_s_h + (self.n - 1) * pw.e_s) / self.n
        return replace(self, power=replace(pw, e_s_d=e_s_d))

    def with_payload(self, bits: float) -> "FeasibilityInputs":
        return replace(self, traffic=replace(self.traffic, d_i=bits))


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    l_c: float
    l_d: float
    threshold_omega: float | None
    omega_h: float


def link_powers(inp: FeasibilityInputs) -> tuple[float, float, float]:
    """Transmit powers ``(P_t^h, P_t^m, P_t^d)`` meeting the SNR targets."""
    env = inp.env
    om_h = env.omega_inter(inp.big_r)
    om_m = env.omega_intra(inp.r_bar)
    p_h = snr_targeted_power(env, inp.s_b, om_h, inp.w_h)
    p_m = snr_targeted_power(env, inp.s_h, om_m, inp.w_m / max(inp.n - 1, 1))
    p_d = snr_targeted_power(env, inp.s_b, om_h, inp.w_t / inp.n)
    return p_h, p_m, p_d


def region_energies(inp: FeasibilityInputs) -> tuple[float, float, float]:
    """Per-cycle energies of the CH, a member, and a direct-access device."""
    if inp.n < 2:
        raise ValueError("clustering needs at least two devices")
    env, pw, d = inp.env, inp.power, inp.traffic.d_i
    p_h, p_m, p_d = link_powers(inp)
    om_h = env.omega_inter(inp.big_r)
    om_m = env.omega_intra(inp.r_bar)
    r_h = fdma_rate(env, inp.w_h, p_h, om_h, 1)
    r_m = fdma_rate(env, inp.w_m, p_m, om_m, inp.n - 1)
    r_d = fdma_rate(env, inp.w_t, p_d, om_h, inp.n)
    e_h = pw.e_s_h + (inp.n - 1) * d * pw.p_c / r_m + inp.m * d * (pw.p_c + pw.xi * p_h) / r_h
    e_m = pw.e_s + d * (pw.p_c + pw.xi * p_m) / r_m
    e_d = pw.e_s_d + d * (pw.p_c + pw.xi * p_d) / r_d
    return e_h, e_m, e_d


def region_lifetimes(inp: FeasibilityInputs) -> tuple[float, float]:
    """``(L_c, L_d)``: clustered lifetime with CH rotation, and direct-access lifetime."""
    e_h, e_m, e_d = region_energies(inp)
    l_c = inp.e0 * inp.t_c / (e_h / inp.n + (1 - 1 / inp.n) * e_m)
    l_d = inp.e0 * inp.t_c / e_d
    return l_c, l_d


def feasibility_margin(inp: FeasibilityInputs) -> float:
    """Left minus right side of the clustering condition; positive means clustering wins."""
    env, d = inp.env, inp.traffic.d_i
    om_h = env.omega_inter(inp.big_r)
    om_m = env.omega_intra(inp.r_bar)
    k = env.gamma_gap * env.n0 * d * inp.power.xi
    return (
        (inp.static_margin - inp.power.p_c * inp.q * d) / k
        + inp.s_bar(inp.s_b) * om_h * (inp.n - inp.m)
        - inp.s_bar(inp.s_h) * (inp.n - 1) * om_m
    )


def omega_threshold(inp: FeasibilityInputs) -> float:
    """Inter-cluster path loss above which clustering wins (only for ``lam < 1``)."""
    nm = inp.n - inp.m
    if nm <= 0:
        raise ValueError("threshold undefined without compression")
    env, d = inp.env, inp.traffic.d_i
    sb, sh = inp.s_bar(inp.s_b), inp.s_bar(inp.s_h)
    om_m = env.omega_intra(inp.r_bar)
    return sh * (inp.n - 1) * om_m / (sb * nm) + (inp.power.p_c * inp.q * d - inp.static_margin) / (
        sb * env.gamma_gap * env.n0 * d * inp.power.xi * nm
    )


def clustering_feasibility(inp: FeasibilityInputs) -> FeasibilityResult:
    om_h = inp.env.omega_inter(inp.big_r)
    if inp.n < 2:
        l_d = inp.e0 * inp.t_c / _direct_energy(inp)
        return FeasibilityResult(False, math.nan, l_d, None, om_h)
    l_c, l_d = region_lifetimes(inp)
    feasible = l_c > l_d
    threshold = None
    if inp.m != inp.n:
        threshold = omega_threshold(inp)
        closed = om_h > threshold
        if closed != feasible and not math.isclose(om_h, threshold, rel_tol=1e-9):
            raise AssertionError(
                f"threshold test ({closed}) disagrees with the lifetime comparison ({feasible})"
            )
    return FeasibilityResult(feasible, l_c, l_d, threshold, om_h)


def _direct_energy(inp: FeasibilityInputs) -> float:
    env, pw, d = inp.env, inp.power, inp.traffic.d_i
    _, _, p_d = link_powers(inp)
    r_d = fdma_rate(env, inp.w_t, p_d, env.omega_inter(inp.big_r), inp.n)
    return pw.e_s_d + d * (pw.p_c + pw.xi * p_d) / r_d


def crossover_payload(inp: FeasibilityInputs, lo: float = 1.0, hi: float = 1e9, rel_tol: float = 1e-12) -> float:
    """Payload (bits) at which clustered and direct lifetimes are equal.

    Bisection on the sign of :func:`feasibility_margin`, which changes sign
    once because the static-energy term decays like ``1/D``.  The bracket is
    refined far below one bit so the lifetimes agree closely at the root.
    """

    def f(bits: float) -> float:
        return feasibility_margin(inp.with_payload(bits))

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError("no crossover inside the payload bracket")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


FEASIBILITY_COLUMNS = ["n", "r_m", "big_r_m", "lam", "payload_bits", "feasible", "l_c_s", "l_d_s", "threshold_omega"]


def feasibility_row(inp: FeasibilityInputs, res: FeasibilityResult) -> list:
    return [inp.n, inp.r, inp.big_r, inp.lam, inp.traffic.d_i, res.feasible, res.l_c, res.l_d,
            "" if res.threshold_omega is None else res.threshold_omega]
