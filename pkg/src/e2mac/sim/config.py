"""Simulation configuration, presets and validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

from ..lifetime import PowerProfile
from ..radio import RadioEnvironment

VARIANTS = ("E2MAC", "E2MACn", "E2MACr", "CMAC")
RESELECT_MODES = ("tenure", "death")


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _table_power() -> PowerProfile:
    return PowerProfile(p_c=0.02, p_s=0.0, p_l=0.02, p_t_m=0.05, p_t_h=0.2, p_t_d=0.2, xi=2.0, e_s_h=1.5e-3)


@dataclass(frozen=True)
class SimConfig:
    mac_variant: str = "E2MAC"
    n_phases: int = 1
    # mean cluster size z; values below 1 are read as the CH probability p = 1/z
    cluster_size: float = 100.0
    # int: reselect every that many cycles; "tenure": when the chosen CH's
    # expected tenure ends; "death": only when a CH dies
    ch_reselect_period: int | str = 1
    e_ref: float = 0.0
    reselect_energy: float = 0.0
    e0: float = 2.0
    seed: int = 0

    r_inner: float = 50.0
    r_outer: float = 500.0
    sector: float = 2 * math.pi
    n_t: int = 5000
    t_ra: float = 1000.0
    bandwidth: float = 180e3
    ra_window: float = 2.4
    intra_window: float = 1.4
    n_bunches: int = 7
    inter_window: float = 1.0
    slot_per_member: float = 1e-3
    z_cap: int = 200
    backoff_divisor: float = 5.0
    delta_d: float = 1e-3
    k_m: int = 10
    payload_bits: float = 5 * 8192.0
    report_interval: float = 7 * 3600.0
    lam: float = 1.0
    n_preambles: int = 54
    frame: float = 10e-3
    preamble_time: float = 1e-3
    rach_backoff: int = 10
    power: PowerProfile = field(default_factory=_table_power)
    env: RadioEnvironment = field(default_factory=RadioEnvironment)
    max_cycles: int = 1_000_000
    event_log: bool = False
    trace_every: int = 0

    def __post_init__(self) -> None:
        check = _Checker()
        check(self.mac_variant in VARIANTS, "mac_variant", f"must be one of {VARIANTS}")
        check(isinstance(self.n_phases, int) and self.n_phases >= 1, "n_phases", "must be an integer >= 1")
        check(self.cluster_size > 0, "cluster_size", "must be positive")
        z = self.z
        check(1 <= z <= max(self.n_t, 1), "cluster_size", f"mean cluster size {z:g} outside [1, n_t]")
        per = self.ch_reselect_period
        check(
            per in RESELECT_MODES or (isinstance(per, int) and not isinstance(per, bool) and per >= 1),
            "ch_reselect_period",
            f"must be a positive integer or one of {RESELECT_MODES}",
        )
        for name in ("e_ref", "reselect_energy"):
            check(getattr(self, name) >= 0, name, "must be nonnegative")
        check(self.e0 > 0, "e0", "must be positive")
        check(0 <= self.r_inner < self.r_outer, "r_outer", "need 0 <= r_inner < r_outer")
        check(0 < self.sector <= 2 * math.pi, "sector", "must lie in (0, 2 pi]")
        check(isinstance(self.n_t, int) and self.n_t >= 1, "n_t", "must be a positive integer")
        for name in ("t_ra", "bandwidth", "ra_window", "intra_window", "inter_window", "slot_per_member",
                     "backoff_divisor", "payload_bits", "report_interval", "frame", "preamble_time"):
            check(getattr(self, name) > 0, name, "must be positive")
        check(self.delta_d >= 0, "delta_d", "must be nonnegative")
        check(self.ra_window <= self.t_ra, "ra_window", "resource window exceeds t_ra")
        check(self.intra_window + self.inter_window <= self.ra_window + 1e-12, "inter_window",
              "intra plus inter windows exceed the resource window")
        check(self.n_bunches >= 1, "n_bunches", "must be >= 1")
        check(self.z_cap * self.slot_per_member <= self.intra_window / self.n_bunches + 1e-12, "z_cap",
              "longest cluster window does not fit in one bunch")
        check(self.k_m >= 1, "k_m", "must be >= 1")
        check(0 < self.lam <= 1, "lam", "must lie in (0, 1]")
        check(self.n_preambles >= 1, "n_preambles", "must be >= 1")
        check(self.preamble_time + 1e-3 < self.frame, "preamble_time", "must leave room in the frame")
        check(self.rach_backoff >= 1, "rach_backoff", "must be >= 1")
        check(self.max_cycles >= 1, "max_cycles", "must be >= 1")
        check(self.trace_every >= 0, "trace_every", "must be nonnegative")

    @property
    def z(self) -> float:
        return self.cluster_size if self.cluster_size >= 1 else 1.0 / self.cluster_size

    @property
    def r_g(self) -> float:
        return 1.0 / self.report_interval

    @property
    def bunch_length(self) -> float:
        return self.intra_window / self.n_bunches

    @property
    def reselect(self) -> int | str:
        if self.mac_variant == "E2MACn":
            return "death"
        return self.ch_reselect_period

    @property
    def label(self) -> str:
        if self.mac_variant == "CMAC":
            return "cMAC"
        return f"({self.n_phases},{self.z:g}){self.mac_variant}"

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


class _Checker:
    def __call__(self, ok: bool, name: str, message: str) -> None:
        if not ok:
            raise ConfigError(name, message)


def table_config(**overrides) -> SimConfig:
    """Full-size cell: 5000 devices, 1000 s resource interval."""
    return SimConfig(**overrides)


def desk_config(**overrides) -> SimConfig:
    """A one-tenth slice of the full cell that runs in seconds.

    500 devices on a 36-degree sector of the annulus keep the full-size device
    density and BS distances; the resource interval is cut to 100 s with the
    report interval cut by the same factor, so the mean number of packets per
    device per interval is unchanged.  The preamble pool is scaled with the
    population so contention per preamble is preserved.
    """
    base = dict(
        n_t=500,
        sector=2 * math.pi / 10,
        t_ra=100.0,
        report_interval=7 * 3600.0 / 10,
        n_preambles=5,
        e0=2.0,
        cluster_size=62.0,
    )
    base.update(overrides)
    return SimConfig(**base)


SCALAR_FIELDS = tuple(f.name for f in fields(SimConfig) if f.name not in ("power", "env"))
