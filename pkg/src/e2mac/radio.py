"""Path loss and expected data-rate functions.

All rates are in bit/s when the environment uses base-2 logarithms and in
nat/s with natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class LogBase(str, Enum):
    BASE2 = "base2"
    NATURAL = "natural"


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class PathLossModel:
    """Log-distance path loss, ``intercept + slope * log10(d / reference)`` in dB."""

    intercept_db: float
    slope_db_per_decade: float
    reference_distance: float = 1.0

    def loss_db(self, d: float) -> float:
        if not d > 0:
            raise ValueError(f"distance must be positive, got {d!r}")
        return self.intercept_db + self.slope_db_per_decade * math.log10(d / self.reference_distance)

    @property
    def exponent(self) -> float:
        """Path loss exponent gamma in ``beta * d**gamma``."""
        return self.slope_db_per_decade / 10.0

    @property
    def beta(self) -> float:
        """Constant beta in ``beta * d**gamma`` (d in metres)."""
        return db_to_linear(self.intercept_db) / self.reference_distance**self.exponent


# Cellular macro loss (CH/device to BS) and short-range loss (CM to CH).
INTER_CLUSTER_PL = PathLossModel(128.1, 37.6, 1000.0)
INTRA_CLUSTER_PL = PathLossModel(38.5, 20.0, 1.0)


@dataclass(frozen=True)
class RadioEnvironment:
    w_m: float = 180e3
    w_h: float = 180e3
    n0: float = db_to_linear(-204.0)
    gamma_gap: float = db_to_linear(13.0)
    pl_inter: PathLossModel = field(default=INTER_CLUSTER_PL)
    pl_intra: PathLossModel = field(default=INTRA_CLUSTER_PL)
    log_base: LogBase = LogBase.BASE2

    def __post_init__(self) -> None:
        for name in ("w_m", "w_h", "n0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.gamma_gap < 1.0:
            raise ValueError("gamma_gap must be >= 1 in linear scale")
        object.__setattr__(self, "log_base", LogBase(self.log_base))

    def log(self, x: float) -> float:
        return math.log2(x) if self.log_base is LogBase.BASE2 else math.log(x)

    def log1p(self, x: float) -> float:
        # log1p keeps precision for the tiny SNRs seen at long range
        v = math.log1p(x)
        return v / math.log(2.0) if self.log_base is LogBase.BASE2 else v

    def omega_inter(self, d: float) -> float:
        return path_loss_linear(self.pl_inter, d)

    def omega_intra(self, d: float) -> float:
        return path_loss_linear(self.pl_intra, d)


def path_loss_linear(model: PathLossModel, d: float) -> float:
    """Linear attenuation 10**(PL_dB(d)/10)."""
    return db_to_linear(model.loss_db(d))


def _check_rate_args(w: float, p_tx: float, omega: float, u: float) -> None:
    if w < 0 or p_tx < 0:
        raise ValueError("bandwidth and transmit power must be nonnegative")
    if not omega > 0:
        raise ValueError("path loss must be positive")
    if not u >= 1:
        raise ValueError(f"number of sharing nodes must be >= 1, got {u!r}")


def fdma_rate(env: RadioEnvironment, w: float, p_tx: float, omega: float, u: float = 1) -> float:
    """Rate of one of ``u`` users each holding ``w/u`` of the band."""
    _check_rate_args(w, p_tx, omega, u)
    if p_tx == 0 or w == 0:
        return 0.0
    share = w / u
    return share * env.log1p(p_tx / (env.n0 * env.gamma_gap * omega * share))


def tdma_rate(env: RadioEnvironment, w: float, p_tx: float, omega: float, u: float = 1) -> float:
    """Rate of one of ``u`` users each holding the full band ``1/u`` of the time."""
    _check_rate_args(w, p_tx, omega, u)
    if p_tx == 0 or w == 0:
        return 0.0
    return (w / u) * env.log1p(p_tx / (env.n0 * env.gamma_gap * omega * w))


def shannon_rate(env: RadioEnvironment, w: float, p_tx: float, omega: float) -> float:
    return tdma_rate(env, w, p_tx, omega, 1)


def csma_effective_rate(
    env: RadioEnvironment,
    w: float,
    p_tx: float,
    omega: float,
    p_is: float,
    r_g: float,
    t_ra: float,
) -> float:
    """Per-cycle effective CM rate ``p_is * w / (r_g t_ra) * log(1 + SNR)``."""
    if not 0.0 <= p_is <= 1.0:
        raise ValueError(f"p_is must be a probability, got {p_is!r}")
    if not r_g * t_ra > 0:
        raise ValueError("r_g * t_ra must be positive")
    _check_rate_args(w, p_tx, omega, 1)
    return p_is * w / (r_g * t_ra) * env.log1p(p_tx / (env.n0 * env.gamma_gap * omega * w))


RATE_FUNCTIONS = {"fdma": fdma_rate, "tdma": tdma_rate}


def snr_targeted_power(env: RadioEnvironment, snr: float, omega: float, noise_bw: float) -> float:
    """Transmit power that yields ``snr`` at the receiver over ``noise_bw`` Hz."""
    return snr * env.n0 * env.gamma_gap * omega * noise_bw
