"""Monte-Carlo reference for the CSMA/CA closed forms.

The channel is unslotted; attempts (new and retried) form a Poisson stream of
rate ``g``.  A busy period opens with the first attempt that finds the channel
idle, absorbs every attempt in the following ``delta_d`` seconds, and closes
``tau_p + delta`` after the last of them starts.  Acknowledgements travel on a
separate channel and are not modelled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BUSY, COLLISION, SUCCESS = 0, 1, 2


@dataclass
class ChannelSample:
    outcomes: np.ndarray  # one of BUSY / COLLISION / SUCCESS per attempt
    elapsed: float
    tau_p: float

    @property
    def p_idle(self) -> float:
        return float(np.mean(self.outcomes != BUSY))

    @property
    def p_success(self) -> float:
        return float(np.mean(self.outcomes == SUCCESS))

    @property
    def airtime(self) -> float:
        """Fraction of time carrying a successful transmission."""
        return float(np.count_nonzero(self.outcomes == SUCCESS)) * self.tau_p / self.elapsed


def simulate_channel(
    g: float, tau_p: float, delta_d: float, delta: float = 0.0, n_arrivals: int = 1_000_000, seed: int = 0
) -> ChannelSample:
    if not g > 0:
        raise ValueError("Monte-Carlo channel needs a positive load")
    rng = np.random.default_rng(seed)
    t = np.cumsum(rng.exponential(1.0 / g, n_arrivals))
    out = np.full(n_arrivals, BUSY, dtype=np.int8)
    i = 0
    while i < n_arrivals:
        start = t[i]
        # attempts inside the vulnerable window join this busy period
        j = int(np.searchsorted(t, start + delta_d, side="right"))
        out[i] = SUCCESS if j == i + 1 else COLLISION
        end = t[j - 1] + tau_p + delta
        # everything until the channel is sensed idle again stays BUSY
        i = int(np.searchsorted(t, end, side="right"))
    return ChannelSample(out, float(t[-1]), tau_p)


def sample_delays(
    channel: ChannelSample,
    theta_b: float,
    theta_f: float,
    k_m: int,
    n_packets: int,
    seed: int = 0,
) -> tuple[np.ndarray, int]:
    """Per-packet delays when each attempt sees an independent channel outcome.

    Outcomes are resampled from ``channel`` so their frequencies are the
    simulated ones.  Returns the delays of delivered packets and the drop count.
    """
    rng = np.random.default_rng(seed)
    tau_p = channel.tau_p
    delay = np.zeros(n_packets)
    active = np.ones(n_packets, dtype=bool)
    done = np.zeros(n_packets, dtype=bool)
    for _ in range(k_m + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        o = channel.outcomes[rng.integers(0, channel.outcomes.size, idx.size)]
        ok = o == SUCCESS
        delay[idx[ok]] += tau_p
        done[idx[ok]] = True
        delay[idx[o == BUSY]] += theta_b
        delay[idx[o == COLLISION]] += theta_f + tau_p
        active[idx[ok]] = False
    return delay[done], int(n_packets - done.sum())


def busy_tail_mc(g: float, delta_d: float, n_samples: int = 200_000, seed: int = 0) -> float:
    """Mean start of the last arrival in ``[0, delta_d]`` (0 when there is none)."""
    rng = np.random.default_rng(seed)
    counts = rng.poisson(g * delta_d, n_samples)
    last = np.zeros(n_samples)
    has = counts > 0
    # max of k uniforms on [0, delta_d] has CDF (y / delta_d)**k
    last[has] = delta_d * rng.random(int(has.sum())) ** (1.0 / counts[has])
    return float(last.mean())


def mean_segment_length_disc(radius: float, n: int = 400_000, seed: int = 0) -> float:
    """Mean distance from a uniform point in a disc to its centre."""
    rng = np.random.default_rng(seed)
    return float(np.mean(radius * np.sqrt(rng.random(n))))
