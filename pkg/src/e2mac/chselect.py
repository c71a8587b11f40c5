"""Cluster-head selection, CH tenure and max-min fairness of lifetimes."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .geometry import avg_distance_to_offcenter_ch, cluster_radius_estimate
from .lifetime import ClusterModel, PowerProfile, RateFn, TrafficProfile, _rate_fn
from .radio import RATE_FUNCTIONS, LogBase, RadioEnvironment


@dataclass
class ChCandidateContext:
    """Everything needed to price each member's cycle energy under each candidate CH.

    ``ids`` are sorted ascending; ``pairwise`` and ``bs_distances`` are indexed
    in the same order.
    """

    ids: np.ndarray
    pairwise: np.ndarray
    bs_distances: np.ndarray
    centroid_offsets: np.ndarray
    t_c: float
    env: RadioEnvironment
    power: PowerProfile
    cluster: ClusterModel
    traffic: TrafficProfile
    rate_m: str | RateFn = "fdma"
    rate_h: str | RateFn = "fdma"
    cluster_radius: float | None = None
    exact_listen_distance: bool = False
    u_m: float | None = None
    u_h: float | None = None
    _matrix: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_positions(
        cls,
        ids: Sequence[int],
        positions: np.ndarray,
        *,
        bs: tuple[float, float] = (0.0, 0.0),
        **kwargs,
    ) -> "ChCandidateContext":
        ids = np.asarray(ids)
        pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        order = np.argsort(ids, kind="stable")
        ids, pos = ids[order], pos[order]
        diff = pos[:, None, :] - pos[None, :, :]
        pairwise = np.hypot(diff[..., 0], diff[..., 1])
        bs_d = np.hypot(pos[:, 0] - bs[0], pos[:, 1] - bs[1])
        centroid = pos.mean(axis=0)
        offs = np.hypot(pos[:, 0] - centroid[0], pos[:, 1] - centroid[1])
        return cls(ids, pairwise, bs_d, offs, **kwargs)

    @classmethod
    def from_maps(
        cls,
        ids: Sequence[int],
        pairwise: Mapping[tuple[int, int], float],
        bs_distances: Mapping[int, float],
        centroid_offsets: Mapping[int, float],
        **kwargs,
    ) -> "ChCandidateContext":
        ids = sorted(ids)
        n = len(ids)
        pw = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                key = (ids[a], ids[b])
                d = pairwise[key] if key in pairwise else pairwise[(ids[b], ids[a])]
                pw[a, b] = pw[b, a] = d
        return cls(
            np.array(ids),
            pw,
            np.array([bs_distances[i] for i in ids], dtype=float),
            np.array([centroid_offsets[i] for i in ids], dtype=float),
            **kwargs,
        )

    @property
    def size(self) -> int:
        return len(self.ids)

    def subset(self, keep: np.ndarray) -> "ChCandidateContext":
        """Context restricted to the members flagged in boolean mask ``keep``."""
        idx = np.flatnonzero(keep)
        return ChCandidateContext(
            self.ids[idx],
            self.pairwise[np.ix_(idx, idx)],
            self.bs_distances[idx],
            self.centroid_offsets[idx],
            self.t_c,
            self.env,
            self.power,
            self.cluster,
            self.traffic,
            self.rate_m,
            self.rate_h,
            self.cluster_radius,
            self.exact_listen_distance,
            self.u_m,
            self.u_h,
        )

    def listen_distance(self, k: int) -> float:
        """Mean distance from a point of the cluster to candidate ``k``."""
        if self.exact_listen_distance:
            if self.size == 1:
                return float("nan")
            return float(self.pairwise[k].sum() / (self.size - 1))
        big_r = self.cluster_radius or cluster_radius_estimate(self.cluster.z, self.cluster.sigma)
        # offsets beyond the disc radius fall outside the approximation's domain
        r = min(float(self.centroid_offsets[k]), big_r)
        return avg_distance_to_offcenter_ch(r, big_r)

    def energy_matrix(self) -> np.ndarray:
        """``M[j, i]``: expected energy of member ``j`` per cycle when ``i`` is CH."""
        if self._matrix is None:
            self._matrix = self._build_matrix()
        return self._matrix

    def _shares(self) -> tuple[float, float]:
        u_m = self.cluster.z if self.u_m is None else self.u_m
        u_h = self.cluster.n_t / self.cluster.z if self.u_h is None else self.u_h
        return u_m, u_h

    def _build_matrix(self) -> np.ndarray:
        env, pw, cl, tr = self.env, self.power, self.cluster, self.traffic
        n = self.size
        psi = n - 1
        u_m, u_h = self._shares()
        off = ~np.eye(n, dtype=bool)
        if np.any(~(self.pairwise[off] > 0)):
            j, i = np.argwhere(off & ~(self.pairwise > 0))[0]
            raise ValueError(f"devices {self.ids[j]} and {self.ids[i]} are co-located")
        if psi == 0 or pw.p_l == 0:
            listen = np.ones(n)
        elif self.exact_listen_distance:
            listen = self.pairwise.sum(axis=1) / psi
        else:
            listen = np.array([self.listen_distance(k) for k in range(n)])
        d = np.where(off, self.pairwise, 1.0)
        if isinstance(self.rate_m, str) and isinstance(self.rate_h, str):
            r_m = _rates(env, self.rate_m, env.w_m, pw.p_t_m, _omega(env.pl_intra, d), u_m)
            r_h = _rates(env, self.rate_h, env.w_h, pw.p_t_h, _omega(env.pl_inter, self.bs_distances), u_h)
            r_l = _rates(env, self.rate_m, env.w_m, pw.p_t_m, _omega(env.pl_intra, listen), u_m)
        else:
            f_m, f_h = _rate_fn(self.rate_m), _rate_fn(self.rate_h)
            r_m = np.array([[f_m(env, env.w_m, pw.p_t_m, env.omega_intra(x), u_m) for x in row] for row in d])
            r_h = np.array([f_h(env, env.w_h, pw.p_t_h, env.omega_inter(x), u_h) for x in self.bs_distances])
            r_l = np.array([f_m(env, env.w_m, pw.p_t_m, env.omega_intra(x), u_m) for x in listen])
        for name, arr in (("member", r_m), ("BS", r_h), ("listening", r_l)):
            bad = ~(arr > 0)
            if name == "member":
                bad &= off
            if bad.any():
                k = np.argwhere(bad)[0]
                raise ValueError(f"nonpositive {name} rate at index {tuple(int(x) for x in k)}")
        m = pw.e_s + tr.d_i * (pw.p_c + pw.xi * pw.p_t_m) / r_m
        ch = pw.e_s_h + (1 + cl.lam * psi) * tr.d_i * (pw.p_c + pw.xi * pw.p_t_h) / r_h
        if psi > 0:
            ch = ch + psi * tr.d_i * pw.p_l / r_l
        m[np.diag_indices(n)] = ch
        return m


def _omega(model, d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be positive")
    db = model.intercept_db + model.slope_db_per_decade * np.log10(d / model.reference_distance)
    return 10.0 ** (db / 10.0)


def _rates(env: RadioEnvironment, kind: str, w: float, p_tx: float, omega, u: float) -> np.ndarray:
    """Vectorised FDMA/TDMA rate over an array of path losses."""
    if kind not in RATE_FUNCTIONS:
        raise KeyError(kind)
    if not u >= 1:
        raise ValueError(f"number of sharing nodes must be >= 1, got {u!r}")
    noise_bw = w / u if kind == "fdma" else w
    snr = p_tx / (env.n0 * env.gamma_gap * omega * noise_bw)
    rate = (w / u) * np.log1p(snr)
    return rate / math.log(2.0) if env.log_base is LogBase.BASE2 else rate


def _energy_vector(ctx: ChCandidateContext, energies) -> np.ndarray:
    if isinstance(energies, Mapping):
        return np.array([energies[int(i)] for i in ctx.ids], dtype=float)
    return np.asarray(energies, dtype=float)


def candidate_scores(matrix: np.ndarray, energies: np.ndarray) -> np.ndarray:
    """Minimum member lifetime (in cycles) under each candidate CH."""
    return (energies[:, None] / matrix).min(axis=0)


def ch_select(ctx: ChCandidateContext, energies) -> tuple[int, float]:
    """CH maximising the minimum member lifetime; ties go to the lowest id.

    Returns the chosen id and that minimum lifetime in seconds.
    """
    if ctx.size < 1:
        raise ValueError("empty cluster")
    e = _energy_vector(ctx, energies)
    scores = candidate_scores(ctx.energy_matrix(), e)
    k = int(np.argmax(scores))
    return int(ctx.ids[k]), float(scores[k] * ctx.t_c)


@dataclass(frozen=True)
class ChTenure:
    ch_id: int
    k_cycles: int
    bottleneck_id: int
    depleted: bool = False


def ch_tenure(ctx: ChCandidateContext, energies, i_star: int) -> ChTenure:
    """Number of cycles ``i_star`` stays the max-min choice as energies drain.

    Each candidate's minimum lifetime is a concave piecewise-linear function of
    the cycle count, so the first cycle at which some other candidate overtakes
    ``i_star`` is found per linear piece without replaying cycles.
    """
    e = _energy_vector(ctx, energies)
    m = ctx.energy_matrix()
    k_star = int(np.flatnonzero(ctx.ids == i_star)[0])
    a = m[:, k_star]
    own = e / a
    bottleneck = int(np.argmin(own))
    c = float(own[bottleneck])
    cap = math.floor(c)
    best = math.inf
    for j in range(ctx.size):
        if j == k_star:
            continue
        alpha = e / m[:, j] - c
        beta = 1.0 - a / m[:, j]
        if np.any((beta == 0) & (alpha <= 0)):
            continue
        up = beta > 0
        down = beta < 0
        lower = float(np.max(-alpha[up] / beta[up])) if up.any() else -math.inf
        upper = float(np.min(alpha[down] / -beta[down])) if down.any() else math.inf
        k = 0 if lower < 0 else math.floor(lower) + 1
        if k < upper and k < best:
            best = k
    bottleneck_id = int(ctx.ids[bottleneck])
    if best > cap:
        return ChTenure(int(i_star), cap, bottleneck_id, depleted=True)
    return ChTenure(int(i_star), int(best), bottleneck_id)


def replay_tenure(ctx: ChCandidateContext, energies, i_star: int) -> ChTenure:
    """Tenure by draining energies cycle by cycle and re-running the selection."""
    e = _energy_vector(ctx, energies).copy()
    m = ctx.energy_matrix()
    k_star = int(np.flatnonzero(ctx.ids == i_star)[0])
    a = m[:, k_star]
    bottleneck = int(np.argmin(e / a))
    cap = math.floor(float((e / a)[bottleneck]))
    for k in range(1, cap + 1):
        drained = e - k * a
        if int(np.argmax(candidate_scores(m, drained))) != k_star:
            return ChTenure(int(i_star), k, int(ctx.ids[bottleneck]))
    return ChTenure(int(i_star), cap, int(ctx.ids[bottleneck]), depleted=True)


def simulate_reselection(ctx: ChCandidateContext, energies, period: int | None = 1) -> dict[int, float]:
    """Death time (s) of every member when the CH is re-chosen every ``period`` cycles.

    ``period=None`` keeps each CH until it dies.  Energies drain by their
    expected per-cycle amounts; a member dies part-way through the cycle in
    which its energy runs out, and a dead CH is replaced at the next cycle.
    """
    e = _energy_vector(ctx, energies).astype(float).copy()
    alive = e > 0
    deaths: dict[int, float] = {int(i): 0.0 for i in ctx.ids[~alive]}
    sub = ctx.subset(alive)
    ch: int | None = None
    cycle = 0
    since = 0
    while alive.any():
        idx = np.flatnonzero(alive)
        if ch is None or not alive[ch] or (period is not None and since >= period):
            chosen, _ = ch_select(sub, e[idx])
            ch = int(np.flatnonzero(ctx.ids == chosen)[0])
            since = 0
        cost = sub.energy_matrix()[:, int(np.flatnonzero(idx == ch)[0])]
        frac = np.minimum(e[idx] / cost, 1.0)
        e[idx] -= cost * frac
        died = idx[frac < 1.0]
        for d in died:
            deaths[int(ctx.ids[d])] = (cycle + float(frac[idx == d][0])) * ctx.t_c
            e[d] = 0.0
        if died.size:
            alive[died] = False
            sub = ctx.subset(alive)
        cycle += 1
        since += 1
    return deaths


def maxmin_fairness_check(death_times, tolerance: float = 0.05) -> tuple[float, bool]:
    """Spread between the last and first death, and whether it is within
    ``tolerance`` times the mean lifetime."""
    t = np.asarray(list(death_times.values()) if isinstance(death_times, Mapping) else death_times, float)
    if t.size == 0:
        raise ValueError("no lifetimes")
    gap = float(t.max() - t.min())
    return gap, gap <= tolerance * float(t.mean())
