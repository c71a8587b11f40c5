"""Poisson deployment, nearest-CH (Voronoi) clustering and mean-distance formulas."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .lifetime import TrafficProfile


class Role(str, Enum):
    CH = "CH"
    CM = "CM"
    DIRECT = "DIRECT"


@dataclass
class DeviceState:
    id: int
    position: tuple[float, float]
    energy: float = 0.0
    role: Role = Role.DIRECT
    cluster_id: int | None = None
    traffic: TrafficProfile = field(default_factory=TrafficProfile)


@dataclass
class ClusterAssignment:
    ch_id: int
    member_ids: list[int]
    centroid: tuple[float, float]


def annulus_area(r_inner: float, r_outer: float, sector: float = 2 * math.pi) -> float:
    """Area of an annulus, or of a sector of it spanning ``sector`` radians."""
    return 0.5 * sector * (r_outer**2 - r_inner**2)


def sample_annulus(
    rng: np.random.Generator, n: int, r_inner: float, r_outer: float, sector: float = 2 * math.pi
) -> np.ndarray:
    """``n`` points uniform on the annulus (sector), radius drawn by inverse CDF."""
    u = rng.random(n)
    r = np.sqrt(r_inner**2 + u * (r_outer**2 - r_inner**2))
    phi = rng.uniform(0.0, sector, n)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi)))


def deploy_positions(
    sigma: float, r_inner: float, r_outer: float, rng: np.random.Generator, sector: float = 2 * math.pi
) -> np.ndarray:
    if not 0 <= r_inner < r_outer:
        raise ValueError(f"need 0 <= r_inner < r_outer, got {r_inner!r}, {r_outer!r}")
    if sigma < 0:
        raise ValueError("intensity must be nonnegative")
    if not 0 < sector <= 2 * math.pi:
        raise ValueError("sector angle must lie in (0, 2 pi]")
    n = rng.poisson(sigma * annulus_area(r_inner, r_outer, sector))
    return sample_annulus(rng, n, r_inner, r_outer, sector)


def deploy_ppp(
    sigma: float,
    r_inner: float,
    r_outer: float,
    seed: int,
    energy: float = 0.0,
    traffic: TrafficProfile | None = None,
) -> list[DeviceState]:
    """Homogeneous PPP of intensity ``sigma`` on the annulus, deterministic per seed."""
    pts = deploy_positions(sigma, r_inner, r_outer, np.random.default_rng(seed))
    traffic = traffic or TrafficProfile()
    return [DeviceState(i, (float(x), float(y)), energy, traffic=traffic) for i, (x, y) in enumerate(pts)]


def nearest_ch(points: np.ndarray, ch_points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of (and distance to) the nearest CH for every point.

    Exact distance ties go to the lower CH index.
    """
    if len(ch_points) == 0:
        raise ValueError("no cluster heads")
    k = min(2, len(ch_points))
    dist, idx = cKDTree(ch_points).query(points, k=k)
    if k == 1:
        return idx.astype(int), dist
    tie = dist[:, 0] == dist[:, 1]
    best = idx[:, 0].copy()
    best[tie] = np.minimum(idx[tie, 0], idx[tie, 1])
    return best.astype(int), dist[:, 0]


def assign_to_heads(points: np.ndarray, ch_index: np.ndarray) -> np.ndarray:
    """Cluster label (position in ``ch_index``) of every point; CHs label themselves."""
    labels, _ = nearest_ch(points, points[ch_index])
    labels[ch_index] = np.arange(len(ch_index))
    return labels


def form_voronoi_clusters(devices: list[DeviceState], p: float, seed: int) -> list[ClusterAssignment]:
    """Independent CH draws with probability ``p``; every other device joins its nearest CH.

    Updates roles and cluster ids on ``devices`` in place.
    """
    if not 0 < p <= 1:
        raise ValueError(f"CH probability must lie in (0, 1], got {p!r}")
    rng = np.random.default_rng(seed)
    is_ch = rng.random(len(devices)) < p
    ch_index = np.flatnonzero(is_ch)
    if len(ch_index) == 0:
        for d in devices:
            d.role, d.cluster_id = Role.DIRECT, None
        return []
    pts = np.array([d.position for d in devices], dtype=float).reshape(-1, 2)
    labels = assign_to_heads(pts, ch_index)
    clusters = []
    for c, head in enumerate(ch_index):
        members = np.flatnonzero(labels == c)
        centroid = pts[members].mean(axis=0)
        clusters.append(
            ClusterAssignment(
                ch_id=devices[head].id,
                member_ids=[devices[m].id for m in members if m != head],
                centroid=(float(centroid[0]), float(centroid[1])),
            )
        )
    for i, d in enumerate(devices):
        d.cluster_id = int(labels[i])
        d.role = Role.CH if is_ch[i] else Role.CM
    return clusters


def mean_member_distance(z: float, sigma: float) -> float:
    """Mean CM-to-CH distance sqrt(z / (4 sigma)) for CHs of intensity sigma / z."""
    if z < 1 or not sigma > 0:
        raise ValueError("need z >= 1 and sigma > 0")
    return math.sqrt(z / (4 * sigma))


def cluster_radius_estimate(z: float, sigma: float) -> float:
    return 1.5 * mean_member_distance(z, sigma)


def mean_distance_to_center(big_r: float) -> float:
    return 2.0 * big_r / 3.0


def avg_distance_to_offcenter_ch(r: float, big_r: float) -> float:
    """Approximate mean distance from a uniform point in a disc of radius ``big_r``
    to a point at distance ``r`` from its centre."""
    if not 0 <= r <= big_r:
        raise ValueError(f"need 0 <= r <= R, got r={r!r}, R={big_r!r}")
    return 2 * big_r / 3 + r**2 / (2 * big_r) - r**4 / (32 * big_r**3)


def mean_pairwise_distance_disc(r: float) -> float:
    """Mean distance between two uniform points in a disc of radius ``r``."""
    return 128 * r / (45 * math.pi)


def export_deployment_csv(devices: list[DeviceState], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "y", "role", "cluster_id"])
        for d in devices:
            w.writerow([d.id, f"{d.position[0]:.6f}", f"{d.position[1]:.6f}", d.role.value,
                        "" if d.cluster_id is None else d.cluster_id])
