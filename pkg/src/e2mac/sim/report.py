"""Empirical CDFs and cross-seed comparison tables for simulation outcomes."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .config import SimConfig
from .engine import SimOutcome, run_sim

SUMMARY_COLUMNS = ["variant", "seed", "fed_s", "last_death_s", "delay_p50_s", "delay_max_s"]
COMPARE_COLUMNS = ["variant", "runs", "fed_mean_s", "last_death_mean_s", "delay_p50_s", "delay_p95_s", "delay_max_s"]


def _ecdf(values: np.ndarray) -> list[tuple[float, float]]:
    """Right-continuous empirical CDF, one point per distinct value."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return []
    uniq, idx = np.unique(v, return_index=True)
    upto = np.append(idx[1:], v.size)
    return [(float(x), float(k) / v.size) for x, k in zip(uniq, upto)]


def lifetime_cdf(outcome: SimOutcome) -> list[tuple[float, float]]:
    """``(time, fraction dead)`` at every distinct death time."""
    return _ecdf(np.array(list(outcome.death_times.values())))


def delay_cdf(outcome: SimOutcome) -> list[tuple[float, float]]:
    return _ecdf(outcome.packet_delays)


def _pct(d: np.ndarray, q: float) -> float:
    return float(np.percentile(d, q)) if d.size else math.nan


def summary_row(outcome: SimOutcome, seed: int) -> list:
    d = outcome.packet_delays
    return [outcome.per_variant_label, seed, outcome.fed, outcome.last_death, _pct(d, 50),
            float(d.max()) if d.size else math.nan]


def run_many(cfgs: Sequence[SimConfig], jobs: int = 1) -> list[SimOutcome]:
    """Run independent configurations, optionally across processes; order is preserved."""
    if jobs <= 1 or len(cfgs) <= 1:
        return [run_sim(c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_sim, cfgs))


def compare_variants(
    cfgs: Iterable[SimConfig], seeds: Iterable[int], jobs: int = 1
) -> tuple[list[list], dict[str, list[SimOutcome]]]:
    """Mean FED, mean last death and pooled delay percentiles per configuration.

    Returns the table rows (in :data:`COMPARE_COLUMNS` order) and the raw
    outcomes keyed by label.  Two configurations with the same label are
    reported separately, suffixed by their position.
    """
    cfgs = list(cfgs)
    seeds = list(seeds)
    runs = [replace(c, seed=s) for c in cfgs for s in seeds]
    outs = run_many(runs, jobs)
    rows, raw = [], {}
    labels = [c.label for c in cfgs]
    for k, c in enumerate(cfgs):
        label = c.label if labels.count(c.label) == 1 else f"{c.label}#{k}"
        chunk = outs[k * len(seeds) : (k + 1) * len(seeds)]
        raw[label] = chunk
        delays = np.concatenate([o.packet_delays for o in chunk]) if chunk else np.zeros(0)
        rows.append([
            label,
            len(chunk),
            float(np.mean([o.fed for o in chunk])),
            float(np.mean([o.last_death for o in chunk])),
            _pct(delays, 50),
            _pct(delays, 95),
            float(delays.max()) if delays.size else math.nan,
        ])
    return rows, raw
