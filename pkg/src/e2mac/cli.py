"""Command-line entry point: analysis sweeps, cluster sizing, feasibility and simulation."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .configio import (
    ConfigError,
    LoadedConfig,
    csma_from,
    dataclass_dict,
    feasibility_from,
    load_config,
    scenario_from,
    sim_from,
    sim_seeds,
    sim_variants,
)
from .csma import SWEEP_COLUMNS, sweep_rows
from .feasibility import FEASIBILITY_COLUMNS, clustering_feasibility, crossover_payload, feasibility_row
from .geometry import sample_annulus
from .planner import optimal_cluster_size
from .sim import COMPARE_COLUMNS, SUMMARY_COLUMNS, compare_variants, delay_cdf, lifetime_cdf, run_sim, summary_row

log = logging.getLogger("e2mac")


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_manifest(out: Path, cfg: LoadedConfig, command: str, seeds, extra: dict | None = None) -> None:
    manifest = {
        "subcommand": command,
        "config_path": cfg.path,
        "config_sha256": cfg.sha256,
        "seeds": list(seeds),
        "out_dir": str(out),
        "tool_version": __version__,
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_analyze_csma(args, cfg: LoadedConfig) -> int:
    params, loads, phases = csma_from(cfg.section("csma"))
    out = _out_dir(args)
    rows = sweep_rows(params, loads, phases)
    write_csv(out / "csma_sweep.csv", SWEEP_COLUMNS, rows)
    write_manifest(out, cfg, "analyze-csma", [])
    if rows:
        for n in phases:
            sub = [r for r in rows if r[1] == n]
            best = max(sub, key=lambda r: r[6])
            print(f"n={n}: peak U_S at g*tau_p = {best[0] * params.tau_p:.3f}")
    print(f"wrote {len(rows)} rows to {out / 'csma_sweep.csv'}")
    return 0


def cmd_optimize_cluster(args, cfg: LoadedConfig) -> int:
    scenario, z_min, z_max, report = scenario_from(cfg)
    out = _out_dir(args)
    fn = scenario.lifetime_fn()
    z_star, best = optimal_cluster_size(fn, z_min, z_max)
    sizes = sorted(set(z for z in report if z_min <= z <= z_max) | {z_star})
    rows = []
    for z in sizes:
        try:
            life = fn(z)
        except ValueError:
            life = math.nan
        rows.append([z, life, life / best if life == life else math.nan])
    write_csv(out / "cluster_size.csv", ["z", "lifetime_s", "relative"], rows)
    seed = 0 if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    pts = sample_annulus(rng, args.samples, scenario.r_inner, scenario.r_outer)
    d_h = np.hypot(pts[:, 0], pts[:, 1])
    life = np.sort([scenario.lifetime(z_star, float(d)) for d in d_h])
    cdf = [(float(x), (k + 1) / life.size) for k, x in enumerate(life)]
    write_csv(out / "lifetime_dh_cdf.csv", ["lifetime_s", "fraction"], cdf)
    write_manifest(out, cfg, "optimize-cluster", [seed], {"z_star": z_star})
    print(f"z* = {z_star}  (lifetime {best:.6g} s = {best / (365.25 * 86400):.6g} yr)")
    print(f"{'z':>6}  {'lifetime_s':>14}  {'relative':>9}")
    for z, lt, rel in rows:
        print(f"{z:>6}  {lt:>14.6g}  {rel:>9.5f}")
    return 0


def cmd_feasibility(args, cfg: LoadedConfig) -> int:
    inp = feasibility_from(cfg)
    out = _out_dir(args)
    res = clustering_feasibility(inp)
    try:
        cross = crossover_payload(inp)
    except ValueError:
        cross = math.nan
    write_csv(out / "feasibility.csv", FEASIBILITY_COLUMNS + ["crossover_bits"], [feasibility_row(inp, res) + [cross]])
    write_manifest(out, cfg, "feasibility", [])
    print(f"clustering {'feasible' if res.feasible else 'not feasible'}: L_c = {res.l_c:.6g} s, L_d = {res.l_d:.6g} s")
    if res.threshold_omega is not None:
        print(f"path-loss threshold {res.threshold_omega:.6g} (actual {res.omega_h:.6g})")
    if cross == cross:
        print(f"crossover payload {cross:.1f} bits = {cross / 8192:.3f} KB")
    else:
        print("no crossover payload in [1, 1e9] bits")
    return 0


def _sim_overrides(args) -> dict:
    return {"mac_variant": args.variant, "seed": args.seed}


def cmd_simulate(args, cfg: LoadedConfig) -> int:
    sim = sim_from(cfg, **_sim_overrides(args))
    out = _out_dir(args)
    outcome = run_sim(sim)
    write_csv(out / "lifetime_cdf.csv", ["time_s", "fraction_dead"], lifetime_cdf(outcome))
    write_csv(out / "delay_cdf.csv", ["delay_s", "fraction"], delay_cdf(outcome))
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, [summary_row(outcome, sim.seed)])
    write_manifest(out, cfg, "simulate", [sim.seed], {"sim": dataclass_dict(sim)})
    print(f"{outcome.per_variant_label}: FED {outcome.fed:.6g} s, last death {outcome.last_death:.6g} s, "
          f"{outcome.delivered} delivered, {outcome.dropped} dropped")
    return 0


def cmd_sweep(args, cfg: LoadedConfig) -> int:
    base = sim_from(cfg, **_sim_overrides(args))
    seeds = args.seeds or sim_seeds(cfg) or [base.seed]
    variants = sim_variants(cfg)
    if variants is None:
        cfgs = [base]
    else:
        cfgs = []
        for v in variants:
            sub = LoadedConfig({"sim": {**cfg.section("sim"), **v}}, cfg.raw, cfg.path)
            cfgs.append(sim_from(sub, where="sim", seed=base.seed))
    out = _out_dir(args)
    table, raw = compare_variants(cfgs, seeds, jobs=args.jobs)
    summary = [summary_row(o, s) for outs in raw.values() for o, s in zip(outs, seeds)]
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, summary)
    write_csv(out / "compare.csv", COMPARE_COLUMNS, table)
    write_manifest(out, cfg, "sweep", seeds, {"variants": [c.label for c in cfgs], "jobs": args.jobs})
    for row in table:
        print(f"{row[0]:>20}: mean FED {row[2]:.6g} s, mean last death {row[3]:.6g} s over {row[1]} runs")
    return 0


COMMANDS = {
    "analyze-csma": cmd_analyze_csma,
    "optimize-cluster": cmd_optimize_cluster,
    "feasibility": cmd_feasibility,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="e2mac", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out-dir", default="out", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, help="RNG seed")
        p.add_argument("-v", "--verbose", action="store_true")
        if name in ("simulate", "sweep"):
            p.add_argument("--variant", choices=["E2MAC", "E2MACn", "E2MACr", "CMAC"])
        if name == "sweep":
            p.add_argument("--seeds", type=int, nargs="+", help="seeds to run (overrides the config)")
            p.add_argument("--jobs", type=int, default=1, help="parallel simulator processes")
        if name == "optimize-cluster":
            p.add_argument("--samples", type=int, default=1000, help="BS distances drawn for the lifetime CDF")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
