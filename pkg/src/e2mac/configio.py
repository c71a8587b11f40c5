"""JSON configuration loading with field-level validation.

A configuration is one JSON object with optional sections ``radio``,
``power``, ``traffic``, ``cluster``, ``csma``, ``feasibility``, ``scenario``
and ``sim``.  Keys are the dataclass field names; a key ending in ``_db``
whose stem is a linear field (``gamma_gap_db``, ``n0_db``, ``s_h_db``) is
converted from dB once, here.  Unknown keys and invalid values raise
:class:`ConfigError` naming the dotted key path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import fields, is_dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .csma import CsmaParams
from .feasibility import FeasibilityInputs
from .lifetime import ClusterModel, PowerProfile, TrafficProfile
from .planner import CellScenario
from .radio import PathLossModel, RadioEnvironment, db_to_linear
from .sim.config import ConfigError, SimConfig, desk_config

SECTIONS = ("radio", "power", "traffic", "cluster", "csma", "feasibility", "scenario", "sim")


class LoadedConfig:
    """Parsed JSON document plus the raw bytes it came from."""

    def __init__(self, data: dict[str, Any], raw: bytes, path: str | None):
        self.data = data
        self.raw = raw
        self.path = path

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.raw).hexdigest()

    def section(self, name: str) -> dict[str, Any]:
        sec = self.data.get(name, {})
        if not isinstance(sec, dict):
            raise ConfigError(name, "must be a JSON object")
        return sec


def load_config(path: str | Path | None) -> LoadedConfig:
    if path is None:
        return LoadedConfig({}, b"", None)
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {p}: {exc.strerror}") from exc
    try:
        data = json.loads(raw.decode("utf-8")) if raw.strip() else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    for key in data:
        if key not in SECTIONS:
            raise ConfigError(key, f"unknown section (expected one of {', '.join(SECTIONS)})")
    return LoadedConfig(data, raw, str(p))


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(where, "must be finite")
    return value


def _field_values(cls: type, section: dict[str, Any], where: str, nested: dict[str, Any] | None = None) -> dict:
    """Map JSON keys onto ``cls`` field names, converting ``_db`` keys to linear."""
    types = {f.name: f.type for f in fields(cls)}
    names = set(types)
    nested = nested or {}
    out: dict[str, Any] = {}
    for key, value in section.items():
        path = f"{where}.{key}"
        if key in nested:
            out[nested[key][0]] = nested[key][1](value, path)
            continue
        if key in names:
            name = key
        elif key.endswith("_db") and key[:-3] in names:
            name = key[:-3]
        else:
            raise ConfigError(path, "unknown key")
        if name in out:
            raise ConfigError(path, "given twice (linear and dB)")
        if name != key:
            out[name] = db_to_linear(_number(value, path))
        elif types[name] in ("float", "int", "float | None"):
            out[name] = None if value is None and types[name].endswith("None") else _number(value, path)
        else:
            out[name] = value if isinstance(value, (str, bool, list)) else _number(value, path)
    return out


def _construct(cls: type, values: dict, where: str):
    try:
        return cls(**values)
    except ConfigError as exc:
        raise ConfigError(f"{where}.{exc.field}", str(exc).split(": ", 1)[-1]) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from exc


def _path_loss(value: Any, where: str) -> PathLossModel:
    if not isinstance(value, dict):
        raise ConfigError(where, "must be an object")
    return _construct(PathLossModel, _field_values(PathLossModel, value, where), where)


def radio_from(section: dict[str, Any], where: str = "radio") -> RadioEnvironment:
    values = _field_values(
        RadioEnvironment, section, where, {"pl_inter": ("pl_inter", _path_loss), "pl_intra": ("pl_intra", _path_loss)}
    )
    return _construct(RadioEnvironment, values, where)


def power_from(section: dict[str, Any], base: PowerProfile | None = None, where: str = "power") -> PowerProfile:
    base = base or PowerProfile()
    values = {f.name: getattr(base, f.name) for f in fields(PowerProfile)}
    values.update(_field_values(PowerProfile, section, where))
    return _construct(PowerProfile, values, where)


def traffic_from(section: dict[str, Any], where: str = "traffic") -> TrafficProfile:
    return _construct(TrafficProfile, _field_values(TrafficProfile, section, where), where)


def cluster_from(section: dict[str, Any], where: str = "cluster") -> ClusterModel:
    return _construct(ClusterModel, _field_values(ClusterModel, section, where), where)


def _sweep_values(value: Any, where: str) -> list[float]:
    """A list of numbers, or ``{"start", "stop", "num"}`` for an inclusive linear grid."""
    if isinstance(value, list):
        return [float(_number(v, f"{where}[{k}]")) for k, v in enumerate(value)]
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "num"}
        if extra:
            raise ConfigError(f"{where}.{sorted(extra)[0]}", "unknown key")
        try:
            start, stop, num = value["start"], value["stop"], value["num"]
        except KeyError as exc:
            raise ConfigError(f"{where}.{exc.args[0]}", "missing") from exc
        if isinstance(num, bool) or not isinstance(num, int) or num < 0:
            raise ConfigError(f"{where}.num", "must be a nonnegative integer")
        return np.linspace(_number(start, f"{where}.start"), _number(stop, f"{where}.stop"), num).tolist()
    raise ConfigError(where, "must be a list or a {start, stop, num} object")


def csma_from(section: dict[str, Any], where: str = "csma") -> tuple[CsmaParams, list[float], list[int]]:
    """Contention parameters plus the sweep grid (loads ``g`` and phase counts ``n``)."""
    section = dict(section)
    sweep = section.pop("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError(f"{where}.sweep", "must be an object")
    params = _construct(CsmaParams, _field_values(CsmaParams, section, where), where)
    extra = set(sweep) - {"g", "g_tau", "n"}
    if extra:
        raise ConfigError(f"{where}.sweep.{sorted(extra)[0]}", "unknown key")
    if "g" in sweep and "g_tau" in sweep:
        raise ConfigError(f"{where}.sweep.g_tau", "give either g or g_tau, not both")
    if "g" in sweep:
        loads = _sweep_values(sweep["g"], f"{where}.sweep.g")
    elif "g_tau" in sweep:
        loads = [x / params.tau_p for x in _sweep_values(sweep["g_tau"], f"{where}.sweep.g_tau")]
    else:
        loads = np.linspace(0.0, 20.0 / params.big_t, 201).tolist()
    phases_raw = sweep.get("n", [params.n])
    if not isinstance(phases_raw, list) or not all(
        isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in phases_raw
    ):
        raise ConfigError(f"{where}.sweep.n", "must be a list of integers >= 1")
    if any(g < 0 for g in loads):
        raise ConfigError(f"{where}.sweep.g", "loads must be nonnegative")
    return params, loads, list(phases_raw)


_REGION_POWER = PowerProfile(e_s=1e-3, e_s_h=2e-3)


def feasibility_from(cfg: LoadedConfig, where: str = "feasibility") -> FeasibilityInputs:
    """Region inputs; ``static_margin`` (J) sets the direct-mode static energy.

    Defaults describe a 10-device region of radius 50 m at 250 m from the BS
    with 20 dB SNR targets, 1 and 2 mJ member and CH static energies, a 16 mJ
    static margin and 1 KB payloads.
    """
    section = dict(cfg.section(where))
    margin = section.pop("static_margin", 0.016)
    payload = section.pop("payload_bits", 8192.0)
    values = _field_values(
        FeasibilityInputs,
        section,
        where,
        {
            "power": ("power", lambda v, w: power_from(v, _REGION_POWER, where=w)),
            "traffic": ("traffic", lambda v, w: traffic_from(v, where=w)),
            "radio": ("env", lambda v, w: radio_from(v, where=w)),
        },
    )
    values.setdefault("power", _REGION_POWER)
    if "env" not in values:
        values["env"] = radio_from({"w_m": 360e3, "w_h": 144e3}, where)
    for key, default in (("n", 10), ("r", 50.0), ("big_r", 250.0), ("s_h", 100.0), ("s_b", 100.0)):
        values.setdefault(key, default)
    if isinstance(values["n"], float):
        if not values["n"].is_integer():
            raise ConfigError(f"{where}.n", "must be an integer")
        values["n"] = int(values["n"])
    inp = _construct(FeasibilityInputs, values, where)
    if margin is not None:
        inp = inp.with_static_margin(_number(margin, f"{where}.static_margin"))
    bits = _number(payload, f"{where}.payload_bits")
    if bits <= 0:
        raise ConfigError(f"{where}.payload_bits", "must be positive")
    return inp.with_payload(bits)


def scenario_from(cfg: LoadedConfig, where: str = "scenario") -> tuple[CellScenario, int, int, list[int]]:
    """Cell scenario, search bounds ``[z_min, z_max]`` and the reported sizes."""
    section = dict(cfg.section(where))
    z_min = section.pop("z_min", 2)
    z_max = section.pop("z_max", 1000)
    report = section.pop("report_z", [10, 50, 100, 500, 1000])
    for name, v in (("z_min", z_min), ("z_max", z_max)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"{where}.{name}", "must be a positive integer")
    if z_min > z_max:
        raise ConfigError(f"{where}.z_max", "must be >= z_min")
    if not isinstance(report, list) or not all(isinstance(z, int) and not isinstance(z, bool) and z >= 1 for z in report):
        raise ConfigError(f"{where}.report_z", "must be a list of positive integers")
    values = _field_values(
        CellScenario,
        section,
        where,
        {
            "power": ("power", lambda v, w: power_from(v, CellScenario().power, where=w)),
            "radio": ("env", lambda v, w: radio_from(v, where=w)),
        },
    )
    if isinstance(values.get("n_t"), float):
        values["n_t"] = int(values["n_t"])
    if isinstance(values.get("n_phases"), float):
        values["n_phases"] = int(values["n_phases"])
    return _construct(CellScenario, values, where), z_min, z_max, report


_INT_SIM_FIELDS = {"n_phases", "n_t", "n_bunches", "z_cap", "k_m", "n_preambles", "rach_backoff", "max_cycles",
                   "trace_every", "seed"}


def sim_from(cfg: LoadedConfig, where: str = "sim", **overrides) -> SimConfig:
    """Simulator configuration; ``preset`` is ``"desk"`` (default) or ``"table"``."""
    section = dict(cfg.section(where))
    preset = section.pop("preset", "desk")
    if preset not in ("desk", "table"):
        raise ConfigError(f"{where}.preset", "must be 'desk' or 'table'")
    section.pop("seeds", None)
    section.pop("variants", None)
    base = desk_config() if preset == "desk" else SimConfig()
    values = _field_values(
        SimConfig,
        section,
        where,
        {
            "power": ("power", lambda v, w: power_from(v, base.power, where=w)),
            "radio": ("env", lambda v, w: radio_from(v, where=w)),
        },
    )
    for name in _INT_SIM_FIELDS & set(values):
        v = values[name]
        if isinstance(v, float):
            if not v.is_integer():
                raise ConfigError(f"{where}.{name}", "must be an integer")
            values[name] = int(v)
    per = values.get("ch_reselect_period")
    if isinstance(per, float) and per.is_integer():
        values["ch_reselect_period"] = int(per)
    values.update({k: v for k, v in overrides.items() if v is not None})
    merged = {f.name: getattr(base, f.name) for f in fields(SimConfig)}
    merged.update(values)
    return _construct(SimConfig, merged, where)


def sim_seeds(cfg: LoadedConfig, where: str = "sim") -> list[int] | None:
    seeds = cfg.section(where).get("seeds")
    if seeds is None:
        return None
    if not isinstance(seeds, list) or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds):
        raise ConfigError(f"{where}.seeds", "must be a list of nonnegative integers")
    return seeds


def sim_variants(cfg: LoadedConfig, where: str = "sim") -> list[dict[str, Any]] | None:
    """Optional list of per-variant overrides for ``sweep`` (each a ``sim``-style object)."""
    variants = cfg.section(where).get("variants")
    if variants is None:
        return None
    if not isinstance(variants, list) or not all(isinstance(v, dict) for v in variants):
        raise ConfigError(f"{where}.variants", "must be a list of objects")
    return variants


def dataclass_dict(obj: Any) -> Any:
    """JSON-friendly view of a (nested) dataclass, for manifests."""
    if is_dataclass(obj):
        return {f.name: dataclass_dict(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [dataclass_dict(v) for v in obj]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


__all__ = [
    "ConfigError",
    "LoadedConfig",
    "SECTIONS",
    "cluster_from",
    "csma_from",
    "dataclass_dict",
    "feasibility_from",
    "load_config",
    "power_from",
    "radio_from",
    "scenario_from",
    "sim_from",
    "sim_seeds",
    "sim_variants",
    "traffic_from",
]
