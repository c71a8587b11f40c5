"""Discrete-event simulation of clustered and contention-based uplink access."""

from .config import VARIANTS, ConfigError, SimConfig, desk_config, table_config
from .engine import SimOutcome, Simulator, run_sim
from .report import COMPARE_COLUMNS, SUMMARY_COLUMNS, compare_variants, delay_cdf, lifetime_cdf, run_many, summary_row

__all__ = [
    "COMPARE_COLUMNS",
    "SUMMARY_COLUMNS",
    "VARIANTS",
    "ConfigError",
    "SimConfig",
    "SimOutcome",
    "Simulator",
    "compare_variants",
    "delay_cdf",
    "desk_config",
    "lifetime_cdf",
    "run_many",
    "run_sim",
    "summary_row",
    "table_config",
]
