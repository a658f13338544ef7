"""Frame-based precoding for multibeam satellite forward links.

Channel generation, MMSE and max-min fair multigroup multicast precoders,
DVB-S2 rate accounting and a Monte Carlo harness driven by :mod:`satprecoding.cli`.
"""

from .acm import ModcodTable, RateReport, default_modcod_table, frame_rate, rate_report, spectral_efficiency
from .channel import (
    BeamPattern,
    ChannelMatrix,
    GroupSchedule,
    LinkBudgetParams,
    generate_channel,
    hexagonal_cluster,
    slice_equivalent_channels,
)
from .config import SimConfig
from .errors import ConfigurationError, DomainError, NumericalRankError, ScheduleError, SolverError
from .maxmin import FairnessProblem, SolverConfig, SolverReport, solve_maxmin_fair
from .precoding import four_color_baseline, mmse_precoder, mmse_rescaled, sinr
from .sim import SweepResult, emit_reports, run_power_sweep, run_rho_sweep

__version__ = "0.1.0"

__all__ = [
    "BeamPattern",
    "ChannelMatrix",
    "ConfigurationError",
    "DomainError",
    "FairnessProblem",
    "GroupSchedule",
    "LinkBudgetParams",
    "ModcodTable",
    "NumericalRankError",
    "RateReport",
    "ScheduleError",
    "SimConfig",
    "SolverConfig",
    "SolverError",
    "SolverReport",
    "SweepResult",
    "default_modcod_table",
    "emit_reports",
    "four_color_baseline",
    "frame_rate",
    "generate_channel",
    "hexagonal_cluster",
    "mmse_precoder",
    "mmse_rescaled",
    "rate_report",
    "run_power_sweep",
    "run_rho_sweep",
    "sinr",
    "slice_equivalent_channels",
    "solve_maxmin_fair",
    "spectral_efficiency",
]
