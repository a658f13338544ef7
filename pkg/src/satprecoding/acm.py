"""Adaptive coding and modulation: SINR to rate under the group-minimum rule.

Every frame carries one MODCOD, chosen for the weakest user of the frame's
group.  Users below the lowest MODCOD threshold are unavailable and pull the
frame they sit in down to zero rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import GroupSchedule, lin2db
from .errors import ConfigurationError


@dataclass(frozen=True)
class ModcodTable:
    thresholds_db: np.ndarray
    efficiencies: np.ndarray
    name: str = "custom"
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        th = np.asarray(self.thresholds_db, dtype=float)
        eff = np.asarray(self.efficiencies, dtype=float)
        object.__setattr__(self, "thresholds_db", th)
        object.__setattr__(self, "efficiencies", eff)
        if th.ndim != 1 or th.size == 0 or th.shape != eff.shape:
            raise ConfigurationError("MODCOD table needs matching non-empty threshold/efficiency lists")
        if np.any(np.diff(th) <= 0) or np.any(np.diff(eff) <= 0):
            raise ConfigurationError(f"MODCOD table {self.name!r} must be strictly increasing in both columns")
        if np.any(eff <= 0):
            raise ConfigurationError("spectral efficiencies must be positive")

    @property
    def min_threshold_db(self) -> float:
        return float(self.thresholds_db[0])

    @classmethod
    def parse(cls, text: str, name: str = "custom") -> ModcodTable:
        """Parse ``threshold_db, efficiency[, label]`` records; ``#`` starts a comment."""
        th, eff, labels = [], [], []
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            try:
                th.append(float(cells[0]))
                eff.append(float(cells[1]))
            except (IndexError, ValueError) as exc:
                raise ConfigurationError(f"{name}:{n}: expected 'threshold_db, efficiency'") from exc
            labels.append(cells[2] if len(cells) > 2 else "")
        return cls(np.array(th), np.array(eff), name=name, labels=tuple(labels))

    @classmethod
    def from_file(cls, path) -> ModcodTable:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read MODCOD table {path}: {exc}") from exc
        return cls.parse(text, name=path.stem)


def default_modcod_table() -> ModcodTable:
    """DVB-S2 thresholds and efficiencies shipped with the package."""
    text = resources.files("satprecoding").joinpath("data/dvbs2.csv").read_text()
    return ModcodTable.parse(text, name="dvbs2")


def spectral_efficiency(sinr_db, table: ModcodTable):
    """Efficiency of the best MODCOD whose threshold is at or below ``sinr_db``; 0 below all."""
    sinr_db = np.asarray(sinr_db, dtype=float)
    idx = np.searchsorted(table.thresholds_db, sinr_db, side="right") - 1
    eff = np.where(idx >= 0, table.efficiencies[np.clip(idx, 0, None)], 0.0)
    return eff if eff.ndim else float(eff)


def symbol_rate(bandwidth: float, rolloff: float, bandwidth_fraction: float = 1.0) -> float:
    return bandwidth * bandwidth_fraction / (1 + rolloff)


def frame_rate(
    group_sinrs_db: Sequence[float],
    table: ModcodTable,
    bandwidth: float,
    rolloff: float,
    bandwidth_fraction: float = 1.0,
) -> float:
    """Bit rate of one frame, set by the weakest member of its group."""
    group_sinrs_db = np.asarray(group_sinrs_db, dtype=float)
    if group_sinrs_db.size == 0:
        raise ValueError("a frame needs at least one user")
    eff = spectral_efficiency(group_sinrs_db.min(), table)
    return float(eff * symbol_rate(bandwidth, rolloff, bandwidth_fraction))


@dataclass(frozen=True)
class RateReport:
    per_user_sinr_db: np.ndarray
    per_frame_efficiency: np.ndarray
    per_beam_throughput: np.ndarray
    per_user_rate: np.ndarray
    unavailability_mask: np.ndarray


def rate_report(
    sinr_linear,
    sched: GroupSchedule,
    table: ModcodTable,
    bandwidth: float,
    rolloff: float,
    bandwidth_fraction: float = 1.0,
) -> RateReport:
    """Per-frame MODCOD and rates for one channel realisation.

    A user's rate is the rate of the frame it is served in; group ``k`` is
    the frame of beam ``k``.
    """
    sinr_db = lin2db(np.asarray(sinr_linear, dtype=float))
    group_min = np.array([sinr_db[g].min() for g in sched.groups])
    eff = np.asarray(spectral_efficiency(group_min, table), dtype=float)
    beam = eff * symbol_rate(bandwidth, rolloff, bandwidth_fraction)
    return RateReport(
        per_user_sinr_db=sinr_db,
        per_frame_efficiency=eff,
        per_beam_throughput=beam,
        per_user_rate=beam[sched.assignment],
        unavailability_mask=sinr_db < table.min_threshold_db,
    )


@dataclass(frozen=True)
class ThroughputSummary:
    per_beam_mean: np.ndarray
    user_rates: np.ndarray
    unavailability_pct: float

    @property
    def mean_beam_throughput(self) -> float:
        return float(self.per_beam_mean.mean())

    def rate_cdf(self) -> tuple[np.ndarray, np.ndarray]:
        """Empirical CDF of per-user rates as (sorted rates, cumulative probability)."""
        x = np.sort(self.user_rates)
        return x, np.arange(1, len(x) + 1) / len(x)


def beam_throughput(reports: Sequence[RateReport]) -> ThroughputSummary:
    """Average per-beam throughput and pooled user statistics over runs."""
    if len(reports) == 0:
        raise ValueError("at least one report is required")
    beams = np.stack([r.per_beam_throughput for r in reports])
    rates = np.concatenate([r.per_user_rate for r in reports])
    unavailable = np.concatenate([r.unavailability_mask for r in reports])
    return ThroughputSummary(
        per_beam_mean=beams.mean(axis=0),
        user_rates=rates,
        unavailability_pct=100.0 * float(unavailable.mean()),
    )
