"""Monte Carlo sweeps over on-board power and users per frame.

Seeding rule: run ``r`` of a sweep under master seed ``s`` draws its users
from ``SeedSequence([s, r], spawn_key=(k, i))`` for user ``i`` of beam ``k``,
its phases from ``[s, r, 0x9E37]`` and its Gaussian randomizations from
``[s, r, 1]``.  The axis value is deliberately absent from the key, so every
power level sees the same drop and a larger ``rho`` only adds users to the
smaller drops.  Every (axis value, run) pair is independent of execution
order, and all strategies at that pair consume the same channel matrix.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .acm import ModcodTable, RateReport, ThroughputSummary, beam_throughput, rate_report
from .channel import ChannelMatrix, GroupSchedule, generate_channel, slice_equivalent_channels
from .config import SimConfig
from .errors import NumericalRankError, SolverError
from .maxmin import FairnessProblem, SolverConfig, solve_maxmin_fair
from .precoding import four_color_baseline, four_coloring, mmse_rescaled, per_antenna_power, sinr

log = logging.getLogger(__name__)

PHASE_KEY = 0x9E37
RANDOMIZATION_KEY = 1
# a color occupies a quarter of the band, so it collects a quarter of the noise
SUBBAND_NOISE = 0.25


@dataclass
class RunRecord:
    axis_value: float
    run: int
    strategy: str
    assignment: np.ndarray
    report: RateReport | None = None
    error: str = ""
    pac_excess: float = -math.inf
    t_achieved: float = math.nan

    @property
    def failed(self) -> bool:
        return self.report is None


@dataclass
class SweepResult:
    axis_name: str
    axis_values: tuple
    strategies: tuple[str, ...]
    n_runs: int
    records: list[RunRecord] = field(default_factory=list)

    def select(self, strategy: str, axis_value) -> list[RunRecord]:
        return [r for r in self.records if r.strategy == strategy and r.axis_value == axis_value]

    def n_failed(self, strategy: str, axis_value) -> int:
        return sum(r.failed for r in self.select(strategy, axis_value))

    def summary(self, strategy: str, axis_value) -> ThroughputSummary | None:
        reports = [r.report for r in self.select(strategy, axis_value) if not r.failed]
        return beam_throughput(reports) if reports else None

    def mean_throughput(self, strategy: str, axis_value) -> float:
        s = self.summary(strategy, axis_value)
        return s.mean_beam_throughput if s else math.nan

    def unavailability(self, strategy: str, axis_value) -> float:
        s = self.summary(strategy, axis_value)
        return s.unavailability_pct if s else math.nan

    def sort(self) -> None:
        order = {s: i for i, s in enumerate(self.strategies)}
        self.records.sort(key=lambda r: (self.axis_values.index(r.axis_value), order[r.strategy], r.run))


def evaluate_strategies(
    channel: ChannelMatrix,
    sched: GroupSchedule,
    budget: np.ndarray,
    cfg: SimConfig,
    table: ModcodTable,
    coloring: np.ndarray,
    solver_seed,
) -> dict[str, tuple[RateReport | None, str, float, float]]:
    """Run every configured strategy on one realisation.

    Returns ``strategy -> (report, error, pac_excess, t_achieved)``; a failed
    strategy has ``report=None`` and a non-empty error.
    """
    link = cfg.link
    out = {}
    for strategy in cfg.strategies:
        t = math.nan
        try:
            if strategy == "four_color":
                base = four_color_baseline(channel.H, sched, budget, coloring, noise=SUBBAND_NOISE)
                W = np.diag(np.sqrt(budget))
                s, fraction = base.sinr, base.bandwidth_fraction
            elif strategy == "mmse_rescaled":
                W = mmse_rescaled(slice_equivalent_channels(channel.H, sched), budget)
                s, fraction = sinr(channel.H, W, sched), 1.0
            else:
                prob = FairnessProblem(channel.H, sched, cfg.gamma, budget, 1.0)
                solver = SolverConfig(eps_bisect=cfg.eps_bisect, n_rand=cfg.n_rand, seed=solver_seed)
                rep = solve_maxmin_fair(prob, solver)
                W, t = rep.W, rep.t_achieved
                s, fraction = sinr(channel.H, W, sched), 1.0
        except (SolverError, NumericalRankError) as exc:
            log.warning("%s failed: %s", strategy, exc)
            out[strategy] = (None, f"{type(exc).__name__}: {exc}", -math.inf, t)
            continue
        excess = float(np.max(per_antenna_power(W) - budget))
        report = rate_report(s, sched, table, link.user_bandwidth, link.rolloff, fraction)
        out[strategy] = (report, "", excess, t)
    return out


def _run_one(cfg: SimConfig, axis: str, value, run: int) -> list[RunRecord]:
    if axis == "power_dbw":
        cfg = replace(cfg, link=replace(cfg.link, onboard_power=float(value)))
        rho = cfg.rho
    else:
        rho = int(value)
    pattern = cfg.pattern()
    seed = [int(cfg.seed), run]
    _, channel, sched = generate_channel(pattern, cfg.link, rho, seed)
    budget = cfg.link.per_antenna_budget(pattern.n_beams)
    coloring = four_coloring(pattern.beam_centers)
    results = evaluate_strategies(
        channel, sched, budget, cfg, cfg.modcod(), coloring, [*seed, RANDOMIZATION_KEY]
    )
    return [
        RunRecord(value, run, name, sched.assignment, rep, err, excess, t)
        for name, (rep, err, excess, t) in results.items()
    ]


def _sweep(cfg: SimConfig, axis: str, values, jobs: int) -> SweepResult:
    result = SweepResult(axis, tuple(values), tuple(cfg.strategies), cfg.n_runs)
    tasks = [(cfg, axis, v, r) for v in values for r in range(cfg.n_runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = pool.map(_run_one, *zip(*tasks))
            for chunk in chunks:
                result.records.extend(chunk)
    else:
        for task in tasks:
            result.records.extend(_run_one(*task))
    result.sort()
    return result


def run_power_sweep(cfg: SimConfig, jobs: int = 1) -> SweepResult:
    """Per-beam throughput against on-board power at ``cfg.rho`` users per frame."""
    return _sweep(cfg, "power_dbw", [float(p) for p in cfg.power_sweep], jobs)


def run_rho_sweep(cfg: SimConfig, jobs: int = 1) -> SweepResult:
    """Per-beam throughput against users per frame at ``cfg.link.onboard_power``."""
    return _sweep(cfg, "rho", [int(r) for r in cfg.rho_list], jobs)


SWEEP_HEADER = ["axis", "value", "strategy", "mean_beam_throughput_bps", "unavailability_pct", "n_runs", "n_failed"]
BEAM_HEADER = ["axis", "value", "strategy", "beam", "mean_throughput_bps"]
RATE_HEADER = ["axis", "value", "strategy", "run", "user", "beam", "sinr_db", "rate_bps", "unavailable", "status"]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else repr(float(x))
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _sweep_rows(result: SweepResult):
    for value in result.axis_values:
        for strategy in result.strategies:
            recs = result.select(strategy, value)
            if not recs:
                continue
            yield (
                result.axis_name, value, strategy,
                result.mean_throughput(strategy, value),
                result.unavailability(strategy, value),
                len(recs), sum(r.failed for r in recs),
            )


def _beam_rows(result: SweepResult):
    for value in result.axis_values:
        for strategy in result.strategies:
            s = result.summary(strategy, value)
            if s is None:
                continue
            for k, mean in enumerate(s.per_beam_mean):
                yield result.axis_name, value, strategy, k, float(mean)


def _rate_rows(result: SweepResult):
    for r in result.records:
        for i, beam in enumerate(r.assignment):
            if r.failed:
                yield result.axis_name, r.axis_value, r.strategy, r.run, i, int(beam), "", "", "", "failed"
            else:
                rep = r.report
                yield (
                    result.axis_name, r.axis_value, r.strategy, r.run, i, int(beam),
                    float(rep.per_user_sinr_db[i]), float(rep.per_user_rate[i]),
                    int(rep.unavailability_mask[i]), "ok",
                )


def emit_reports(result: SweepResult, out_dir, cfg: SimConfig) -> dict[str, Path]:
    """Write the sweep summary, per-beam means, per-user rates and a manifest.

    ``<axis>_sweep.csv`` has one row per (axis value, strategy);
    ``<axis>_rates.csv`` one row per user, run, axis value and strategy.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    stem = result.axis_name
    paths = {
        "sweep": out / f"{stem}_sweep.csv",
        "beams": out / f"{stem}_beams.csv",
        "rates": out / f"{stem}_rates.csv",
        "manifest": out / f"{stem}_manifest.json",
    }
    _write_csv(paths["sweep"], SWEEP_HEADER, _sweep_rows(result))
    _write_csv(paths["beams"], BEAM_HEADER, _beam_rows(result))
    _write_csv(paths["rates"], RATE_HEADER, _rate_rows(result))
    manifest = {
        "axis": result.axis_name,
        "axis_values": list(result.axis_values),
        "strategies": list(result.strategies),
        "n_runs": result.n_runs,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "failed_runs": {
            s: {_fmt(v): result.n_failed(s, v) for v in result.axis_values} for s in result.strategies
        },
        "files": {k: p.name for k, p in paths.items() if k != "manifest"},
    }
    try:
        paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True, default=list) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {paths['manifest']}: {exc}") from exc
    return paths
