"""Command-line entry point: ``satprecoding <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .channel import generate_channel
from .config import STRATEGIES, SimConfig
from .csvio import format_complex_rows
from .errors import ConfigurationError, SolverError
from .maxmin import FairnessProblem, SolverConfig, solve_maxmin_fair
from .sim import RANDOMIZATION_KEY, emit_reports, run_power_sweep, run_rho_sweep

log = logging.getLogger("satprecoding")


def _strategies(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in STRATEGIES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"strategies must be a comma list from {','.join(STRATEGIES)}")
    return names


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="satprecoding", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML configuration file")
    common.add_argument("--seed", type=int, help="override the master seed")

    for name, helptext in (("power-sweep", "sweep on-board power"), ("rho-sweep", "sweep users per frame")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--out", type=Path, help="output directory (default: config output_dir)")
        s.add_argument("--strategies", type=_strategies, help="comma list of strategies")
        s.add_argument("--runs", type=int, help="override n_runs")
        s.add_argument("--jobs", type=int, default=1, help="worker processes")

    s = sub.add_parser("solve-one", parents=[common], help="solve one max-min fair instance")
    s.add_argument("--rho", type=int, help="users per frame (default: config rho)")
    s.add_argument("--power", type=float, help="on-board power in dBW")
    s.add_argument("--out", type=Path, help="write the report here instead of stdout")

    s = sub.add_parser("gen-channel", parents=[common], help="export one channel realisation")
    s.add_argument("--rho", type=int, help="users per frame (default: config rho)")
    s.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    return p


def _load(args) -> SimConfig:
    cfg = SimConfig.load(args.config) if args.config else SimConfig()
    cfg = cfg.with_overrides(seed=args.seed)
    if getattr(args, "strategies", None):
        cfg = cfg.with_overrides(strategies=args.strategies)
    if getattr(args, "runs", None) is not None:
        if args.runs < 1:
            raise ConfigurationError("--runs must be >= 1")
        cfg = cfg.with_overrides(n_runs=args.runs)
    if getattr(args, "rho", None) is not None:
        cfg = cfg.with_overrides(rho=args.rho)
    if getattr(args, "power", None) is not None:
        cfg = replace(cfg, link=replace(cfg.link, onboard_power=args.power))
    return cfg


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            out.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc}") from exc


def _instance(cfg: SimConfig):
    seed = [int(cfg.seed), 0]
    pattern = cfg.pattern()
    drop, channel, sched = generate_channel(pattern, cfg.link, cfg.rho, seed)
    return pattern, seed, channel, sched


def _run(args) -> int:
    cfg = _load(args)
    if args.command in ("power-sweep", "rho-sweep"):
        sweep = run_power_sweep if args.command == "power-sweep" else run_rho_sweep
        result = sweep(cfg, jobs=max(1, args.jobs))
        paths = emit_reports(result, args.out or Path(cfg.output_dir), cfg)
        for path in paths.values():
            print(path)
        failed = sum(r.failed for r in result.records)
        if failed:
            print(f"{failed} strategy runs failed and were excluded", file=sys.stderr)
        return 0

    pattern, seed, channel, sched = _instance(cfg)
    if args.command == "gen-channel":
        header = [
            f"# rows={channel.n_users} cols={channel.n_antennas} rho={cfg.rho} seed={cfg.seed}",
            "# assignment=" + ",".join(str(int(k)) for k in sched.assignment),
        ]
        _emit("\n".join(header + format_complex_rows(channel.H)) + "\n", args.out)
        return 0

    budget = cfg.link.per_antenna_budget(pattern.n_beams)
    prob = FairnessProblem(channel.H, sched, cfg.gamma, budget, 1.0)
    solver = SolverConfig(eps_bisect=cfg.eps_bisect, n_rand=cfg.n_rand, seed=[*seed, RANDOMIZATION_KEY])
    _emit(solve_maxmin_fair(prob, solver).to_text(), args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"solver error in {exc.stage}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
