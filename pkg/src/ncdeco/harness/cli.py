"""Command-line entry point: ``ncdeco {run,sweep,reveal,selftest}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..selftest import run_selftest
from .config import ConfigError, OutputConfig, ScenarioConfig, load_config
from .io import emit_results, format_tau
from .presets import PRESETS, SWEEP_FIELDS
from .scenarios import ScenarioError, run_nc_reveal, run_scenario, run_sweep


def _config(args: argparse.Namespace, default_preset: str) -> ScenarioConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = PRESETS[args.preset or default_preset]()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if args.out is not None:
        cfg = cfg.replace(output=OutputConfig(dir=args.out, name=cfg.output.name))
    return cfg


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_run(args) -> int:
    cfg = _config(args, "coordinate")
    report = run_scenario(cfg)
    paths = emit_results(report, cfg.output.dir, cfg.output.name)
    for b in cfg.diagnostics.bases:
        print(f"tau_D[{b}] = {format_tau(report.tau(b))}")
    print(f"horizon {report.horizon:g}, {len(report.trace)} snapshots, {report.wall_time:.1f} s")
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args, "momentum")
    values = _floats(args.fields) if args.fields else list(SWEEP_FIELDS)
    result = run_sweep(cfg, values, workers=args.workers)
    paths = emit_results(result.reports, cfg.output.dir, cfg.output.name, sweep=result)
    for B, r in sorted(result.reports.items()):
        print(f"B={B:g}: tau_q={format_tau(r.tau('position'))} tau_k={format_tau(r.tau('momentum'))}")
    print(f"classification: {result.classification.value if result.classification else result.note}")
    print(f"crossover B*: {result.crossover if result.crossover is not None else 'none'}")
    print(f"wrote {len(paths)} files to {cfg.output.dir}")
    return 0


def cmd_reveal(args) -> int:
    cfg = _config(args, "reveal")
    thetas = _floats(args.thetas) if args.thetas else None
    report = run_nc_reveal(cfg, thetas, workers=args.workers)
    info = report.extras["reveal"]
    print(f"B = {info['B']!r}, c_qg = {info['c_qg']!r}, g-channel norm = {info['g_channel_norm']:.2e}")
    for t, tau in info["tau_q"].items():
        ratio = info["ratios"][t]
        print(f"theta={t:g}: tau_q={format_tau(tau)} ratio={'none' if ratio is None else f'{ratio:.4f}'}")
    paths = emit_results(report, cfg.output.dir, cfg.output.name)
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_selftest(args) -> int:
    return 0 if run_selftest() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncdeco", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="JSON scenario file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario when no --config is given")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int)

    p = sub.add_parser("run", help="single scenario")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="field sweep with regime classification")
    common(p)
    p.add_argument("--fields", help="comma-separated B values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reveal", help="run at B = 4/(e theta)")
    common(p)
    p.add_argument("--thetas", help="comma-separated theta values to compare")
    p.set_defaults(func=cmd_reveal)

    p = sub.add_parser("selftest", help="fast invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
