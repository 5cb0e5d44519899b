"""Command-line front end.

Subcommands: run (config-driven sweep), sweep (flag-driven sweep),
validate (built-in check suite), plotdata (re-derive plot CSVs from an
aggregate file).  Exit codes: 0 success, 1 validation failure, 2 config
or usage error.  STARSIM_THREADS caps worker processes.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (
    ConfigError,
    SweepConfig,
    default_config,
    emit_plot_data,
    load_config,
    read_aggregate_csv,
    resolve_workers,
    run_sweep,
    write_outputs,
)
from .model import Protocol
from .validation import validate


def _parse_elements(spec: str) -> tuple[int, ...]:
    """'a:b:step' inclusive range, or a single element count."""
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ConfigError(f"--elements expects a:b:step, got {spec!r}")
            a, b, step = (int(p) for p in parts)
            if step <= 0 or b < a:
                raise ConfigError(f"bad element range {spec!r}")
            return tuple(range(a, b + 1, step))
        return (int(spec),)
    except ValueError as exc:
        raise ConfigError(f"bad --elements value {spec!r}: {exc}") from exc


def _parse_protocols(spec: str) -> tuple[Protocol, ...]:
    try:
        return tuple(Protocol(p.strip()) for p in spec.split(","))
    except ValueError as exc:
        raise ConfigError(f"unknown protocol in {spec!r}: {exc}") from exc


def _run_and_write(config: SweepConfig, out_dir: str) -> int:
    records, aggregates = run_sweep(config, max_workers=resolve_workers())
    write_outputs(records, aggregates, out_dir)
    infeasible = sum(1 for r in records if not r.feasible)
    print(f"{len(records)} trial records -> {out_dir} ({infeasible} infeasible)")
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config)
    out = args.out if args.out else config.out_dir
    return _run_and_write(config, out)


def _cmd_sweep(args) -> int:
    config = load_config(args.config) if args.config else default_config()
    overrides = {}
    if args.elements:
        overrides["element_counts"] = _parse_elements(args.elements)
    if args.protocols:
        overrides["protocols"] = _parse_protocols(args.protocols)
    if args.scenario:
        overrides["scenarios"] = (
            ("unicast", "multicast") if args.scenario == "both" else (args.scenario,)
        )
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out:
        overrides["out_dir"] = args.out
    # replace() re-runs the dataclass validation, so bad flag combinations
    # (odd element counts with the fixed split, unknown scenarios) fail fast
    config = replace(config, **overrides) if overrides else config
    return _run_and_write(config, config.out_dir)


def _cmd_validate(args) -> int:
    report = validate(oracle_channels=args.oracle_channels)
    print(report.table())
    return 0 if report.ok else 1


def _cmd_plotdata(args) -> int:
    in_dir = Path(args.in_dir)
    aggregates = read_aggregate_csv(in_dir / "aggregate.csv")
    paths = emit_plot_data(aggregates, in_dir)
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="starsim",
        description="Transmit-power-minimization experiments for a "
                    "simultaneously transmitting and reflecting surface.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a sweep from flags")
    p_sweep.add_argument("--config", default=None, help="optional base config")
    p_sweep.add_argument("--elements", default=None, help="a:b:step or a single count")
    p_sweep.add_argument("--protocols", default=None,
                         help="comma list: es,ms,ts,conventional,omni")
    p_sweep.add_argument("--scenario", choices=("unicast", "multicast", "both"),
                         default=None)
    p_sweep.add_argument("--trials", type=int, default=None)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate", help="run the built-in check suite")
    p_val.add_argument("--oracle-channels", type=int, default=100)
    p_val.set_defaults(func=_cmd_validate)

    p_plot = sub.add_parser("plotdata", help="emit plot CSVs from aggregates")
    p_plot.add_argument("--in", dest="in_dir", required=True)
    p_plot.set_defaults(func=_cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
