"""Command-line entry point: ``entpump bell|ghz|run|table2``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, kernels
from .experiments import ConfigError, ExperimentConfig, run_experiment, sweep, uniform_grid, write_report
from .tables import family, render_ghz_table_markdown


def _bits(text: str) -> tuple[int, ...]:
    text = text.replace(",", "").strip()
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"expected a bitstring such as 01, got {text!r}")
    return tuple(int(c) for c in text)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _param(text: str) -> tuple[str, object]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return key.strip(), json.loads(value)


def _add_sweep_args(sub: argparse.ArgumentParser, system: str) -> None:
    fam = family(system)
    sub.add_argument("--ancilla", type=_bits, default=None, help="one ancilla bit per map, e.g. 01 (default all 0)")
    sub.add_argument(
        "--maps",
        default=",".join(fam.map_names),
        help=f"comma-separated maps in application order (default {','.join(fam.map_names)})",
    )
    grid = sub.add_mutually_exclusive_group()
    grid.add_argument("--p-steps", type=int, default=None, help="uniform grid points on [0, 1] (default 21)")
    grid.add_argument("--p-list", type=_floats, default=None, help="explicit comma-separated p values")
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument("--shots", type=int, default=None, help="shots per basis-state circuit")
    mode.add_argument("--exact", action="store_true", help="exact populations (default)")
    sub.add_argument("--noise", default="ideal", help="noise preset: ideal or hardware-like")
    sub.add_argument(
        "--noise-param", type=_param, action="append", default=[], metavar="NAME=VALUE",
        help="override one noise parameter (JSON value), e.g. depolarizing_2q=0.02",
    )
    sub.add_argument("--mitigate", action="store_true", help="apply readout-error mitigation")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None, help="output directory (default: print CSV to stdout)")
    sub.add_argument("--workers", type=int, default=1, help="threads for grid points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entpump", description="Dissipative Bell/GHZ state preparation sweeps")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    subs = parser.add_subparsers(dest="command", required=True)
    for system in ("bell", "ghz"):
        _add_sweep_args(subs.add_parser(system, help=f"sweep the {system} pump sequence over p"), system)
    run = subs.add_parser("run", help="run an experiment from a JSON config file")
    run.add_argument("config")
    run.add_argument("--out", default=None)
    run.add_argument("--workers", type=int, default=1)
    t2 = subs.add_parser("table2", help="derive the four-qubit ancilla-pattern table")
    t2.add_argument("--out", default=None)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    maps = tuple(m.strip() for m in args.maps.split(",") if m.strip())
    if args.p_list is not None:
        grid = args.p_list
    else:
        grid = uniform_grid(args.p_steps if args.p_steps is not None else 21)
    return ExperimentConfig(
        system=args.command,
        maps=maps,
        ancilla_bits=args.ancilla,
        p_grid=grid,
        shots=None if args.exact else args.shots,
        noise=args.noise,
        noise_params=dict(args.noise_param),
        mitigate=args.mitigate,
        seed=args.seed,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "table2":
            text = render_ghz_table_markdown()
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            return 0
        if args.workers < 1:
            raise ConfigError("workers", "must be at least 1")
        if args.command == "run":
            paths = run_experiment(args.config, args.out, workers=args.workers)
            for kind, path in paths.items():
                print(f"{kind}: {path}")
            return 0
        config = _config_from_args(args)
        curve = sweep(config, workers=args.workers)
        if args.out:
            for kind, path in write_report(config, curve, args.out, args.workers).items():
                print(f"{kind}: {path}")
        else:
            sys.stdout.write(curve.to_csv())
        return 0
    except ConfigError as exc:
        print(f"entpump: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"entpump: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
