"""Command-line entry point.

Exit codes: 0 success, 1 invariant or assertion failure, 2 configuration
error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import sys

from .checks import run_checks
from .dynamics import BlowUpError
from .experiments import (
    ConfigError,
    ExperimentConfig,
    no_travel_experiment,
    run_single,
    viscosity_sweep,
)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddns2d",
        description="Damped, driven 2D vorticity simulations and their"
                    " long-time statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("config", help="YAML experiment configuration")
        else:
            p.add_argument("config", nargs="?", default=None)
        p.add_argument("--output-dir", default=None,
                       help="override the config output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--observer-stride", type=int, default=None,
                       help="steps between diagnostic samples")

    p = sub.add_parser("simulate", help="run one trajectory")
    common(p)
    p = sub.add_parser("sweep", help="run the viscosity sweep")
    common(p)
    p.add_argument("--workers", type=int, default=1,
                   help="concurrent sweep members")
    p = sub.add_parser("no-travel", help="track enstrophy mass outside"
                                         " balls on an enlarged torus")
    common(p)
    p.add_argument("--threshold", type=float, default=0.05)
    p = sub.add_parser("check", help="run the invariant suite")
    common(p, config_required=False)
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config)
    return config.override(
        seed=args.seed,
        observer_stride=args.observer_stride,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "check":
            if args.config is not None:
                _load_config(args)  # validate only
            return run_checks()
        config = _load_config(args)
        if args.command == "simulate":
            report, csv_path = run_single(config, args.output_dir)
            print(f"time series: {csv_path}")
            print(f"mean enstrophy      {report.mean_enstrophy:.6g}")
            print(f"dissipation rate    {report.dissipation_rate:.6g}")
            print(f"balance gap         {report.balance_gap:.6g}")
            print(f"telescoping slack   {report.telescoping_slack:.6g}")
            if not report.gineq_satisfied:
                print("dissipation inequality violated", file=sys.stderr)
                return EXIT_INVARIANT
            bad = [n for n, r in report.stationarity.items()
                   if not r.consistent]
            if bad:
                print(f"stationarity defect out of tolerance: {bad}",
                      file=sys.stderr)
                return EXIT_INVARIANT
            return EXIT_OK
        if args.command == "sweep":
            result = viscosity_sweep(config, args.output_dir,
                                     workers=args.workers)
            print(f"sweep CSV: {result.csv_path}")
            for nu in result.nus:
                if nu in result.failures:
                    print(f"  nu={nu:<10g} FAILED: {result.failures[nu]}")
                else:
                    print(f"  nu={nu:<10g} eps={result.dissipation[nu]:.6g}"
                          f" gap={result.balance_gap[nu]:+.6g}")
            if result.failures:
                return EXIT_INVARIANT
            trend = result.trend()
            print(f"pairwise decreasing: {trend['pairwise_decreasing']}"
                  f"  final/initial: {trend['final_over_initial']:.3f}")
            return EXIT_OK
        if args.command == "no-travel":
            result = no_travel_experiment(config, args.output_dir,
                                          threshold=args.threshold)
            for r in result.radii:
                print(f"  R={r:<10.4g} max Y_R/enstrophy ="
                      f" {result.max_fraction[r]:.3e}")
            if not result.ok:
                print("enstrophy mass escaped the largest ball",
                      file=sys.stderr)
                return EXIT_INVARIANT
            return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
