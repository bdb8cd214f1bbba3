"""Command-line entry point: ``nmwitness {scan,intervals,fig1,check}``."""
import argparse
import logging
import math
import sys

from . import checks
from .errors import ConfigError, ParameterError
from .generators import DELTA
from .report import ScanConfig, compare_scan, fig1_report, run_scan

EXIT_OK, EXIT_DISAGREE, EXIT_USAGE = 0, 1, 2


def _add_scan_options(p, gamma_default=0.0, criterion=True):
    if criterion:
        p.add_argument("--criterion", choices=["blp", "rhp", "ach", "all"], default="all")
    p.add_argument("--gamma", type=float, default=gamma_default, help="dimensionless decay rate")
    p.add_argument("--tau-max", type=float, default=math.pi)
    p.add_argument("--steps", type=int, default=800)
    p.add_argument("--delta", type=float, default=DELTA, help="exclusion radius around tan(2 tau) poles")
    p.add_argument("--seed", type=int, default=0, help="seed for the random BLP state pairs")
    p.add_argument("--out", default=None, help="CSV output path (stdout when omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmwitness",
        description="Non-Markovianity witnesses for a qubit under random external fields.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_scan_options(sub.add_parser("scan", help="evaluate witnesses on a tau grid and write CSV"))
    _add_scan_options(sub.add_parser("intervals", help="print detected non-Markovian intervals"))
    _add_scan_options(
        sub.add_parser("fig1", help="RHP g versus ACH f for the damped model"),
        gamma_default=3.0,
        criterion=False,
    )
    sub.add_parser("check", help="run the invariant suites")
    return parser


def _config(args) -> ScanConfig:
    return ScanConfig(
        criterion=args.criterion,
        gamma=args.gamma,
        tau_max=args.tau_max,
        steps=args.steps,
        delta=args.delta,
        seed=args.seed,
        out=args.out,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    try:
        if args.command == "scan":
            result = run_scan(_config(args))
            if not args.out:
                sys.stdout.write(result.csv)
            return EXIT_OK

        if args.command == "intervals":
            config = _config(args)
            result = run_scan(config)
            report = compare_scan(result, config)
            print(report.summary())
            return EXIT_OK if report.agree else EXIT_DISAGREE

        if args.command == "fig1":
            text, report = fig1_report(args.gamma, args.tau_max, args.steps, args.delta, args.out)
            if args.out:
                print(report.summary())
            else:
                sys.stdout.write(text)
                print(report.summary(), file=sys.stderr)
            return EXIT_OK if report.agree else EXIT_DISAGREE

        results = checks.run_all()
        for r in results:
            print(r.line())
        return EXIT_OK if all(r.passed for r in results) else EXIT_DISAGREE

    except (ConfigError, ParameterError) as exc:
        print(f"nmwitness: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"nmwitness: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
