"""Command-line entry point: ``python -m src.main <subcommand> [options]``.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime or numerical
failures.  Parsing lives here; the subcommands themselves are in
:mod:`src.app` so they can be imported by tests without side effects.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, NoReturn, Optional, Sequence, Tuple

from src.app import (
    cmd_estimate,
    cmd_phase_experiment,
    cmd_rate_experiment,
    cmd_simulate,
    cmd_sweep,
    cmd_verify,
    configure_logging,
    make_executor,
)
from src.data.weights import WeightScheme
from src.exceptions import FdaError
from src.experiment.config import ExperimentConfig, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(raw: str) -> Tuple[int, int]:
    try:
        j, k = (int(part) for part in raw.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'j,k', got {raw!r}") from exc
    return (j, k)


def _at_least(minimum: int) -> Callable[[str], int]:
    def parse(raw: str) -> int:
        try:
            value = int(raw)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from exc
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value

    return parse


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="experiment config file (key=value)")
    parser.add_argument("--out", type=Path, help="output directory (default: out_dir)")
    parser.add_argument("--threads", type=_at_least(1), help="worker threads")
    parser.add_argument(
        "--binned", action="store_true", default=None, help="use the binned smoother"
    )
    parser.add_argument(
        "--grid", type=_at_least(2), metavar="R", help="bins and grid points"
    )
    parser.add_argument(
        "--scheme", choices=[s.value for s in WeightScheme], help="subject weighting"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fda", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default=None, help="logging level (FDA_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    simulate = sub.add_parser("simulate", help="write a simulated long-format dataset")
    _common(simulate)
    simulate.add_argument("--truth", action="store_true", help="also write truth.csv")

    estimate = sub.add_parser("estimate", help="smooth means and covariances of a dataset")
    _common(estimate)
    estimate.add_argument("dataset", type=Path, help="long-format CSV (subject,var,u,y)")
    estimate.add_argument("--pair", type=_pair, action="append", dest="pairs", help="j,k")
    estimate.add_argument("--h-mean", type=float, help="mean bandwidth")
    estimate.add_argument("--h-cov", type=float, help="covariance bandwidth")
    estimate.add_argument(
        "--one-based", action="store_true", help="subject/var columns start at 1"
    )

    for name, text in (
        ("sweep", "MISE of every bandwidth on a simulated dataset"),
        ("phase-experiment", "p x T phase-transition study"),
        ("rate-experiment", "sparse-regime convergence rates in n"),
    ):
        _common(sub.add_parser(name, help=text))

    verify = sub.add_parser("verify", help="run the acceptance checks")
    verify.add_argument("--threads", type=_at_least(1), default=1, help="worker threads")
    verify.add_argument("--full", action="store_true", help="add the rate and phase studies")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults) with command-line overrides applied."""
    cfg = load_config(args.config) if args.config is not None else ExperimentConfig()
    return cfg.with_overrides(
        binned=args.binned,
        bin_count=args.grid,
        scheme=args.scheme,
        threads=args.threads,
        out_dir=None if args.out is None else str(args.out),
    )


def _run(args: argparse.Namespace) -> int:
    if args.command == "verify":
        passed, table = cmd_verify(full=args.full, threads=args.threads)
        sys.stdout.write(table)
        return EXIT_OK if passed else EXIT_FAILURE

    cfg = resolve_config(args)
    paths: List[Path]
    if args.command == "simulate":
        paths = cmd_simulate(cfg, truth=args.truth)
    elif args.command == "estimate":
        paths = cmd_estimate(
            cfg,
            args.dataset,
            pairs=args.pairs,
            h_mean=args.h_mean,
            h_cov=args.h_cov,
            one_based=args.one_based,
        )
    else:
        commands = {
            "sweep": cmd_sweep,
            "phase-experiment": cmd_phase_experiment,
            "rate-experiment": cmd_rate_experiment,
        }
        with make_executor(cfg.threads) as executor:
            paths = commands[args.command](cfg, executor=executor)
    for path in paths:
        sys.stdout.write(f"{path}\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return _run(args)
    except (FdaError, OSError, ValueError) as exc:
        logger.debug("Command %s failed", args.command, exc_info=True)
        sys.stderr.write(f"fda {args.command}: error: {exc}\n")
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
