"""Command-line entry point: `mdl <command> --config scenario.ini [...]`.

Commands: simulate, process, train-eval, decompose, all. Flags override
the corresponding config values. Exit codes: 0 success, 2 configuration
error, 3 IO error, 4 data-contract violation. `MDL_LOG` (debug, info,
warning, error) controls log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import load_scenario
from .errors import ConfigurationError, DataContractError
from .pipeline import (
    cmd_decompose,
    cmd_process,
    cmd_simulate,
    cmd_train_eval,
    run_all,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4

COMMANDS = ("simulate", "process", "train-eval", "decompose", "all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdl",
        description=(
            "Simulate walking-human radar returns, process them into "
            "range-Doppler features, train a limb classifier, and stream "
            "per-class velocity envelopes."
        ),
    )
    parser.add_argument("--version", action="version", version=f"mdl {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="|".join(COMMANDS))
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="scenario INI file")
        cmd.add_argument("--out", help="output directory (overrides config)")
        cmd.add_argument(
            "--seed", type=int, help="overrides both gait and classifier seeds"
        )
        cmd.add_argument("--gamma", type=float, help="power-law exponent override")
        cmd.add_argument(
            "--preset",
            choices=("model-a", "model-b"),
            help="radar preset override (replaces explicit radar fields)",
        )
        cmd.add_argument(
            "--parallel",
            type=int,
            default=1,
            metavar="N",
            help="worker threads for per-frame processing",
        )
        cmd.add_argument(
            "--plot",
            action="store_true",
            help="also export spectrogram.csv for plotting tools",
        )
        cmd.add_argument(
            "--no-threshold",
            action="store_true",
            help="debug mode: take every nonzero cell instead of Otsu masking",
        )
        cmd.add_argument(
            "--continue-on-error",
            action="store_true",
            help="skip unreadable frame files instead of aborting",
        )
    return parser


def _configure_logging() -> None:
    name = os.environ.get("MDL_LOG", "warning").strip().upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _overrides(args) -> dict[str, object]:
    overrides: dict[str, object] = {
        "processing.gamma": args.gamma,
        "radar.preset": args.preset,
        "scenario.output_dir": args.out,
    }
    if args.seed is not None:
        overrides["gait.seed"] = args.seed
        overrides["classifier.seed"] = args.seed
    return overrides


def _dispatch(args) -> None:
    scenario = load_scenario(args.config, _overrides(args))
    if scenario.output_dir is None:
        raise ConfigurationError(
            "no output directory: set [scenario] output_dir or pass --out"
        )
    out_dir = Path(scenario.output_dir)
    if args.parallel < 1:
        raise ConfigurationError("--parallel must be at least 1")

    if args.command == "simulate":
        cmd_simulate(scenario, out_dir)
    elif args.command == "process":
        cmd_process(
            scenario,
            out_dir,
            no_threshold=args.no_threshold,
            parallel=args.parallel,
            continue_on_error=args.continue_on_error,
        )
    elif args.command == "train-eval":
        cmd_train_eval(scenario, out_dir)
    elif args.command == "decompose":
        cmd_decompose(scenario, out_dir, plot=args.plot)
    else:
        run_all(
            scenario,
            out_dir,
            no_threshold=args.no_threshold,
            parallel=args.parallel,
            continue_on_error=args.continue_on_error,
            plot=args.plot,
        )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging()
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        _dispatch(args)
    except ConfigurationError as exc:
        log.error("%s", exc)
        print(f"mdl: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        print(f"mdl: IO error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DataContractError as exc:
        log.error("%s", exc)
        print(f"mdl: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
