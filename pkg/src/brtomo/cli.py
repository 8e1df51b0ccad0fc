"""Command line entry point ``tomo``."""

from __future__ import annotations

import argparse
import logging
import sys

from .experiment import MODES, ExperimentConfig, ExperimentError, run_comparison


def _parse_modes(text: str) -> list[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"modes must be a comma list drawn from {', '.join(MODES)}")
    return modes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tomo", description="Broken-ray travel-time tomography experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or key = value experiment config")
    common.add_argument("--seed", type=int, help="base seed; trial i uses seed + i")
    common.add_argument("--trials", type=int, help="override the number of trials")
    common.add_argument("--out-dir", default="tomo_out", help="output directory (default: %(default)s)")
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run the trials of the configured mode")
    cmp_ = sub.add_parser("compare", parents=[common], help="run several modes at a matched ray budget")
    cmp_.add_argument("--modes", type=_parse_modes, default=list(MODES),
                      help="comma-separated modes (default: all)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        config = config.replace(**overrides)
        modes = [config.mode] if args.command == "run" else args.modes
        summary = run_comparison(config, modes, out_dir=args.out_dir)
    except (ExperimentError, ValueError, OSError) as exc:
        print(f"tomo: error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(summary.table())
    return 0


if __name__ == "__main__":
    sys.exit(main())
