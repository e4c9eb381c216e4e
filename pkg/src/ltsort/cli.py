"""Command-line entry points: run curve experiments, calibrate gamma_succ."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import CalibrationError, ParameterError
from .experiments import (
    MODES,
    ExperimentConfig,
    calibrate_gamma_succ,
    emit_csv,
    run_experiment,
    with_calibrated_gamma_succ,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltsort",
        description="LT symbol-transmission sorting: recovery-rate curve experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run Monte-Carlo trials and write a z-vs-gamma CSV")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--trials", type=int, help="override trial count")
    run.add_argument("--seed", type=int, help="override master seed")
    run.add_argument("--mode", choices=MODES, help="override scheduler mode")
    run.add_argument("--out", help="override output CSV path")

    cal = sub.add_parser("calibrate", help="measure gamma_succ for the configured code")
    cal.add_argument("--config", required=True, help="JSON experiment config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.from_file(args.config)
        if args.command == "calibrate":
            print(f"{calibrate_gamma_succ(config):.2f}")
            return 0
        overrides = {
            key: getattr(args, key)
            for key in ("trials", "seed", "mode", "out")
            if getattr(args, key) is not None
        }
        if overrides:
            config = replace(config, **overrides)
        config = with_calibrated_gamma_succ(config)
        agg = run_experiment(config)
        emit_csv(agg, config.out)
        print(f"wrote {config.out} ({agg.gammas.size} grid points, {agg.trials} trials)")
        return 0
    except (ParameterError, CalibrationError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
