"""Command-line entry point.

Subcommands::

    qcamaps run --spec FILE --out DIR [--seed N] [--threads K]
    qcamaps preset NAME --out DIR [--seed N] [--ensemble-size K] [--threads K]
    qcamaps list-presets
    qcamaps validate --spec FILE

Exit codes: 0 success, 2 invalid spec/arguments, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .experiments import (
    SpecError,
    list_presets,
    load_spec,
    preset_spec,
    run_experiment,
    spec_to_json_dict,
)
from .operators import CapacityError, config_warnings

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcamaps",
        description="Pseudo-random map ensembles on qubit chains/rings and their randomness statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment described by a JSON spec")
    run.add_argument("--spec", required=True, help="path to the JSON experiment spec")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the spec's master seed")
    run.add_argument("--threads", type=int, default=1, help="parallel ensemble workers")

    preset = sub.add_parser("preset", help="run a built-in experiment preset")
    preset.add_argument("name", help="preset name (see list-presets)")
    preset.add_argument("--out", required=True, help="output directory")
    preset.add_argument("--seed", type=int, default=None, help="override the preset seed")
    preset.add_argument("--ensemble-size", type=int, default=None, help="override the ensemble size")
    preset.add_argument("--threads", type=int, default=1, help="parallel ensemble workers")

    sub.add_parser("list-presets", help="list the built-in experiment presets")

    validate = sub.add_parser("validate", help="check a JSON spec without running it")
    validate.add_argument("--spec", required=True, help="path to the JSON experiment spec")

    return parser


def _run_and_report(spec, out_dir, threads) -> int:
    warnings = config_warnings(spec.map_config())
    for message in warnings:
        print(f"warning: {message}", file=sys.stderr)
    bundle = run_experiment(spec, out_dir, threads=threads)
    print(f"wrote {out_dir} ({bundle.wall_time_s:.1f}s)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage, matching the spec-error code
        return int(exc.code) if exc.code else EXIT_OK

    try:
        if args.command == "run":
            spec = load_spec(args.spec)
            if args.seed is not None:
                spec = replace(spec, seed=args.seed)
            return _run_and_report(spec, args.out, args.threads)

        if args.command == "preset":
            spec = preset_spec(args.name, seed=args.seed, ensemble_size=args.ensemble_size)
            return _run_and_report(spec, args.out, args.threads)

        if args.command == "list-presets":
            for name, description in list_presets():
                print(f"{name:12s} {description}")
            return EXIT_OK

        if args.command == "validate":
            spec = load_spec(args.spec)
            for message in config_warnings(spec.map_config()):
                print(f"warning: {message}", file=sys.stderr)
            print(json.dumps(spec_to_json_dict(spec), indent=2, sort_keys=True))
            return EXIT_OK

        raise AssertionError(f"unhandled command {args.command!r}")
    except (SpecError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
