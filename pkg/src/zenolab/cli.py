"""Command line entry point.

    zenolab run CONFIG.json [--out DIR] [--seed N]
    zenolab preset NAME [--out DIR] [--seed N]
    zenolab list-presets

Exit codes: 0 success, 2 rejected input, 3 numerical invariant broken.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import scenarios
from .errors import InvariantViolation, ValidationError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INVARIANT = 3

log = logging.getLogger("zenolab")


def _write(outcome: scenarios.Outcome, out_dir: str) -> list[str]:
    # everything is computed before the first byte is written
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name in sorted(outcome.files):
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(outcome.files[name])
        written.append(path)
    path = os.path.join(out_dir, "summary.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(outcome.summary) + "\n")
    written.append(path)
    return written


def _execute(scenario: scenarios.Scenario, out_dir, seed) -> int:
    if seed is not None:
        scenario.parameters["seed"] = seed
    try:
        outcome = scenarios.execute(scenario)
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc.invariant}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValidationError as exc:
        print(f"error: invalid input ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVALID
    for path in _write(outcome, out_dir or scenario.output_path):
        print(path)
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        scenario = scenarios.load(args.config)
    except ValidationError as exc:
        print(f"error: invalid config ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVALID
    return _execute(scenario, args.out, args.seed)


def cmd_preset(args) -> int:
    if args.name not in scenarios.PRESETS:
        print(f"error: unknown preset {args.name!r}; try list-presets", file=sys.stderr)
        return EXIT_INVALID
    scenario = scenarios.Scenario.from_dict(scenarios.PRESETS[args.name].to_dict())
    return _execute(scenario, args.out, args.seed)


def cmd_list(args) -> int:
    width = max(len(n) for n in scenarios.PRESETS)
    for name, sc in scenarios.PRESETS.items():
        print(f"{name:<{width}}  {sc.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zenolab", description="Quantum Zeno dynamics scenarios")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: the scenario's output_path)")
    common.add_argument("--seed", type=int, help="seed for models drawn at random (numpy PCG64)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run a JSON scenario config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", parents=[common], help="run a built-in scenario")
    p.add_argument("name")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("list-presets", help="list built-in scenarios")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
