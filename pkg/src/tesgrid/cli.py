"""Command-line entry point.

Subcommands:
    run         simulate a scenario file and write results to a directory
    validate    parse + validate a scenario file and print the report
    gen-feeder  write the generated study feeder and its weather file

Exit codes: 0 success, 2 configuration error (parse/validation), 3
runtime failure (solver divergence, missing input data, I/O).
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, ParseError, TesgridError
from .feedergen import gen_feeder, gen_weather
from .glm import parse_scenario
from .kernel import Engine
from .recorder import write_results
from .validate import validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    try:
        return parse_scenario(text)
    except ParseError as exc:
        print(f"error: {path}:{exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _cmd_run(args) -> int:
    model = _load(args.scenario)
    report = validate(model)
    if report.serialize():
        print(report.serialize(), file=sys.stderr)
    if not report.runnable:
        return EXIT_CONFIG
    base_dir = os.path.dirname(os.path.abspath(args.scenario))
    try:
        engine = Engine(model, topology=args.topology, seed=args.seed, base_dir=base_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TesgridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        result = engine.run()
        manifest = write_results(result, args.out)
    except TesgridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for warning in result.metadata["event_warnings"]:
        print(f"warning: {warning}", file=sys.stderr)
    for name in manifest:
        print(os.path.join(args.out, name))
    if not result.complete:
        print("error: run aborted before the stop time (see summary.txt)", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_validate(args) -> int:
    model = _load(args.scenario)
    report = validate(model)
    text = report.serialize()
    if text:
        print(text)
    print(f"{'runnable' if report.runnable else 'not runnable'}: "
          f"{len(report.errors)} error(s), {len(report.warnings)} warning(s)")
    return EXIT_OK if report.runnable else EXIT_CONFIG


def _cmd_gen_feeder(args) -> int:
    try:
        os.makedirs(args.out, exist_ok=True)
        scenario = gen_feeder(houses=args.houses, seed=args.seed)
        with open(os.path.join(args.out, "feeder.glm"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(scenario)
        with open(os.path.join(args.out, "weather.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(gen_weather())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(os.path.join(args.out, "feeder.glm"))
    print(os.path.join(args.out, "weather.csv"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tesgrid",
        description="Transactive smart-grid simulator with cyber/physical attack modeling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write results")
    p_run.add_argument("scenario", help="scenario (.glm) file")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument("--topology", choices=("direct", "auxiliary"), default="auxiliary",
                       help="market topology (default: auxiliary)")
    p_run.add_argument("--seed", type=int, default=0, help="run seed recorded in the summary")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a scenario without running it")
    p_val.add_argument("scenario", help="scenario (.glm) file")
    p_val.set_defaults(func=_cmd_validate)

    p_gen = sub.add_parser("gen-feeder", help="generate the study feeder")
    p_gen.add_argument("--houses", type=int, default=30)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default="feeder", help="output directory (default: feeder)")
    p_gen.set_defaults(func=_cmd_gen_feeder)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
