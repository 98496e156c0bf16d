"""Command-line entry point: ``beatlock simulate|validate|list-scenarios``."""

import argparse
import logging
import sys
from importlib import resources

from .scenario import SUFFIX, ScenarioError, bundled_scenarios, load_scenario, run_scenario

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("beatlock")


def _describe(name):
    text = (resources.files("beatlock") / "scenarios" / (name + SUFFIX)).read_text()
    for line in text.splitlines():
        if line.startswith("description:"):
            return line.split(":", 1)[1].strip().strip("\"'")
    return ""


def build_parser():
    parser = argparse.ArgumentParser(prog="beatlock", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and write its artifacts")
    sim.add_argument("scenario", help="scenario file or bundled scenario name")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sim.add_argument("--output-dir", default=None, help="override the output directory")

    val = sub.add_parser("validate", help="check a scenario without running it")
    val.add_argument("scenario")

    sub.add_parser("list-scenarios", help="list bundled scenarios")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    if args.command == "list-scenarios":
        for name in bundled_scenarios():
            print(f"{name:16s} {_describe(name)}")
        return EXIT_OK

    try:
        if args.command == "validate":
            s = load_scenario(args.scenario)
        else:
            s = load_scenario(args.scenario, seed=args.seed, output_dir=args.output_dir)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (FileNotFoundError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID

    if args.command == "validate":
        print(f"{s.name}: ok ({s.experiment})")
        return EXIT_OK

    try:
        manifest = run_scenario(s)
    except Exception as exc:
        print(f"{s.name}: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("%s: wrote %d artifacts to %s (%.2f s)", s.name, len(manifest.artifacts),
             s.output_dir, manifest.wall_clock_s)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
