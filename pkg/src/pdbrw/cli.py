"""Command-line front end for the experiment harness.

One subcommand per experiment kind; global flags control seeding, output
location and work limits.  Exit codes: 0 success, 2 configuration error,
3 work-limit exceeded, 4 failed acceptance checks under --assert.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .engine import WorkLimitExceeded

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_WORK_LIMIT = 3
EXIT_CHECK_FAILED = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdbrw",
        description="Branching random walk experiments with exponential steps")
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed (default 0)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (replicates are deterministic "
                        "regardless; accepted for interface compatibility)")
    parser.add_argument("--out", default="pdbrw-out",
                        help="output directory (default ./pdbrw-out)")
    parser.add_argument("--config", metavar="JSON",
                        help="JSON experiment spec file; command-line flags "
                        "override its fields")
    parser.add_argument("--model", choices=["pwit", "pd", "both"],
                        default=None, help="step model (default both)")
    parser.add_argument("--work-limit", type=float, default=None,
                        help="abort if an experiment exceeds this many "
                        "elementary operations")
    parser.add_argument("--replicates", type=int, default=None,
                        help="override the experiment's replicate count")
    parser.add_argument("--assert", dest="assert_mode", action="store_true",
                        help="exit 4 if any built-in check fails")
    sub = parser.add_subparsers(dest="kind", metavar="command")
    for kind in harness.EXPERIMENT_KINDS:
        sub.add_parser(kind, help=f"run the {kind} experiment")
    return parser


def _spec_from_args(args: argparse.Namespace) -> harness.ExperimentSpec:
    obj: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                obj = json.load(fh)
        except OSError as err:
            raise harness.ConfigError(f"cannot read config: {err}") from err
        except json.JSONDecodeError as err:
            raise harness.ConfigError(f"config is not valid JSON: {err}") from err
    if args.kind:
        obj["kind"] = args.kind
    if "kind" not in obj:
        raise harness.ConfigError("no experiment selected: pass a subcommand "
                                  "or a config with a 'kind' field")
    obj.setdefault("master_seed", args.seed)
    if args.seed != 0:
        obj["master_seed"] = args.seed
    if args.model is not None:
        obj["model"] = args.model
    if args.replicates is not None:
        obj["replicates"] = args.replicates
    if args.work_limit is not None:
        obj["work_limit"] = args.work_limit
    return harness.load_spec(obj)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
    except harness.ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = harness.run_experiment(spec)
    except WorkLimitExceeded as err:
        print(f"work limit exceeded: {err}", file=sys.stderr)
        return EXIT_WORK_LIMIT
    except harness.ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = harness.write_outputs(result, args.out)
    for check in result.checks:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}")
    print(f"wrote {len(result.records)} records to {args.out} "
          f"(records sha256 {manifest['outputs']['records']['sha256'][:12]})")
    if args.assert_mode and not result.all_passed:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
