"""Command-line harness: one subcommand per experiment.

Each subcommand reads an INI config, runs the experiment, and writes
<out>/<kind>.csv plus <out>/<kind>-report.txt.  Exit code 0 means every
assertion passed, 2 means an assertion failed, 1 means the run itself
errored (bad config, unwritable path, numerical failure).  Wall time
goes to stdout only, never into the output files.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .config import SCHEMAS, load_config
from .errors import WidthlabError
from .experiments import emit_csv, run_experiment, write_report


def build_parser():
    parser = argparse.ArgumentParser(
        prog="widthlab",
        description="Performance-bound experiments for parametric transport "
                    "and reduced-basis baselines.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in SCHEMAS:
        cmd = sub.add_parser(kind, help=f"run the {kind} experiment")
        cmd.add_argument("--config", required=True, help="INI config path")
        cmd.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        config = load_config(args.config, args.kind)
        report = run_experiment(config)
        os.makedirs(args.out, exist_ok=True)
        emit_csv(report.rows, report.schema,
                 os.path.join(args.out, f"{args.kind}.csv"))
        write_report(report, os.path.join(args.out, f"{args.kind}-report.txt"))
    except WidthlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - started
    for line in report.summary:
        print(line)
    for a in report.assertions:
        print(f"{'PASS' if a.passed else 'FAIL'} {a.name}: {a.detail}")
    print(f"wall time: {elapsed:.2f} s")
    if not report.passed:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
