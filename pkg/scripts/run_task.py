#!/usr/bin/env python3
"""Run one fixture task end to end on the oracle backend and print the verdict.

Usage:
    python scripts/run_task.py swerve --out swerve.trace.jsonl --svg swerve.svg
"""

import argparse
import sys

from lanescript.checkers import check_trace
from lanescript.decisions import OracleBackend
from lanescript.fixtures import EXECUTION_TASKS, load_road, load_task, load_task_script
from lanescript.orchestrator import RunConfig, run_scenario
from lanescript.render import render_trace


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("task", choices=sorted(EXECUTION_TASKS))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write the trace (JSONL) here")
    ap.add_argument("--svg", help="render the trace to this SVG file")
    args = ap.parse_args()

    fixture = load_task(args.task)
    script = load_task_script(args.task)
    layout = load_road(fixture.road)
    config = RunConfig(
        seed=args.seed,
        max_sim_seconds=fixture.max_sim_seconds,
        vut_spawn=fixture.vut_spawn,
        vut_policy=fixture.vut_policy,
    )
    trace = run_scenario(script, layout, config, OracleBackend())

    if args.out:
        trace.save(args.out)
        print(f"trace: {args.out} ({len(trace.frames())} frames)")
    if args.svg:
        render_trace(trace, args.svg)
        print(f"image: {args.svg}")

    verdict = check_trace(trace, fixture.checker_id)
    for clause in verdict.clauses:
        mark = "PASS" if clause.passed else "FAIL"
        detail = f" — {clause.detail}" if clause.detail else ""
        print(f"[{mark}] {clause.name}{detail}")
    print("verdict:", "PASS" if verdict.passed else "FAIL")
    sys.exit(0 if verdict.passed else 1)


if __name__ == "__main__":
    main()
