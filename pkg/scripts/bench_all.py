#!/usr/bin/env python3
"""Benchmark all execution tasks on the oracle backend and print the report.

Usage:
    python scripts/bench_all.py --runs 20 --out report.json
"""

import argparse
import json
from pathlib import Path

from lanescript.decisions import OracleBackend
from lanescript.fixtures import EXECUTION_TASKS
from lanescript.metrics import bench


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--tasks", nargs="*", default=list(EXECUTION_TASKS))
    ap.add_argument("--out")
    args = ap.parse_args()

    report = bench(args.tasks, args.runs, OracleBackend)
    payload = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"report written to {args.out}")
    else:
        print(payload)


if __name__ == "__main__":
    main()
