"""Command-line surface: gen, run, check, bench, involve, render."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .checkers import CheckerParams, check_trace
from .decisions import CassetteBackend, CassetteRecorder, LiveBackend, OracleBackend
from .errors import LanescriptError
from .fixtures import EXECUTION_TASKS, load_road, load_task, parse_road_config
from .metrics import bench
from .orchestrator import RunConfig, Trace, VutSpawn, run_scenario
from .render import render_trace
from .script_model import parse_script, serialize_script, validate_script
from .writer import generate_master, generate_subscripts, render_master, user_involvement


def _make_backend(args):
    if args.backend == "oracle":
        return OracleBackend()
    if args.backend == "replay":
        if not args.cassette:
            raise LanescriptError("--cassette is required with --backend replay")
        return CassetteBackend.load(args.cassette)
    backend = LiveBackend()
    if args.record:
        return CassetteRecorder(backend)
    return backend


def _finish_cassette(backend, args):
    if args.record and isinstance(backend, CassetteRecorder):
        backend.save(args.record)
        print(f"cassette saved to {args.record}")


def cmd_gen(args):
    backend = _make_backend(args)
    requirement = Path(args.requirement).read_text(encoding="utf-8") \
        if Path(args.requirement).exists() else args.requirement
    master, usage = generate_master(requirement, args.map_hint, backend)
    print(render_master(master), file=sys.stderr)
    script, warnings, usage2 = generate_subscripts(master, backend, title=args.title)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    text = serialize_script(script)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text)
    _finish_cassette(backend, args)


def cmd_run(args):
    script = parse_script(Path(args.script).read_text(encoding="utf-8"))
    layout = parse_road_config(Path(args.road).read_text(encoding="utf-8"))
    config = RunConfig(
        seed=args.seed,
        max_sim_seconds=args.seconds,
        despawn_on_finish=args.despawn_on_finish,
        vut_policy=args.vut_policy,
        vut_spawn=VutSpawn(args.vut_lane, args.vut_long, args.vut_speed)
        if args.vut_lane else None,
    )
    backend = _make_backend(args)
    trace = run_scenario(script, layout, config, backend)
    trace.save(args.out)
    _finish_cassette(backend, args)
    print(f"trace with {len(trace.frames())} frames written to {args.out}")


def cmd_check(args):
    trace = Trace.load(args.trace)
    verdict = check_trace(trace, args.checker, CheckerParams())
    for clause in verdict.clauses:
        mark = "PASS" if clause.passed else "FAIL"
        print(f"[{mark}] {clause.name}" + (f" — {clause.detail}" if clause.detail else ""))
    print("verdict:", "PASS" if verdict.passed else "FAIL")
    sys.exit(0 if verdict.passed else 1)


def cmd_bench(args):
    task_ids = args.tasks or list(EXECUTION_TASKS)
    for task_id in task_ids:
        load_task(task_id)  # fail fast on typos
    if args.backend != "oracle":
        raise LanescriptError("bench currently supports the oracle backend only")
    report = bench(task_ids, args.runs, OracleBackend)
    payload = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        print(payload)


def cmd_involve(args):
    generated = Path(args.generated).read_text(encoding="utf-8")
    final = Path(args.final).read_text(encoding="utf-8")
    pct = user_involvement(generated, final)
    print(f"{pct:.2f}%")


def cmd_render(args):
    trace = Trace.load(args.trace)
    render_trace(trace, args.out, panels=args.panels)
    print(f"image written to {args.out}")


def build_parser():
    p = argparse.ArgumentParser(prog="lanescript")
    sub = p.add_subparsers(dest="command", required=True)

    def add_backend_flags(sp):
        sp.add_argument("--backend", choices=["oracle", "live", "replay"], default="oracle")
        sp.add_argument("--cassette", help="cassette path for --backend replay")
        sp.add_argument("--record", help="record live calls to this cassette path")

    sp = sub.add_parser("gen", help="requirement -> script")
    sp.add_argument("requirement", help="requirement text or a file containing it")
    sp.add_argument("--map-hint", default=None)
    sp.add_argument("--title", default="generated")
    sp.add_argument("--out")
    add_backend_flags(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("run", help="script -> trace")
    sp.add_argument("script")
    sp.add_argument("--road", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--seconds", type=float, default=30.0)
    sp.add_argument("--despawn-on-finish", action="store_true")
    sp.add_argument("--vut-policy", default="constant_speed")
    sp.add_argument("--vut-lane", type=int, default=None)
    sp.add_argument("--vut-long", type=float, default=0.0)
    sp.add_argument("--vut-speed", type=float, default=0.0)
    add_backend_flags(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("check", help="trace -> verdict")
    sp.add_argument("trace")
    sp.add_argument("--checker", required=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bench", help="fixtures -> metrics report")
    sp.add_argument("--tasks", nargs="*", default=None)
    sp.add_argument("--runs", type=int, default=20)
    sp.add_argument("--out")
    sp.add_argument("--backend", choices=["oracle"], default="oracle")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("involve", help="two scripts -> user involvement %")
    sp.add_argument("generated")
    sp.add_argument("final")
    sp.set_defaults(func=cmd_involve)

    sp = sub.add_parser("render", help="trace -> SVG")
    sp.add_argument("trace")
    sp.add_argument("--out", required=True)
    sp.add_argument("--panels", type=int, default=6)
    sp.set_defaults(func=cmd_render)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except LanescriptError as e:
        print(f"error: {e}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
