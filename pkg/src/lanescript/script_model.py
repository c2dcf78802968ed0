"""Scenario script model: parsing, serialization and validation.

Document format (UTF-8, line oriented, '#' comments):

    title: Swerve
    map_hint: A straight 4-lane highway.

    actor front_car:
      kind: car
      initial: {lane: 2, long_m: 105.0, speed_mps: 6.0}
      footprint: {length_m: 4.5, width_m: 2.0}   # optional
      step 1:
        action: Maintain 6 m/s speed in lane 2
        termination: Front_car decelerates to less than 5 m/s.
        reason: Cruise normally.
        action_expr: cruise(lane: 2, speed: 6)        # optional
        termination_expr: speed(front_car) < 5        # optional

A sub-script is oracle-executable only when every step carries both exprs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from . import actions, conditions
from .actions import ACTOR_KINDS
from .errors import ScriptReferenceError, ScriptSyntaxError, UnitError

RESERVED_ACTORS = ("VUT", "self")

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class InitialState:
    lane_index: int
    longitudinal_m: float
    speed_mps: float


@dataclass(frozen=True)
class Step:
    index: int
    action_text: str
    termination_text: str
    reason: str = ""
    action_expr: object = None
    termination_expr: object = None


@dataclass(frozen=True)
class SubScript:
    actor_name: str
    actor_kind: str
    initial: InitialState
    steps: tuple
    footprint: tuple = None  # (length_m, width_m) override

    @property
    def structured(self) -> bool:
        return all(s.action_expr is not None and s.termination_expr is not None for s in self.steps)


@dataclass(frozen=True)
class Script:
    title: str
    actors: tuple
    map_hint: str = ""

    def actor(self, name) -> SubScript:
        for sub in self.actors:
            if sub.actor_name == name:
                return sub
        raise KeyError(name)

    @property
    def actor_names(self):
        return tuple(sub.actor_name for sub in self.actors)


@dataclass(frozen=True)
class MasterStage:
    description: str
    reasoning: str = ""


@dataclass(frozen=True)
class MasterScript:
    initial_state: str
    stages: tuple

    def __post_init__(self):
        if not self.stages:
            raise ScriptSyntaxError("master script needs at least one stage")


# --- Parsing ------------------------------------------------------------------

_ACTOR_RE = re.compile(r"^actor\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*$")
_STEP_RE = re.compile(r"^step\s+(\d+)\s*:\s*$")
_KV_RE = re.compile(r"^([a-z_]+)\s*:\s*(.*)$")
_INLINE_RE = re.compile(r"^\{\s*(.*?)\s*\}$")

_STEP_KEYS = ("action", "termination", "reason", "action_expr", "termination_expr")


def _parse_inline(value, lineno):
    m = _INLINE_RE.match(value)
    if m is None:
        raise ScriptSyntaxError(f"expected '{{key: value, ...}}', got {value!r}", lineno)
    out = {}
    body = m.group(1)
    if body:
        for part in body.split(","):
            if ":" not in part:
                raise ScriptSyntaxError(f"bad entry {part.strip()!r}", lineno)
            k, _, v = part.partition(":")
            out[k.strip()] = v.strip()
    return out


def _inline_num(d, key, lineno):
    if key not in d:
        raise ScriptSyntaxError(f"missing key {key!r}", lineno)
    try:
        return float(d[key])
    except ValueError:
        raise ScriptSyntaxError(f"bad number for {key!r}: {d[key]!r}", lineno) from None


def parse_script(document: str) -> Script:
    """Parse a script document. Raises ScriptSyntaxError / ScriptReferenceError / UnitError."""
    if not isinstance(document, str):
        raise ScriptSyntaxError("script document must be text")

    title = ""
    map_hint = ""
    actors = []
    cur_actor = None  # dict being built
    cur_step = None

    def finish_step():
        nonlocal cur_step
        if cur_step is None:
            return
        d = cur_step
        if not d.get("action"):
            raise ScriptSyntaxError("step missing non-empty 'action'", d["lineno"])
        if not d.get("termination"):
            raise ScriptSyntaxError("step missing non-empty 'termination'", d["lineno"])
        action_expr = None
        termination_expr = None
        if "action_expr" in d:
            action_expr = actions.parse_action(d["action_expr"], d["lineno"])
        if "termination_expr" in d:
            try:
                termination_expr = conditions.parse_condition(d["termination_expr"])
            except ScriptSyntaxError as e:
                raise ScriptSyntaxError(str(e), d["lineno"]) from None
        cur_actor["steps"].append(
            Step(
                index=d["index"],
                action_text=d["action"],
                termination_text=d["termination"],
                reason=d.get("reason", ""),
                action_expr=action_expr,
                termination_expr=termination_expr,
            )
        )
        cur_step = None

    def finish_actor(lineno):
        nonlocal cur_actor
        if cur_actor is None:
            return
        finish_step()
        d = cur_actor
        if not d["steps"]:
            raise ScriptSyntaxError(f"actor {d['name']!r} has no steps", lineno)
        for i, s in enumerate(d["steps"], start=1):
            if s.index != i:
                raise ScriptSyntaxError(
                    f"steps of {d['name']!r} must be numbered 1..{len(d['steps'])} contiguously",
                    lineno,
                )
        if d.get("kind") not in ACTOR_KINDS:
            raise ScriptSyntaxError(
                f"actor {d['name']!r} has unknown kind {d.get('kind')!r}", d["lineno"]
            )
        if d.get("initial") is None:
            raise ScriptSyntaxError(f"actor {d['name']!r} missing 'initial'", d["lineno"])
        has_expr = [s.action_expr is not None or s.termination_expr is not None for s in d["steps"]]
        full = [s.action_expr is not None and s.termination_expr is not None for s in d["steps"]]
        if any(has_expr) and not all(full):
            raise ScriptSyntaxError(
                f"actor {d['name']!r}: structured exprs must be present on every step or none",
                d["lineno"],
            )
        actors.append(
            SubScript(
                actor_name=d["name"],
                actor_kind=d["kind"],
                initial=d["initial"],
                steps=tuple(d["steps"]),
                footprint=d.get("footprint"),
            )
        )
        cur_actor = None

    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _ACTOR_RE.match(line)
        if m:
            finish_actor(lineno)
            cur_actor = {"name": m.group(1), "steps": [], "lineno": lineno}
            continue
        m = _STEP_RE.match(line)
        if m:
            if cur_actor is None:
                raise ScriptSyntaxError("'step' outside an actor block", lineno)
            finish_step()
            cur_step = {"index": int(m.group(1)), "lineno": lineno}
            continue
        m = _KV_RE.match(line)
        if m is None:
            raise ScriptSyntaxError(f"unrecognized line {line!r}", lineno)
        key, value = m.group(1), m.group(2).strip()
        if cur_step is not None and key in _STEP_KEYS:
            if key in cur_step:
                raise ScriptSyntaxError(f"duplicate {key!r} in step", lineno)
            cur_step[key] = value
        elif cur_actor is not None and cur_step is None and key in ("kind", "initial", "footprint"):
            if key == "kind":
                cur_actor["kind"] = value
                cur_actor.setdefault("lineno", lineno)
            elif key == "initial":
                d = _parse_inline(value, lineno)
                lane = _inline_num(d, "lane", lineno)
                if lane < 1 or lane != int(lane):
                    raise ScriptSyntaxError(f"lane must be an integer >= 1, got {d['lane']}", lineno)
                speed = _inline_num(d, "speed_mps", lineno)
                if speed < 0:
                    raise UnitError(f"initial speed must be >= 0, got {speed}")
                cur_actor["initial"] = InitialState(int(lane), _inline_num(d, "long_m", lineno), speed)
            else:
                d = _parse_inline(value, lineno)
                cur_actor["footprint"] = (
                    _inline_num(d, "length_m", lineno),
                    _inline_num(d, "width_m", lineno),
                )
        elif cur_actor is None and key in ("title", "map_hint"):
            if key == "title":
                title = value
            else:
                map_hint = value
        else:
            raise ScriptSyntaxError(f"key {key!r} not allowed here", lineno)

    finish_actor(lineno=None)

    names = [a.actor_name for a in actors]
    if len(set(names)) != len(names):
        raise ScriptSyntaxError("duplicate actor names")
    for name in names:
        if not _IDENT_RE.match(name):
            raise ScriptSyntaxError(f"bad actor name {name!r}")

    script = Script(title=title, map_hint=map_hint, actors=tuple(actors))
    _check_references(script)
    return script


def _check_references(script):
    known = set(script.actor_names) | set(RESERVED_ACTORS)
    for sub in script.actors:
        for step in sub.steps:
            if step.termination_expr is None:
                continue
            for ref in conditions.actor_refs(step.termination_expr):
                if ref not in known:
                    raise ScriptReferenceError(
                        f"condition in step {step.index} of {sub.actor_name!r} "
                        f"references unknown actor {ref!r}"
                    )


# --- Serialization ------------------------------------------------------------

def _fmt(x):
    return conditions.format_number(x)


def serialize_script(script: Script) -> str:
    lines = [f"title: {script.title}"]
    if script.map_hint:
        lines.append(f"map_hint: {script.map_hint}")
    for sub in script.actors:
        lines.append("")
        lines.append(f"actor {sub.actor_name}:")
        lines.append(f"  kind: {sub.actor_kind}")
        ini = sub.initial
        lines.append(
            "  initial: {lane: %d, long_m: %s, speed_mps: %s}"
            % (ini.lane_index, _fmt(ini.longitudinal_m), _fmt(ini.speed_mps))
        )
        if sub.footprint is not None:
            lines.append(
                "  footprint: {length_m: %s, width_m: %s}"
                % (_fmt(sub.footprint[0]), _fmt(sub.footprint[1]))
            )
        for step in sub.steps:
            lines.append(f"  step {step.index}:")
            lines.append(f"    action: {step.action_text}")
            lines.append(f"    termination: {step.termination_text}")
            if step.reason:
                lines.append(f"    reason: {step.reason}")
            if step.action_expr is not None:
                lines.append(f"    action_expr: {actions.serialize_action(step.action_expr)}")
            if step.termination_expr is not None:
                lines.append(
                    f"    termination_expr: {conditions.serialize_condition(step.termination_expr)}"
                )
    return "\n".join(lines) + "\n"


# --- Validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    actor: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_script(script: Script, layout) -> ValidationReport:
    """Static runnability checks against a road layout. Violations are data."""
    from .world import default_footprint  # local import to avoid a cycle

    out = []
    known = set(script.actor_names) | set(RESERVED_ACTORS)
    spawns = []
    for sub in script.actors:
        ini = sub.initial
        if ini.lane_index > layout.lane_count:
            out.append(
                Violation("LaneOutOfRange", sub.actor_name,
                          f"lane {ini.lane_index} on a {layout.lane_count}-lane road")
            )
        if not (0.0 <= ini.longitudinal_m <= layout.length_m):
            out.append(
                Violation("OffRoadSpawn", sub.actor_name,
                          f"longitudinal {ini.longitudinal_m} outside [0, {layout.length_m}]")
            )
        for step in sub.steps:
            if step.action_expr is not None and not actions.allowed_for_kind(step.action_expr, sub.actor_kind):
                out.append(
                    Violation("ActionKindMismatch", sub.actor_name,
                              f"step {step.index}: {step.action_expr.render()} not allowed for {sub.actor_kind}")
                )
            if step.termination_expr is not None:
                for ref in conditions.actor_refs(step.termination_expr):
                    if ref not in known:
                        out.append(
                            Violation("UnresolvedReference", sub.actor_name,
                                      f"step {step.index} references {ref!r}")
                        )
        fp = sub.footprint or default_footprint(sub.actor_kind)
        d_center = (ini.lane_index - 1) * layout.lane_width_m
        spawns.append((sub.actor_name, ini.longitudinal_m, d_center, fp))

    for i in range(len(spawns)):
        for j in range(i + 1, len(spawns)):
            na, sa, da, fa = spawns[i]
            nb, sb, db, fb = spawns[j]
            if abs(sa - sb) < (fa[0] + fb[0]) / 2 and abs(da - db) < (fa[1] + fb[1]) / 2:
                out.append(Violation("SpawnOverlap", na, f"footprint overlaps {nb!r} at spawn"))

    return ValidationReport(tuple(out))
