"""Stage one: requirement -> master script -> per-actor sub-scripts.

Generation needs a text-capable backend (live or cassette). The involvement
metric quantifies how much of the final script a human had to supply.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import EmptyFinal, UnparseableMaster, UnparseableSubscript
from .script_model import MasterScript, MasterStage, parse_script, serialize_script

TEMPLATE_DIR = Path(__file__).resolve().parents[2] / "templates" / "writer"

MASTER_SYSTEM = (
    "You are a scenario writer for a traffic simulator used to stress-test "
    "autonomous driving systems. You turn a user requirement into a staged "
    "narrative: an initial state followed by numbered stages, where each stage "
    "is a direct cause or prerequisite of the next."
)

SUBSCRIPT_SYSTEM = (
    "You are a scenario writer for a traffic simulator. You turn a staged "
    "narrative into one executable sub-script per actor, in the exact document "
    "format requested. Each step carries an action, a measurable termination "
    "condition, and a reason."
)


def _load_template(name, default):
    path = TEMPLATE_DIR / name
    if path.exists():
        return path.read_text(encoding="utf-8")
    return default

MASTER_USER_TEMPLATE = """User requirement: {requirement}
{map_hint_block}
Write the story as:

Initial state: <one sentence>
Stage 1: <what happens>
Reasoning: <why it happens>
Stage 2: <what happens>
Reasoning: <why it happens>
...

Use as many stages as the requirement needs. Name every actor with a
lowercase identifier such as front_car or rear_car; the vehicle under test
is always called VUT and must never get its own stage instructions."""

SUBSCRIPT_USER_TEMPLATE = """Master script:

{master}

Write one sub-script per scripted actor (never for the VUT) in exactly this
document format and nothing else:

title: {title}

actor <name>:
  kind: <car|truck|bus|ambulance|police_car|pedestrian>
  initial: {{lane: <int>, long_m: <float>, speed_mps: <float>}}
  step 1:
    action: <natural-language action>
    termination: <measurable termination condition>
    reason: <why>
  step 2:
    ...

Lanes are counted from the left starting at 1. Give concrete numbers for
every initial state."""


_STAGE_RE = re.compile(
    r"Stage\s+(\d+)\s*:\s*(.+?)(?:\n\s*Reasoning\s*:\s*(.+?))?(?=\nStage\s+\d+\s*:|\Z)",
    re.S | re.I,
)
_INITIAL_RE = re.compile(r"Initial state\s*:\s*(.+?)(?=\nStage\s+\d+\s*:|\Z)", re.S | re.I)


def parse_master_text(text: str) -> MasterScript:
    m = _INITIAL_RE.search(text)
    initial = " ".join(m.group(1).split()) if m else ""
    stages = []
    for num, desc, reasoning in _STAGE_RE.findall(text):
        stages.append(
            MasterStage(
                description=" ".join(desc.split()),
                reasoning=" ".join(reasoning.split()) if reasoning else "",
            )
        )
    if not stages:
        raise UnparseableMaster("no 'Stage N:' sections found in response")
    return MasterScript(initial_state=initial, stages=tuple(stages))


def render_master(master: MasterScript) -> str:
    lines = [f"Initial state: {master.initial_state}"]
    for i, stage in enumerate(master.stages, start=1):
        lines.append(f"Stage {i}: {stage.description}")
        if stage.reasoning:
            lines.append(f"Reasoning: {stage.reasoning}")
    return "\n".join(lines)


def generate_master(requirement: str, map_hint, backend) -> tuple:
    """Returns (MasterScript, total Usage). One repair retry on format errors."""
    template = _load_template("master.txt", MASTER_USER_TEMPLATE)
    hint_block = f"Map description: {map_hint}\n" if map_hint else ""
    user = template.format(requirement=requirement, map_hint_block=hint_block)
    text, usage = backend.complete(MASTER_SYSTEM, user)
    try:
        return parse_master_text(text), usage
    except UnparseableMaster:
        repair = user + "\n\nYour previous answer had no 'Stage N:' sections. Follow the format exactly."
        text, usage2 = backend.complete(MASTER_SYSTEM, repair)
        master = parse_master_text(text)  # second failure propagates
        return master, _add_usage(usage, usage2)


def generate_subscripts(master: MasterScript, backend, title="generated",
                        expected_actors=None) -> tuple:
    """Returns (Script, warnings, total Usage). One repair retry on parse errors."""
    template = _load_template("subscripts.txt", SUBSCRIPT_USER_TEMPLATE)
    user = template.format(master=render_master(master), title=title)
    text, usage = backend.complete(SUBSCRIPT_SYSTEM, user)
    try:
        script = parse_script(_strip_fences(text))
    except Exception as first:
        repair = user + f"\n\nYour previous answer did not parse ({first}). Emit only the document."
        text, usage2 = backend.complete(SUBSCRIPT_SYSTEM, repair)
        try:
            script = parse_script(_strip_fences(text))
        except Exception as second:
            raise UnparseableSubscript(str(second)) from second
        usage = _add_usage(usage, usage2)
    warnings = []
    if expected_actors:
        missing = sorted(set(expected_actors) - set(script.actor_names))
        if missing:
            warnings.append(f"ActorMismatch: sub-scripts omit {', '.join(missing)}")
    return script, warnings, usage


def _strip_fences(text):
    text = text.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-z]*\n", "", text)
        text = re.sub(r"\n```$", "", text)
    return text


def _add_usage(a, b):
    from .decisions import Usage

    return Usage(
        a.prompt_tokens + b.prompt_tokens,
        a.completion_tokens + b.completion_tokens,
        a.wall_ms + b.wall_ms,
    )


# --- User involvement metric ---------------------------------------------------

def _strip_ws(text):
    return "".join(ch for ch in text if not ch.isspace())


def _lcs_length(a: str, b: str) -> int:
    # classic two-row DP; exact LCS, not difflib's contiguous-block heuristic
    if a == b:
        return len(a)
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        append = cur.append
        for j, cb in enumerate(b):
            if ca == cb:
                append(prev[j] + 1)
            else:
                x, y = cur[j], prev[j + 1]
                append(x if x >= y else y)
        prev = cur
    return prev[-1]


def user_involvement(generated, final) -> float:
    """Percentage of final-script characters (whitespace excluded) not
    attributable to the generated script under an LCS alignment."""
    gen_text = serialize_script(generated) if not isinstance(generated, str) else generated
    fin_text = serialize_script(final) if not isinstance(final, str) else final
    gen = _strip_ws(gen_text)
    fin = _strip_ws(fin_text)
    if not fin:
        raise EmptyFinal("final script has no non-whitespace characters")
    lcs = _lcs_length(gen, fin)
    return (len(fin) - lcs) / len(fin) * 100.0
