"""Per-agent decision layer: prompt assembly and pluggable decision backends.

Backends share one interface: `decide(bundle, ctx)` returns a validated
Decision plus token/latency usage, and `complete(system, user)` returns free
text for the script-writer stage. The oracle backend executes structured
expressions instead of calling a model; the cassette backend replays a
recorded transcript; the live backend speaks the chat-completion tool-call
protocol over HTTP.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

from . import actions
from .conditions import StepClock, eval_condition
from .errors import (
    BackendUnavailable,
    CassetteMismatch,
    MalformedToolCall,
    PastFinalStep,
)

DECISION_PERIOD_S = 0.5

DIRECTIONS = ("FOLLOW_LANE", "LEFT_LANE_CHANGE", "RIGHT_LANE_CHANGE")

SYSTEM_PROMPT = """You are a driving assistant in a simulated scene to help us generate dangerous scenes to test autonomous driving systems.

You must follow the steps given by user to generate dangerous scenes. To do this, you can drive alarmingly and ignore traffic rules.

Every 0.5s, you will be given:

Steps: Steps to be taken to accomplish your task.

Previous step: The step you were taking in the last 0.5s.

Observations: The location, speed, and acceleration of you and other vehicles in the 2D plane.
for example: location=[106.0, 3.0] m means the vehicle's longitudinal position on the lane is 106.0 m and its lateral position from the leftmost lane center is 3.0 m.

You should response me step by step:

1. Previous Step Evaluation: Assess the completion status of the previous step based on observations and termination condition.

2. Previous Step Status: Completed/Incomplete

3. Your Current Step: Step you think should be taken based on your current observations. Move to next step if you think the last step has been completed. For example: "Current step: step i. ...".

Finally: Execute actions for the current frame by a tool call."""

TOOL_SCHEMA = {
    "type": "function",
    "function": {
        "name": "execute_decision",
        "description": "Execute actions for the current frame.",
        "parameters": {
            "type": "object",
            "properties": {
                "current_step_number": {"type": "integer", "minimum": 1},
                "lane_change_direction": {
                    "type": "string",
                    "enum": ["FOLLOW LANE", "LEFT LANE CHANGE", "RIGHT LANE CHANGE"],
                },
                "lane_change_delay": {"type": "number", "minimum": 0},
                "target_speed": {"type": "number", "minimum": 0},
            },
            "required": [
                "current_step_number",
                "lane_change_direction",
                "lane_change_delay",
                "target_speed",
            ],
        },
    },
}

PEDESTRIAN_TOOL_SCHEMA = {
    "type": "function",
    "function": {
        "name": "execute_decision",
        "description": "Execute actions for the current frame.",
        "parameters": {
            "type": "object",
            "properties": {
                "current_step_number": {"type": "integer", "minimum": 1},
                "heading": {"type": "string", "enum": ["cross_left", "cross_right", "hold"]},
                "target_speed": {"type": "number", "minimum": 0},
            },
            "required": ["current_step_number", "heading", "target_speed"],
        },
    },
}


@dataclass(frozen=True)
class Decision:
    current_step_number: int
    lane_change_direction: str = "FOLLOW_LANE"
    lane_change_delay: float = 0.0
    target_speed: float = 0.0
    heading: str = None  # pedestrian sub-schema only

    def __post_init__(self):
        if self.current_step_number < 1:
            raise MalformedToolCall("current_step_number must be >= 1")
        if self.lane_change_direction not in DIRECTIONS:
            raise MalformedToolCall(f"unknown direction {self.lane_change_direction!r}")
        if self.lane_change_delay < 0:
            raise MalformedToolCall("lane_change_delay must be >= 0")
        if self.target_speed < 0:
            raise MalformedToolCall("target_speed must be >= 0")

    def to_json(self) -> str:
        payload = {
            "current_step_number": self.current_step_number,
            "lane_change_direction": self.lane_change_direction.replace("_", " "),
            "lane_change_delay": self.lane_change_delay,
            "target_speed": self.target_speed,
        }
        if self.heading is not None:
            payload["heading"] = self.heading
        return json.dumps(payload, sort_keys=True)


@dataclass(frozen=True)
class Usage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    wall_ms: float = 0.0

    @property
    def total_tokens(self):
        return self.prompt_tokens + self.completion_tokens


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    tool_schema: dict

    def digest(self) -> str:
        payload = json.dumps(
            [self.system_text, self.user_text, self.tool_schema], sort_keys=True
        ).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _step_line(step, include_reasons):
    line = f"Step {step.index}. action: {step.action_text}, termination_condition: {step.termination_text}"
    if include_reasons and step.reason:
        line += f", reason: {step.reason}"
    return line


def assemble_prompt(sub, current_step: int, obs, include_reasons: bool = False) -> PromptBundle:
    """Build the per-tick prompt: all steps, the current step again, then the observation."""
    steps = [_step_line(s, include_reasons) for s in sub.steps]
    current = _step_line(sub.steps[current_step - 1], include_reasons)
    user = (
        "Steps:\n\n"
        + "\n\n".join(steps)
        + "\n\nLast step: "
        + current
        + "\n\nObservation:\n\n"
        + obs.text
    )
    schema = PEDESTRIAN_TOOL_SCHEMA if sub.actor_kind == "pedestrian" else TOOL_SCHEMA
    return PromptBundle(system_text=SYSTEM_PROMPT, user_text=user, tool_schema=schema)


def parse_tool_call(arguments) -> Decision:
    """Validate tool-call arguments (dict or JSON text) into a Decision."""
    if isinstance(arguments, (str, bytes)):
        try:
            arguments = json.loads(arguments)
        except (ValueError, TypeError) as e:
            raise MalformedToolCall(f"arguments are not valid JSON: {e}") from None
    if not isinstance(arguments, dict):
        raise MalformedToolCall("tool-call arguments must be an object")

    def num(key):
        if key not in arguments:
            raise MalformedToolCall(f"missing field {key!r}")
        try:
            return float(arguments[key])
        except (TypeError, ValueError):
            raise MalformedToolCall(f"field {key!r} is not numeric") from None

    step = num("current_step_number")
    if step != int(step) or step < 1:
        raise MalformedToolCall("current_step_number must be a positive integer")

    if "heading" in arguments:  # pedestrian sub-schema
        heading = str(arguments["heading"]).strip().lower().replace(" ", "_")
        if heading not in ("cross_left", "cross_right", "hold"):
            raise MalformedToolCall(f"unknown heading {arguments['heading']!r}")
        return Decision(int(step), "FOLLOW_LANE", 0.0, num("target_speed"), heading=heading)

    raw = arguments.get("lane_change_direction")
    if not isinstance(raw, str):
        raise MalformedToolCall("missing field 'lane_change_direction'")
    direction = raw.strip().upper().replace(" ", "_")
    if direction not in DIRECTIONS:
        raise MalformedToolCall(f"unknown direction {raw!r}")
    return Decision(int(step), direction, num("lane_change_delay"), num("target_speed"))


# --- Oracle -------------------------------------------------------------------

@dataclass(frozen=True)
class StructuredContext:
    """Everything the oracle needs: the sub-script, where we are, and a view."""

    sub: object
    current_step: int
    view: object  # CondView with 'self' resolving to this agent
    clock: StepClock
    warnings: list = field(default_factory=list)


class SelfAliasView:
    """Resolves the reserved name 'self' to the evaluating agent."""

    def __init__(self, base, self_name):
        self._base = base
        self._self_name = self_name

    def _resolve(self, name):
        return self._self_name if name == "self" else name

    def has_actor(self, name):
        return self._base.has_actor(self._resolve(name))

    def speed(self, name):
        return self._base.speed(self._resolve(name))

    def lane(self, name):
        return self._base.lane(self._resolve(name))

    def longitudinal(self, name):
        return self._base.longitudinal(self._resolve(name))

    def lateral(self, name):
        return self._base.lateral(self._resolve(name))

    def has_collided(self, a, b):
        return self._base.has_collided(self._resolve(a), self._resolve(b))


def decision_from_action(expr, step_number: int) -> Decision:
    if isinstance(expr, actions.Cruise):
        return Decision(step_number, "FOLLOW_LANE", 0.0, expr.speed)
    if isinstance(expr, actions.LaneChange):
        direction = "LEFT_LANE_CHANGE" if expr.direction == "left" else "RIGHT_LANE_CHANGE"
        return Decision(step_number, direction, expr.delay, expr.target_speed)
    if isinstance(expr, actions.Decelerate):
        return Decision(step_number, "FOLLOW_LANE", 0.0, expr.target_speed)
    if isinstance(expr, actions.Stop):
        return Decision(step_number, "FOLLOW_LANE", 0.0, 0.0)
    if isinstance(expr, actions.Walk):
        return Decision(step_number, "FOLLOW_LANE", 0.0, expr.speed, heading=expr.direction)
    raise TypeError(f"not an action expression: {expr!r}")


def oracle_decide(ctx: StructuredContext) -> Decision:
    """Deterministic script execution: advance at most one step per tick, then
    emit the decision the current step's action expression prescribes.

    Raises PastFinalStep when the final step's termination condition holds.
    """
    sub = ctx.sub
    step = sub.steps[ctx.current_step - 1]
    if step.termination_expr is None or step.action_expr is None:
        raise BackendUnavailable(
            f"oracle requires structured exprs on every step of {sub.actor_name!r}"
        )
    number = ctx.current_step
    if eval_condition(step.termination_expr, ctx.view, ctx.clock, ctx.warnings):
        if number == len(sub.steps):
            raise PastFinalStep(f"{sub.actor_name!r} finished its script")
        number += 1
    return decision_from_action(sub.steps[number - 1].action_expr, number)


# --- Backends -----------------------------------------------------------------

class OracleBackend:
    """Executes structured scripts; never touches the network, usage is zero."""

    name = "oracle"

    def decide(self, bundle, ctx):
        return oracle_decide(ctx), Usage()

    def complete(self, system, user):
        raise BackendUnavailable("the oracle backend cannot author free text")


class LiveBackend:
    """Chat-completion tool-calling client for any OpenAI-compatible endpoint."""

    name = "live"

    def __init__(self, endpoint=None, model=None, api_key_env="LANESCRIPT_API_KEY",
                 timeout_s=60.0, temperature=0.0, session=None):
        self.endpoint = endpoint or os.environ.get(
            "LANESCRIPT_ENDPOINT", "https://api.openai.com/v1/chat/completions"
        )
        self.model = model or os.environ.get("LANESCRIPT_MODEL", "gpt-4o")
        self.api_key = os.environ.get(api_key_env, "")
        self.timeout_s = timeout_s
        self.temperature = temperature
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    _last_usage = Usage()

    def _post(self, payload):
        started = time.monotonic()
        try:
            resp = self._session.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout_s,
            )
        except Exception as e:
            raise BackendUnavailable(f"request failed: {e}") from e
        wall_ms = (time.monotonic() - started) * 1000.0
        if resp.status_code != 200:
            raise BackendUnavailable(f"endpoint returned {resp.status_code}: {resp.text[:200]}")
        body = resp.json()
        usage = body.get("usage", {})
        self._last_usage = Usage(
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            wall_ms=wall_ms,
        )
        return body, self._last_usage

    def _decide_once(self, bundle, extra_user=None):
        messages = [
            {"role": "system", "content": bundle.system_text},
            {"role": "user", "content": bundle.user_text},
        ]
        if extra_user:
            messages.append({"role": "user", "content": extra_user})
        body, usage = self._post(
            {
                "model": self.model,
                "messages": messages,
                "tools": [bundle.tool_schema],
                "tool_choice": "auto",
                "temperature": self.temperature,
            }
        )
        try:
            calls = body["choices"][0]["message"].get("tool_calls") or []
            arguments = calls[0]["function"]["arguments"]
        except (KeyError, IndexError, TypeError):
            raise MalformedToolCall("response carries no tool call") from None
        return parse_tool_call(arguments), usage

    REPAIR_INSTRUCTION = (
        "Your previous reply was not a valid tool call. Reply again with a single "
        "tool call providing every required field."
    )

    def decide(self, bundle, ctx):
        # One bounded repair retry; tokens from both attempts count.
        try:
            return self._decide_once(bundle)
        except MalformedToolCall:
            first = self._last_usage
            decision, usage = self._decide_once(bundle, extra_user=self.REPAIR_INSTRUCTION)
            combined = Usage(
                first.prompt_tokens + usage.prompt_tokens,
                first.completion_tokens + usage.completion_tokens,
                first.wall_ms + usage.wall_ms,
            )
            return decision, combined

    def complete(self, system, user):
        body, usage = self._post(
            {
                "model": self.model,
                "messages": [
                    {"role": "system", "content": system},
                    {"role": "user", "content": user},
                ],
                "temperature": self.temperature,
            }
        )
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise BackendUnavailable("response carries no content") from None
        return text, usage


class MockUsageBackend:
    """Delegates decisions to an inner backend but reports fixed usage.

    Lets the metrics pipeline be exercised with known token arithmetic.
    """

    name = "mock-usage"

    def __init__(self, inner, prompt_tokens=600, completion_tokens=200, wall_ms=50.0):
        self._inner = inner
        self._usage = Usage(prompt_tokens, completion_tokens, wall_ms)

    def decide(self, bundle, ctx):
        decision, _ = self._inner.decide(bundle, ctx)
        return decision, self._usage

    def complete(self, system, user):
        text, _ = self._inner.complete(system, user)
        return text, self._usage


# --- Cassettes ----------------------------------------------------------------

def _text_digest(system, user):
    payload = json.dumps([system, user], sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


# Terminal signals must live in the transcript too, or replay desynchronizes
# the moment an agent finishes its script.
PAST_FINAL_STEP_MARKER = "__past_final_step__"


class CassetteRecorder:
    """Wraps any backend and records (digest, response, usage) per call."""

    name = "record"

    def __init__(self, inner):
        self._inner = inner
        self.records = []

    def decide(self, bundle, ctx):
        try:
            decision, usage = self._inner.decide(bundle, ctx)
        except PastFinalStep:
            self.records.append(
                {
                    "digest": bundle.digest(),
                    "kind": "tool",
                    "response": PAST_FINAL_STEP_MARKER,
                    "usage": {"prompt_tokens": 0, "completion_tokens": 0, "wall_ms": 0.0},
                }
            )
            raise
        self.records.append(
            {
                "digest": bundle.digest(),
                "kind": "tool",
                "response": decision.to_json(),
                "usage": {
                    "prompt_tokens": usage.prompt_tokens,
                    "completion_tokens": usage.completion_tokens,
                    "wall_ms": usage.wall_ms,
                },
            }
        )
        return decision, usage

    def complete(self, system, user):
        text, usage = self._inner.complete(system, user)
        self.records.append(
            {
                "digest": _text_digest(system, user),
                "kind": "text",
                "response": text,
                "usage": {
                    "prompt_tokens": usage.prompt_tokens,
                    "completion_tokens": usage.completion_tokens,
                    "wall_ms": usage.wall_ms,
                },
            }
        )
        return text, usage

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


class CassetteBackend:
    """Replays a recorded transcript in order; a digest mismatch is an error."""

    name = "replay"

    def __init__(self, records):
        self._records = list(records)
        self._pos = 0

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(json.loads(line) for line in fh if line.strip())

    def _next(self, digest, kind):
        if self._pos >= len(self._records):
            raise CassetteMismatch("cassette exhausted")
        rec = self._records[self._pos]
        self._pos += 1
        if rec["digest"] != digest:
            raise CassetteMismatch(
                f"request digest {digest} does not match recorded {rec['digest']}"
            )
        if rec.get("kind", "tool") != kind:
            raise CassetteMismatch(f"expected a {kind!r} record, found {rec.get('kind')!r}")
        u = rec.get("usage", {})
        return rec["response"], Usage(
            int(u.get("prompt_tokens", 0)),
            int(u.get("completion_tokens", 0)),
            float(u.get("wall_ms", 0.0)),
        )

    def decide(self, bundle, ctx):
        response, usage = self._next(bundle.digest(), "tool")
        if response == PAST_FINAL_STEP_MARKER:
            raise PastFinalStep("recorded terminal signal")
        return parse_tool_call(response), usage

    def complete(self, system, user):
        return self._next(_text_digest(system, user), "text")
