"""Structured action expressions: the machine-executable mirror of action text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .conditions import format_number
from .errors import ScriptSyntaxError, UnitError

VEHICLE_KINDS = ("car", "truck", "bus", "ambulance", "police_car")
ACTOR_KINDS = VEHICLE_KINDS + ("pedestrian",)


@dataclass(frozen=True)
class Cruise:
    lane: int
    speed: float

    def render(self):
        return f"cruise(lane: {self.lane}, speed: {format_number(self.speed)})"


@dataclass(frozen=True)
class LaneChange:
    direction: str  # "left" | "right"
    target_speed: float
    delay: float

    def render(self):
        return (
            f"lane_change(direction: {self.direction}, "
            f"target_speed: {format_number(self.target_speed)}, "
            f"delay: {format_number(self.delay)})"
        )


@dataclass(frozen=True)
class Decelerate:
    target_speed: float

    def render(self):
        return f"decelerate(target_speed: {format_number(self.target_speed)})"


@dataclass(frozen=True)
class Stop:
    def render(self):
        return "stop"


@dataclass(frozen=True)
class Walk:
    direction: str  # "cross_left" | "cross_right" | "hold"
    speed: float

    def render(self):
        return f"walk(direction: {self.direction}, speed: {format_number(self.speed)})"


ActionExpr = object

_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*(.*?)\s*\))?\s*$", re.S)


def _parse_kwargs(body, line=None):
    out = {}
    if not body:
        return out
    for part in body.split(","):
        if ":" not in part:
            raise ScriptSyntaxError(f"expected 'key: value' in action, got {part.strip()!r}", line)
        key, _, value = part.partition(":")
        out[key.strip()] = value.strip()
    return out


def _num(kwargs, key, line, nonneg_label=None):
    if key not in kwargs:
        raise ScriptSyntaxError(f"action missing parameter {key!r}", line)
    try:
        value = float(kwargs[key])
    except ValueError:
        raise ScriptSyntaxError(f"bad number for {key!r}: {kwargs[key]!r}", line) from None
    if nonneg_label and value < 0:
        raise UnitError(f"{nonneg_label} must be >= 0, got {value}")
    return value


def parse_action(source: str, line=None):
    m = _CALL_RE.match(source)
    if m is None:
        raise ScriptSyntaxError(f"bad action expression {source!r}", line)
    name, body = m.group(1), m.group(2)
    kwargs = _parse_kwargs(body, line)
    if name == "cruise":
        lane = _num(kwargs, "lane", line)
        if lane < 1 or lane != int(lane):
            raise ScriptSyntaxError(f"cruise lane must be a positive integer, got {kwargs['lane']}", line)
        return Cruise(int(lane), _num(kwargs, "speed", line, "speed"))
    if name == "lane_change":
        direction = kwargs.get("direction")
        if direction not in ("left", "right"):
            raise ScriptSyntaxError(f"lane_change direction must be left|right, got {direction!r}", line)
        return LaneChange(
            direction,
            _num(kwargs, "target_speed", line, "target_speed"),
            _num(kwargs, "delay", line, "delay"),
        )
    if name == "decelerate":
        return Decelerate(_num(kwargs, "target_speed", line, "target_speed"))
    if name == "stop":
        if kwargs:
            raise ScriptSyntaxError("stop takes no parameters", line)
        return Stop()
    if name == "walk":
        direction = kwargs.get("direction")
        if direction not in ("cross_left", "cross_right", "hold"):
            raise ScriptSyntaxError(
                f"walk direction must be cross_left|cross_right|hold, got {direction!r}", line
            )
        return Walk(direction, _num(kwargs, "speed", line, "speed"))
    raise ScriptSyntaxError(f"unknown action {name!r}", line)


def serialize_action(expr) -> str:
    return expr.render()


def allowed_for_kind(expr, kind: str) -> bool:
    if isinstance(expr, Walk):
        return kind == "pedestrian"
    if isinstance(expr, (Cruise, LaneChange)):
        return kind in VEHICLE_KINDS
    return True  # decelerate/stop work for any actor
