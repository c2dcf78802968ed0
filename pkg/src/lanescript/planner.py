"""Rule-based planner: lateral waypoint paths plus PID speed regulation.

Deliberately ignorant of other actors: dangerous maneuvers must be executable,
so nothing here ever inspects or avoids surrounding traffic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .world import Control, RoadLayout, lane_of


@dataclass(frozen=True)
class PlannerConfig:
    kp: float = 1.5
    ki: float = 0.1
    kd: float = 0.05
    integral_cap: float = 10.0
    a_max: float = 4.0
    b_max: float = 8.0
    lane_change_duration_s: float = 2.0


PEDESTRIAN_PLANNER = PlannerConfig(a_max=1.5, b_max=1.5)


@dataclass(frozen=True)
class PathPlan:
    kind: str  # "follow_lane" | "lane_change" | "walk"
    d_start: float
    d_target: float
    t_start: float
    duration_s: float
    walk_rate: float = 0.0  # signed m/s, walk plans only


@dataclass(frozen=True)
class PidState:
    kp: float = 1.5
    ki: float = 0.1
    kd: float = 0.05
    integral: float = 0.0
    prev_error: float = 0.0
    integral_cap: float = 10.0

    @classmethod
    def from_config(cls, cfg: PlannerConfig):
        return cls(kp=cfg.kp, ki=cfg.ki, kd=cfg.kd, integral_cap=cfg.integral_cap)


@dataclass(frozen=True)
class OffRoadLaneChange(Exception):
    lane: int
    direction: str

    def __str__(self):
        return f"lane change {self.direction} from lane {self.lane} would leave the road"


def plan_from_decision(decision, state, layout: RoadLayout, t_now: float,
                       cfg: PlannerConfig = PlannerConfig()):
    """Turn a decision into a lateral plan from the current lateral position.

    Returns (plan, warning) where warning is an OffRoadLaneChange instance when
    the requested change was coerced to follow-lane, else None.
    """
    lane = lane_of(state.d, layout)
    direction = decision.lane_change_direction
    if direction == "LEFT_LANE_CHANGE" and lane <= 1:
        return _follow(state, layout, t_now, cfg), OffRoadLaneChange(lane, "left")
    if direction == "RIGHT_LANE_CHANGE" and lane >= layout.lane_count:
        return _follow(state, layout, t_now, cfg), OffRoadLaneChange(lane, "right")
    if direction == "LEFT_LANE_CHANGE":
        target = layout.lane_center(lane - 1)
    elif direction == "RIGHT_LANE_CHANGE":
        target = layout.lane_center(lane + 1)
    else:
        return _follow(state, layout, t_now, cfg), None
    return (
        PathPlan(
            kind="lane_change",
            d_start=state.d,
            d_target=target,
            t_start=t_now + decision.lane_change_delay,
            duration_s=cfg.lane_change_duration_s,
        ),
        None,
    )


def _follow(state, layout, t_now, cfg):
    return PathPlan(
        kind="follow_lane",
        d_start=state.d,
        d_target=layout.lane_center(lane_of(state.d, layout)),
        t_start=t_now,
        duration_s=cfg.lane_change_duration_s,
    )


def walk_plan(heading: str, speed: float, state, t_now: float) -> PathPlan:
    rate = 0.0
    if heading == "cross_left":
        rate = -speed
    elif heading == "cross_right":
        rate = speed
    return PathPlan(
        kind="walk", d_start=state.d, d_target=state.d, t_start=t_now,
        duration_s=1.0, walk_rate=rate,
    )


def lateral_profile(plan: PathPlan, t: float) -> float:
    """Lateral position at time t: cosine blend between d_start and d_target."""
    if plan.kind == "walk":
        return plan.d_start + plan.walk_rate * max(0.0, t - plan.t_start)
    if t <= plan.t_start:
        return plan.d_start
    if t >= plan.t_start + plan.duration_s:
        return plan.d_target
    phase = (t - plan.t_start) / plan.duration_s
    blend = (1 - math.cos(math.pi * phase)) / 2
    return plan.d_start + (plan.d_target - plan.d_start) * blend


def pid_accel(pid: PidState, v: float, v_target: float, dt: float,
              a_max: float = 4.0, b_max: float = 8.0):
    """One PID update. Returns (commanded accel, next pid state)."""
    error = v_target - v
    derivative = (error - pid.prev_error) / dt
    raw = pid.kp * error + pid.ki * pid.integral + pid.kd * derivative
    # conditional integration: while the output is saturated in the error's
    # direction, accumulating more integral only causes overshoot later
    if (raw >= a_max and error > 0) or (raw <= -b_max and error < 0):
        integral = pid.integral
    else:
        integral = max(-pid.integral_cap, min(pid.integral_cap, pid.integral + error * dt))
    accel = pid.kp * error + pid.ki * integral + pid.kd * derivative
    accel = max(-b_max, min(a_max, accel))
    return accel, replace(pid, integral=integral, prev_error=error)


def control_step(plan: PathPlan, pid: PidState, state, target_speed: float,
                 t: float, dt: float, cfg: PlannerConfig = PlannerConfig()):
    """Per-frame control from plan + PID alone; other actors never enter here."""
    accel, pid_next = pid_accel(pid, state.v, target_speed, dt, cfg.a_max, cfg.b_max)
    lateral = lateral_profile(plan, t)
    return Control(accel_mps2=accel, lateral_m=lateral), pid_next
