"""Simulation loop: 20 Hz physics interleaved with 0.5 s decision ticks.

Time is lockstep: the simulation clock halts while a backend call is in
flight, so wall latency lands in usage records and never in physics.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from .conditions import StepClock
from .decisions import SelfAliasView, StructuredContext, assemble_prompt
from .encoder import encode_observation
from .errors import LanescriptError, PastFinalStep
from .planner import (
    PathPlan,
    PidState,
    PlannerConfig,
    PEDESTRIAN_PLANNER,
    control_step,
    plan_from_decision,
    walk_plan,
)
from .script_model import Script, validate_script
from .world import (
    ActorState,
    Control,
    RoadLayout,
    WorldCondView,
    WorldState,
    despawn,
    observation_view,
    spawn,
    step_world,
)

VUT_NAME = "VUT"


@dataclass(frozen=True)
class VutSpawn:
    lane_index: int
    longitudinal_m: float
    speed_mps: float
    kind: str = "car"


@dataclass(frozen=True)
class RunConfig:
    dt: float = 0.05
    decision_period: float = 0.5
    max_sim_seconds: float = 30.0
    seed: int = 0
    despawn_on_finish: bool = False
    strict_backend_errors: bool = False
    include_reasons: bool = False
    vut_policy: str = "constant_speed"
    vut_spawn: VutSpawn = None
    planner: PlannerConfig = PlannerConfig()

    def __post_init__(self):
        frames = self.decision_period / self.dt
        if abs(frames - round(frames)) > 1e-9:
            raise ValueError("decision_period must be an integer multiple of dt")

    @property
    def frames_per_tick(self) -> int:
        return round(self.decision_period / self.dt)


# --- VUT policies ---------------------------------------------------------------

class ConstantSpeedPolicy:
    """Holds spawn speed and lane; the baseline non-reactive ego."""

    def __init__(self, layout, spawn_state, cfg: PlannerConfig):
        self._target = spawn_state.v
        self._lateral = spawn_state.d
        self._pid = PidState.from_config(cfg)
        self._cfg = cfg

    def __call__(self, view, dt):
        from .planner import pid_accel

        accel, self._pid = pid_accel(
            self._pid, view.self_state.v, self._target, dt, self._cfg.a_max, self._cfg.b_max
        )
        return Control(accel_mps2=accel, lateral_m=self._lateral)


class BrakingFollowerPolicy(ConstantSpeedPolicy):
    """Like constant speed, but emergency-brakes when a same-lane gap closes."""

    def __init__(self, layout, spawn_state, cfg, brake_gap_m=12.0):
        super().__init__(layout, spawn_state, cfg)
        self._brake_gap = brake_gap_m

    def __call__(self, view, dt):
        me = view.self_state
        for st, (lane_rel, long_rel) in view.others:
            if lane_rel == "same_lane" and long_rel == "ahead" and st.s - me.s < self._brake_gap:
                return Control(accel_mps2=-8.0, lateral_m=self._lateral)
        return super().__call__(view, dt)


VUT_POLICIES = {
    "constant_speed": ConstantSpeedPolicy,
    "braking_follower": BrakingFollowerPolicy,
}


def make_vut_policy(name, layout, spawn_state, cfg):
    if name not in VUT_POLICIES:
        raise LanescriptError(f"unknown VUT policy {name!r}")
    return VUT_POLICIES[name](layout, spawn_state, cfg)


# --- Trace ----------------------------------------------------------------------

def _r(x):
    return round(float(x), 6)


@dataclass
class Trace:
    header: dict
    records: list = field(default_factory=list)

    def add_frame(self, world: WorldState):
        self.records.append(
            {
                "kind": "frame",
                "t": _r(world.t),
                "actors": [
                    {
                        "name": st.name,
                        "actor_kind": st.kind,
                        "s": _r(st.s),
                        "d": _r(st.d),
                        "v": _r(st.v),
                        "a": _r(st.a),
                    }
                    for st in world.actors.values()
                    if st.alive
                ],
            }
        )

    def add_event(self, t, event, **fields):
        rec = {"kind": "event", "t": _r(t), "event": event}
        rec.update(fields)
        self.records.append(rec)

    # --- queries used by checkers and tests ---

    def frames(self):
        return [r for r in self.records if r["kind"] == "frame"]

    def events(self, event=None, agent=None):
        out = []
        for r in self.records:
            if r["kind"] != "event":
                continue
            if event is not None and r["event"] != event:
                continue
            if agent is not None and r.get("agent") != agent:
                continue
            out.append(r)
        return out

    def series(self, actor):
        """Time series [(t, s, d, v, a)] for one actor."""
        out = []
        for fr in self.frames():
            for a in fr["actors"]:
                if a["name"] == actor:
                    out.append((fr["t"], a["s"], a["d"], a["v"], a["a"]))
        return out

    @property
    def sim_seconds(self):
        frames = self.frames()
        if len(frames) < 2:
            return 0.0
        return frames[-1]["t"] - frames[0]["t"]

    def layout(self) -> RoadLayout:
        lay = self.header["layout"]
        return RoadLayout(
            lane_count=lay["lanes"],
            lane_width_m=lay["lane_width_m"],
            length_m=lay["length_m"],
        )

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header, sort_keys=True, separators=(",", ":"))]
        for rec in self.records:
            lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str):
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not lines:
            raise LanescriptError("empty trace document")
        return cls(header=lines[0], records=lines[1:])

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_jsonl(fh.read())


# --- Agents ---------------------------------------------------------------------

@dataclass
class AgentRuntime:
    sub: object
    current_step: int = 1
    plan: PathPlan = None
    pid: PidState = None
    target_speed: float = 0.0
    last_decision: object = None
    step_entered_at: float = 0.0
    finished: bool = False
    aborted: bool = False

    @property
    def name(self):
        return self.sub.actor_name

    @property
    def is_pedestrian(self):
        return self.sub.actor_kind == "pedestrian"


def _planner_cfg(agent, config):
    return PEDESTRIAN_PLANNER if agent.is_pedestrian else config.planner


def _apply_decision(agent, decision, world, t, config, trace):
    if decision.current_step_number != agent.current_step:
        trace.add_event(
            t,
            "step_transition",
            agent=agent.name,
            from_step=agent.current_step,
            to_step=decision.current_step_number,
        )
        agent.current_step = decision.current_step_number
        agent.step_entered_at = t
    if decision == agent.last_decision and agent.plan is not None:
        # planner only receives "a new decision"; a repeat of the standing
        # decision must not restart an in-progress maneuver
        return
    agent.last_decision = decision
    state = world.actors[agent.name]
    cfg = _planner_cfg(agent, config)
    if agent.is_pedestrian and decision.heading is not None:
        agent.plan = walk_plan(decision.heading, decision.target_speed, state, t)
        agent.target_speed = 0.0  # pedestrians move laterally; longitudinal stays put
    else:
        plan, warning = plan_from_decision(decision, state, world.layout, t, cfg)
        agent.plan = plan
        agent.target_speed = decision.target_speed
        if warning is not None:
            trace.add_event(t, "warning", agent=agent.name, warning="off_road_lane_change",
                            detail=str(warning))


def tick_agents(world, agents, backend, t, config, trace, tick_index):
    """One decision tick: agents in script order, each applied before the next frame."""
    for agent in agents:
        if agent.finished or agent.aborted:
            continue
        view = observation_view(world, agent.name)
        obs = encode_observation(view, world.layout)
        bundle = assemble_prompt(agent.sub, agent.current_step, obs, config.include_reasons)
        ctx = StructuredContext(
            sub=agent.sub,
            current_step=agent.current_step,
            view=SelfAliasView(WorldCondView(world), agent.name),
            clock=StepClock(elapsed=t - agent.step_entered_at),
        )
        try:
            decision, usage = backend.decide(bundle, ctx)
        except PastFinalStep:
            agent.finished = True
            trace.add_event(t, "finished", agent=agent.name, step=agent.current_step)
            continue
        except LanescriptError as e:
            if config.strict_backend_errors:
                raise
            agent.aborted = True
            trace.add_event(t, "agent_error", agent=agent.name, error=str(e))
            continue
        trace.add_event(
            t,
            "decision",
            tick=tick_index,
            agent=agent.name,
            decision={
                "current_step_number": decision.current_step_number,
                "lane_change_direction": decision.lane_change_direction,
                "lane_change_delay": _r(decision.lane_change_delay),
                "target_speed": _r(decision.target_speed),
                **({"heading": decision.heading} if decision.heading else {}),
            },
            usage={
                "prompt_tokens": usage.prompt_tokens,
                "completion_tokens": usage.completion_tokens,
                "wall_ms": _r(usage.wall_ms),
            },
        )
        _apply_decision(agent, decision, world, t, config, trace)


# --- Main loop --------------------------------------------------------------------

def _initial_world(script, layout, config):
    world = WorldState(layout=layout)
    for sub in script.actors:
        ini = sub.initial
        world = spawn(
            world,
            ActorState(
                name=sub.actor_name,
                kind=sub.actor_kind,
                s=ini.longitudinal_m,
                d=layout.lane_center(ini.lane_index),
                v=ini.speed_mps,
                footprint=sub.footprint,
            ),
        )
    if config.vut_spawn is not None:
        vs = config.vut_spawn
        world = spawn(
            world,
            ActorState(
                name=VUT_NAME,
                kind=vs.kind,
                s=vs.longitudinal_m,
                d=layout.lane_center(vs.lane_index),
                v=vs.speed_mps,
            ),
        )
    return world


def _header(script, layout, config, backend):
    from .script_model import serialize_script

    digest = hashlib.sha256(serialize_script(script).encode()).hexdigest()[:16]
    return {
        "kind": "header",
        "title": script.title,
        "script_digest": digest,
        "backend": getattr(backend, "name", "unknown"),
        "layout": {
            "lanes": layout.lane_count,
            "lane_width_m": layout.lane_width_m,
            "length_m": layout.length_m,
        },
        "config": {
            "dt": config.dt,
            "decision_period": config.decision_period,
            "max_sim_seconds": config.max_sim_seconds,
            "seed": config.seed,
            "despawn_on_finish": config.despawn_on_finish,
            "vut_policy": config.vut_policy if config.vut_spawn else None,
        },
        "aborted": False,
    }


def run_scenario(script: Script, layout: RoadLayout, config: RunConfig, backend,
                 vut_policy=None) -> Trace:
    """Execute a script to completion (or max_sim_seconds) and return the trace."""
    report = validate_script(script, layout)
    if not report.ok:
        detail = "; ".join(f"{v.code}({v.actor}): {v.detail}" for v in report.violations)
        raise LanescriptError(f"script is not runnable: {detail}")

    world = _initial_world(script, layout, config)
    agents = [AgentRuntime(sub=sub, pid=PidState.from_config(_planner_cfg_for(sub, config)))
              for sub in script.actors]
    for agent in agents:
        state = world.actors[agent.name]
        agent.plan = PathPlan("follow_lane", state.d, state.d, 0.0, config.planner.lane_change_duration_s)
        agent.target_speed = state.v

    if vut_policy is None and config.vut_spawn is not None:
        vut_policy = make_vut_policy(
            config.vut_policy, layout, world.actors[VUT_NAME], config.planner
        )

    trace = Trace(header=_header(script, layout, config, backend))
    trace.add_frame(world)
    seen_collisions = 0

    frame = 0
    total_frames = round(config.max_sim_seconds / config.dt)
    while frame < total_frames:
        t = frame * config.dt
        if any(not (a.finished or a.aborted) for a in agents):
            pass
        else:
            break
        if frame % config.frames_per_tick == 0:
            tick = frame // config.frames_per_tick
            try:
                tick_agents(world, agents, backend, t, config, trace, tick)
            except LanescriptError as e:
                trace.header["aborted"] = True
                trace.add_event(t, "run_aborted", error=str(e))
                return trace
            if config.despawn_on_finish:
                for agent in agents:
                    if agent.finished and agent.name in world.actors:
                        world = despawn(world, agent.name)

        controls = {}
        for agent in agents:
            if agent.name not in world.actors:
                continue
            state = world.actors[agent.name]
            cfg = _planner_cfg(agent, config)
            ctl, agent.pid = control_step(
                agent.plan, agent.pid, state, agent.target_speed, t, config.dt, cfg
            )
            controls[agent.name] = ctl
        if config.vut_spawn is not None and VUT_NAME in world.actors:
            vut_view = observation_view(world, VUT_NAME)
            controls[VUT_NAME] = vut_policy(vut_view, config.dt)

        world = step_world(world, controls, config.dt)
        frame += 1
        trace.add_frame(world)
        for event in world.collisions[seen_collisions:]:
            trace.add_event(
                event.t, "collision",
                actor_a=event.actor_a, actor_b=event.actor_b, overlap_m=_r(event.overlap_m),
            )
        seen_collisions = len(world.collisions)

    return trace


def _planner_cfg_for(sub, config):
    return PEDESTRIAN_PLANNER if sub.actor_kind == "pedestrian" else config.planner
