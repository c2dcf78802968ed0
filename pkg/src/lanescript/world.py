"""Deterministic fixed-timestep kinematic world in Frenet coordinates.

Lane i's center sits at lateral d = (i-1) * lane_width; lane 1 is the lateral
origin. Dynamics are point-mass longitudinal plus a prescribed lateral
position per frame; collision boxes are axis-aligned in (s, d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import MissingControl, UnknownActor

DEFAULT_DT = 0.05
ACCEL_WINDOW_S = 0.5  # backward difference window for reported acceleration

DEFAULT_FOOTPRINTS = {
    "car": (4.5, 2.0),
    "truck": (8.0, 2.5),
    "bus": (11.0, 2.5),
    "ambulance": (5.0, 2.2),
    "police_car": (5.0, 2.2),
    "pedestrian": (0.5, 0.5),
}

SPEED_CAPS = {"pedestrian": 3.0}
DEFAULT_SPEED_CAP = 40.0


def default_footprint(kind):
    return DEFAULT_FOOTPRINTS[kind]


def speed_cap(kind):
    return SPEED_CAPS.get(kind, DEFAULT_SPEED_CAP)


@dataclass(frozen=True)
class RoadLayout:
    lane_count: int
    lane_width_m: float = 3.5
    length_m: float = 1000.0
    curvature_profile: tuple = ()  # (s_start, s_end, radius_m); rendering only

    def lane_center(self, lane_index: int) -> float:
        return (lane_index - 1) * self.lane_width_m


def lane_of(lateral: float, layout: RoadLayout) -> int:
    """Nearest lane index; exact midpoints tie toward the lower index."""
    idx = 1 + math.ceil(lateral / layout.lane_width_m - 0.5)
    return max(1, min(layout.lane_count, idx))


@dataclass(frozen=True)
class ActorState:
    name: str
    kind: str
    s: float
    d: float
    v: float
    a: float = 0.0
    footprint: tuple = None
    alive: bool = True
    speed_history: tuple = ()  # most recent last; used for the 0.5 s backward diff

    def __post_init__(self):
        if self.footprint is None:
            object.__setattr__(self, "footprint", default_footprint(self.kind))


@dataclass(frozen=True)
class CollisionEvent:
    t: float
    actor_a: str
    actor_b: str
    overlap_m: float


@dataclass(frozen=True)
class WorldState:
    layout: RoadLayout
    t: float = 0.0
    actors: dict = field(default_factory=dict)
    collisions: tuple = ()
    active_contacts: frozenset = frozenset()  # pairs currently overlapping


def spawn(world: WorldState, state: ActorState) -> WorldState:
    if state.name in world.actors:
        raise ValueError(f"actor {state.name!r} already spawned")
    actors = dict(world.actors)
    actors[state.name] = replace(state, speed_history=(state.v,))
    return replace(world, actors=actors)


def despawn(world: WorldState, name: str) -> WorldState:
    actors = dict(world.actors)
    if name not in actors:
        raise UnknownActor(name)
    del actors[name]
    return replace(world, actors=actors)


@dataclass(frozen=True)
class Control:
    accel_mps2: float
    lateral_m: float


def step_world(world: WorldState, controls: dict, dt: float = DEFAULT_DT) -> WorldState:
    """Advance one frame. Every alive actor needs a control; order is insertion order."""
    window = max(1, round(ACCEL_WINDOW_S / dt))
    new_actors = {}
    for name, st in world.actors.items():
        if not st.alive:
            new_actors[name] = st
            continue
        if name not in controls:
            raise MissingControl(f"no control for alive actor {name!r}")
        ctl = controls[name]
        v_new = min(max(st.v + ctl.accel_mps2 * dt, 0.0), speed_cap(st.kind))
        s_new = st.s + st.v * dt
        hist = (st.speed_history + (v_new,))[-(window + 1):]
        v_old = hist[0]
        span = (len(hist) - 1) * dt
        a_rep = (v_new - v_old) / span if span > 0 else 0.0
        new_actors[name] = replace(
            st, s=s_new, d=ctl.lateral_m, v=v_new, a=a_rep, speed_history=hist
        )
    new_world = replace(world, t=world.t + dt, actors=new_actors)
    return _record_collisions(new_world)


def _overlap(sa, da, fa, sb, db, fb):
    ds = (fa[0] + fb[0]) / 2 - abs(sa - sb)
    dd = (fa[1] + fb[1]) / 2 - abs(da - db)
    if ds > 0 and dd > 0:
        return min(ds, dd)
    return None


def detect_collisions(world: WorldState):
    """Strictly overlapping axis-aligned boxes, pairs in lexicographic name order."""
    out = []
    names = sorted(n for n, st in world.actors.items() if st.alive)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = world.actors[names[i]], world.actors[names[j]]
            pen = _overlap(a.s, a.d, a.footprint, b.s, b.d, b.footprint)
            if pen is not None:
                out.append(CollisionEvent(world.t, names[i], names[j], pen))
    return out


def _record_collisions(world: WorldState) -> WorldState:
    current = detect_collisions(world)
    pairs = frozenset((e.actor_a, e.actor_b) for e in current)
    # one event per contiguous contact episode
    fresh = tuple(e for e in current if (e.actor_a, e.actor_b) not in world.active_contacts)
    return replace(world, collisions=world.collisions + fresh, active_contacts=pairs)


@dataclass(frozen=True)
class WorldView:
    self_state: ActorState
    others: tuple  # of (ActorState, (lane_relation, long_relation))


def relation_of(self_state: ActorState, other: ActorState, layout: RoadLayout):
    lane_self = lane_of(self_state.d, layout)
    lane_other = lane_of(other.d, layout)
    if lane_other == lane_self:
        lane_rel = "same_lane"
    elif lane_other == lane_self - 1:
        lane_rel = "left_lane"
    elif lane_other == lane_self + 1:
        lane_rel = "right_lane"
    else:
        lane_rel = "other_lane"
    long_rel = "ahead" if other.s >= self_state.s else "behind"
    return (lane_rel, long_rel)


def observation_view(world: WorldState, actor: str, sensing_radius=None) -> WorldView:
    if actor not in world.actors or not world.actors[actor].alive:
        raise UnknownActor(actor)
    me = world.actors[actor]
    others = []
    for name, st in world.actors.items():
        if name == actor or not st.alive:
            continue
        if sensing_radius is not None and abs(st.s - me.s) > sensing_radius:
            continue
        others.append((st, relation_of(me, st, world.layout)))
    return WorldView(self_state=me, others=tuple(others))


class WorldCondView:
    """Adapter exposing a WorldState to the condition evaluator."""

    def __init__(self, world: WorldState):
        self._world = world

    def has_actor(self, name):
        st = self._world.actors.get(name)
        return st is not None and st.alive

    def speed(self, name):
        return self._world.actors[name].v

    def lane(self, name):
        return lane_of(self._world.actors[name].d, self._world.layout)

    def longitudinal(self, name):
        return self._world.actors[name].s

    def lateral(self, name):
        return self._world.actors[name].d

    def has_collided(self, a, b):
        lo, hi = min(a, b), max(a, b)
        return any(e.actor_a == lo and e.actor_b == hi for e in self._world.collisions)
