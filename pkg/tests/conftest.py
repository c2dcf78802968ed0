import json

import pytest

from lanescript.world import RoadLayout


@pytest.fixture
def highway():
    return RoadLayout(lane_count=4, lane_width_m=3.5, length_m=1000.0)


@pytest.fixture
def urban():
    return RoadLayout(lane_count=3, lane_width_m=3.5, length_m=600.0)


class DictCondView:
    """Condition view backed by plain dicts, independent of the world module."""

    def __init__(self, actors, collided=()):
        # actors: {name: {"speed":..., "lane":..., "long":..., "lat":...}}
        self.actors = actors
        self.collided = {tuple(sorted(p)) for p in collided}

    def has_actor(self, name):
        return name in self.actors

    def speed(self, name):
        return self.actors[name]["speed"]

    def lane(self, name):
        return self.actors[name]["lane"]

    def longitudinal(self, name):
        return self.actors[name]["long"]

    def lateral(self, name):
        return self.actors[name]["lat"]

    def has_collided(self, a, b):
        return tuple(sorted((a, b))) in self.collided


def synth_trace(layout, actor_rows, collisions=(), aborted=False, dt=0.05):
    """Build a Trace by hand for checker tests.

    actor_rows: {name: [(t, s, d, v), ...]} — every actor must share the same
    time axis. Returns a lanescript Trace.
    """
    from lanescript.orchestrator import Trace

    header = {
        "kind": "header",
        "title": "synthetic",
        "script_digest": "0" * 16,
        "backend": "synthetic",
        "layout": {
            "lanes": layout.lane_count,
            "lane_width_m": layout.lane_width_m,
            "length_m": layout.length_m,
        },
        "config": {},
        "aborted": aborted,
    }
    trace = Trace(header=header)
    times = sorted({t for rows in actor_rows.values() for t, *_ in rows})
    by_actor = {name: {t: (s, d, v) for t, s, d, v in rows} for name, rows in actor_rows.items()}
    for t in times:
        actors = []
        for name, rows in by_actor.items():
            if t in rows:
                s, d, v = rows[t]
                actors.append({"name": name, "actor_kind": "car",
                               "s": s, "d": d, "v": v, "a": 0.0})
        trace.records.append({"kind": "frame", "t": t, "actors": actors})
    for t, a, b in collisions:
        lo, hi = sorted((a, b))
        trace.add_event(t, "collision", actor_a=lo, actor_b=hi, overlap_m=0.1)
    return trace
