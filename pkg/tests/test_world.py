import pytest

from lanescript.errors import MissingControl, UnknownActor
from lanescript.world import (
    ActorState,
    Control,
    RoadLayout,
    WorldCondView,
    WorldState,
    despawn,
    detect_collisions,
    lane_of,
    observation_view,
    relation_of,
    spawn,
    step_world,
)


def make_world(layout, *states):
    world = WorldState(layout=layout)
    for st in states:
        world = spawn(world, st)
    return world


def car(name, s, d, v=0.0):
    return ActorState(name=name, kind="car", s=s, d=d, v=v)


def test_lane_centers(highway):
    assert highway.lane_center(1) == 0.0
    assert highway.lane_center(2) == 3.5
    assert highway.lane_center(4) == 10.5


def test_lane_of_midpoint_ties_to_lower_index(highway):
    assert lane_of(0.0, highway) == 1
    assert lane_of(1.75, highway) == 1  # exact midpoint: lower lane wins
    assert lane_of(1.7500001, highway) == 2
    assert lane_of(5.25, highway) == 2
    assert lane_of(-2.0, highway) == 1  # clamped
    assert lane_of(99.0, highway) == 4  # clamped


def test_step_world_kinematics(highway):
    world = make_world(highway, car("a", 100.0, 0.0, 10.0))
    world = step_world(world, {"a": Control(accel_mps2=2.0, lateral_m=0.5)}, dt=0.05)
    st = world.actors["a"]
    assert st.s == pytest.approx(100.5)  # s advances with the pre-step speed
    assert st.v == pytest.approx(10.1)
    assert st.d == 0.5
    assert world.t == pytest.approx(0.05)


def test_speed_clamps(highway):
    world = make_world(highway, car("a", 0.0, 0.0, 0.2))
    world = step_world(world, {"a": Control(-8.0, 0.0)}, dt=0.05)
    assert world.actors["a"].v == 0.0  # never negative
    ped = ActorState(name="p", kind="pedestrian", s=0.0, d=0.0, v=2.9)
    world = make_world(highway, ped)
    world = step_world(world, {"p": Control(4.0, 0.0)}, dt=0.05)
    assert world.actors["p"].v == 3.0  # pedestrian cap


def test_reported_accel_is_half_second_backward_difference(highway):
    world = make_world(highway, car("a", 0.0, 0.0, 0.0))
    for _ in range(10):  # exactly 0.5 s at 2 m/s^2
        world = step_world(world, {"a": Control(2.0, 0.0)}, dt=0.05)
    assert world.actors["a"].a == pytest.approx(2.0)
    for _ in range(10):  # window slides: still 2.0
        world = step_world(world, {"a": Control(2.0, 0.0)}, dt=0.05)
    assert world.actors["a"].a == pytest.approx(2.0)


def test_missing_control_raises(highway):
    world = make_world(highway, car("a", 0.0, 0.0))
    with pytest.raises(MissingControl):
        step_world(world, {}, dt=0.05)


def test_spawn_and_despawn(highway):
    world = make_world(highway, car("a", 0.0, 0.0))
    with pytest.raises(ValueError):
        spawn(world, car("a", 5.0, 0.0))
    world = despawn(world, "a")
    assert "a" not in world.actors
    with pytest.raises(UnknownActor):
        despawn(world, "a")


def test_collision_requires_strict_overlap(highway):
    # car footprint 4.5 x 2.0: centers 4.5 m apart just touch, no collision
    world = make_world(highway, car("a", 100.0, 0.0), car("b", 104.5, 0.0))
    assert detect_collisions(world) == []
    world = make_world(highway, car("a", 100.0, 0.0), car("b", 104.4, 0.0))
    events = detect_collisions(world)
    assert len(events) == 1
    assert (events[0].actor_a, events[0].actor_b) == ("a", "b")  # lexicographic


def test_one_event_per_contact_episode(highway):
    world = make_world(highway, car("a", 100.0, 0.0, 1.0), car("b", 104.0, 0.0, 1.0))
    controls = {"a": Control(0.0, 0.0), "b": Control(0.0, 0.0)}
    for _ in range(5):
        world = step_world(world, controls, dt=0.05)
    assert len(world.collisions) == 1  # contact persists, single event


def test_relation_of(highway):
    me = car("me", 100.0, 3.5)
    assert relation_of(me, car("x", 110.0, 3.5), highway) == ("same_lane", "ahead")
    assert relation_of(me, car("x", 90.0, 0.0), highway) == ("left_lane", "behind")
    assert relation_of(me, car("x", 90.0, 7.0), highway) == ("right_lane", "behind")
    assert relation_of(me, car("x", 90.0, 10.5), highway) == ("other_lane", "behind")
    assert relation_of(me, car("x", 100.0, 3.5), highway)[1] == "ahead"  # tie goes ahead


def test_observation_view(highway):
    world = make_world(highway, car("me", 100.0, 3.5), car("far", 300.0, 3.5))
    view = observation_view(world, "me")
    assert [st.name for st, _ in view.others] == ["far"]
    view = observation_view(world, "me", sensing_radius=100.0)
    assert view.others == ()
    with pytest.raises(UnknownActor):
        observation_view(world, "nobody")


def test_world_cond_view(highway):
    world = make_world(highway, car("a", 100.0, 3.5, 5.0), car("b", 104.0, 3.5, 5.0))
    world = step_world(world, {"a": Control(0, 3.5), "b": Control(0, 3.5)}, dt=0.05)
    view = WorldCondView(world)
    assert view.has_actor("a") and not view.has_actor("zzz")
    assert view.lane("a") == 2
    assert view.speed("a") == 5.0
    assert view.has_collided("b", "a")  # order-insensitive
