import pytest

from lanescript.checkers import check_trace
from lanescript.decisions import MockUsageBackend, OracleBackend, Usage
from lanescript.errors import BackendUnavailable, LanescriptError
from lanescript.fixtures import load_road, load_task, load_task_script
from lanescript.orchestrator import RunConfig, Trace, VutSpawn, run_scenario
from lanescript.script_model import parse_script
from lanescript.world import RoadLayout, lane_of

THREE_CRUISERS = parse_script("""title: Cadence

actor car_a:
  kind: car
  initial: {lane: 1, long_m: 50, speed_mps: 8}
  step 1:
    action: Cruise
    termination: Long after the run ends.
    action_expr: cruise(lane: 1, speed: 8)
    termination_expr: elapsed >= 999

actor car_b:
  kind: car
  initial: {lane: 2, long_m: 50, speed_mps: 8}
  step 1:
    action: Cruise
    termination: Long after the run ends.
    action_expr: cruise(lane: 2, speed: 8)
    termination_expr: elapsed >= 999

actor car_c:
  kind: car
  initial: {lane: 3, long_m: 50, speed_mps: 8}
  step 1:
    action: Cruise
    termination: Long after the run ends.
    action_expr: cruise(lane: 3, speed: 8)
    termination_expr: elapsed >= 999
""")


def run_cruisers(seconds=10.0, backend=None, **kwargs):
    layout = RoadLayout(lane_count=4, lane_width_m=3.5, length_m=1000.0)
    config = RunConfig(max_sim_seconds=seconds, **kwargs)
    return run_scenario(THREE_CRUISERS, layout, config, backend or OracleBackend())


def test_config_rejects_misaligned_decision_period():
    with pytest.raises(ValueError):
        RunConfig(dt=0.05, decision_period=0.52)
    assert RunConfig(dt=0.05, decision_period=0.5).frames_per_tick == 10


def test_frame_and_tick_cadence():
    trace = run_cruisers(10.0)
    frames = trace.frames()
    assert frames[0]["t"] == 0.0  # t=0 state is part of the trace
    assert len(frames) == 201
    assert trace.sim_seconds == pytest.approx(10.0)
    decisions = trace.events("decision")
    assert len(decisions) == 60  # 20 ticks x 3 agents
    assert {d["t"] for d in decisions} == {round(0.5 * i, 6) for i in range(20)}


def test_decision_order_follows_script_order():
    trace = run_cruisers(1.0)
    first_tick = [d["agent"] for d in trace.events("decision") if d["t"] == 0.0]
    assert first_tick == ["car_a", "car_b", "car_c"]


def test_mock_usage_recorded_in_trace():
    trace = run_cruisers(2.0, backend=MockUsageBackend(OracleBackend(), 600, 200))
    for d in trace.events("decision"):
        assert d["usage"]["prompt_tokens"] == 600
        assert d["usage"]["completion_tokens"] == 200


def test_trace_jsonl_round_trip():
    trace = run_cruisers(2.0)
    text = trace.to_jsonl()
    again = Trace.from_jsonl(text)
    assert again.to_jsonl() == text
    assert again.layout().lane_count == 4


def test_determinism_byte_identical():
    a = run_cruisers(5.0).to_jsonl()
    b = run_cruisers(5.0).to_jsonl()
    assert a == b


FINISHER = parse_script("""title: Finisher

actor runner:
  kind: car
  initial: {lane: 1, long_m: 0, speed_mps: 5}
  step 1:
    action: Cruise briefly
    termination: Two seconds pass.
    action_expr: cruise(lane: 1, speed: 5)
    termination_expr: elapsed >= 2
""")


def test_finished_agent_ends_run_early():
    layout = RoadLayout(lane_count=2, lane_width_m=3.5, length_m=1000.0)
    trace = run_scenario(FINISHER, layout, RunConfig(max_sim_seconds=30.0), OracleBackend())
    finished = trace.events("finished", agent="runner")
    assert len(finished) == 1
    assert finished[0]["t"] == 2.0
    # loop stops once every agent is done
    assert trace.frames()[-1]["t"] < 3.0


def test_despawn_on_finish():
    layout = RoadLayout(lane_count=2, lane_width_m=3.5, length_m=1000.0)
    config = RunConfig(max_sim_seconds=30.0, despawn_on_finish=True)
    trace = run_scenario(FINISHER, layout, config, OracleBackend())
    last = trace.frames()[-1]
    assert last["actors"] == []


def test_step_transition_event_and_elapsed_reset():
    script = parse_script("""title: Two steps

actor car_a:
  kind: car
  initial: {lane: 1, long_m: 0, speed_mps: 5}
  step 1:
    action: Cruise
    termination: One second passes.
    action_expr: cruise(lane: 1, speed: 5)
    termination_expr: elapsed >= 1
  step 2:
    action: Cruise more
    termination: Two more seconds pass.
    action_expr: cruise(lane: 1, speed: 5)
    termination_expr: elapsed >= 2
""")
    layout = RoadLayout(lane_count=2, lane_width_m=3.5, length_m=1000.0)
    trace = run_scenario(script, layout, RunConfig(max_sim_seconds=10.0), OracleBackend())
    transitions = trace.events("step_transition", agent="car_a")
    assert [(e["from_step"], e["to_step"]) for e in transitions] == [(1, 2)]
    assert transitions[0]["t"] == 1.0
    # step 2's elapsed restarts at the transition: finish at 1.0 + 2.0
    assert trace.events("finished", agent="car_a")[0]["t"] == 3.0


def test_repeated_decision_does_not_restart_lane_change():
    script = parse_script("""title: Changer

actor mover:
  kind: car
  initial: {lane: 1, long_m: 0, speed_mps: 8}
  step 1:
    action: Change right
    termination: Done moving over.
    action_expr: lane_change(direction: right, target_speed: 8, delay: 0)
    termination_expr: lat(self) >= 3.4
  step 2:
    action: Cruise
    termination: A while.
    action_expr: cruise(lane: 2, speed: 8)
    termination_expr: elapsed >= 3
""")
    layout = RoadLayout(lane_count=2, lane_width_m=3.5, length_m=1000.0)
    trace = run_scenario(script, layout, RunConfig(max_sim_seconds=10.0), OracleBackend())
    series = trace.series("mover")
    laterals = [d for _, s, d, v, a in series]
    assert all(b >= a - 1e-9 for a, b in zip(laterals, laterals[1:]))
    # the 2 s blend must complete despite the same decision repeating each tick
    t_done = next(t for t, s, d, v, a in series if d >= 3.4)
    assert t_done <= 2.2


def test_off_road_lane_change_warning_event():
    script = parse_script("""title: Edge

actor edge_car:
  kind: car
  initial: {lane: 1, long_m: 0, speed_mps: 5}
  step 1:
    action: Try to go left off the road
    termination: A while.
    action_expr: lane_change(direction: left, target_speed: 5, delay: 0)
    termination_expr: elapsed >= 2
""")
    layout = RoadLayout(lane_count=2, lane_width_m=3.5, length_m=1000.0)
    trace = run_scenario(script, layout, RunConfig(max_sim_seconds=5.0), OracleBackend())
    warnings = trace.events("warning", agent="edge_car")
    assert warnings and warnings[0]["warning"] == "off_road_lane_change"
    assert all(d == 0.0 for _, s, d, v, a in trace.series("edge_car"))


class FailingBackend:
    name = "failing"

    def decide(self, bundle, ctx):
        raise BackendUnavailable("synthetic outage")

    def complete(self, system, user):
        raise BackendUnavailable("synthetic outage")


def test_backend_failure_lenient_vs_strict():
    layout = RoadLayout(lane_count=2, lane_width_m=3.5, length_m=1000.0)
    trace = run_scenario(FINISHER, layout, RunConfig(max_sim_seconds=5.0), FailingBackend())
    errors = trace.events("agent_error", agent="runner")
    assert errors and "outage" in errors[0]["error"]
    assert not trace.header["aborted"]

    config = RunConfig(max_sim_seconds=5.0, strict_backend_errors=True)
    trace = run_scenario(FINISHER, layout, config, FailingBackend())
    assert trace.header["aborted"]
    assert trace.events("run_aborted")


def test_unrunnable_script_raises():
    layout = RoadLayout(lane_count=1, lane_width_m=3.5, length_m=10.0)
    with pytest.raises(LanescriptError):
        run_scenario(THREE_CRUISERS, layout, RunConfig(), OracleBackend())


def test_vut_spawned_but_never_queried():
    layout = RoadLayout(lane_count=4, lane_width_m=3.5, length_m=1000.0)
    config = RunConfig(max_sim_seconds=2.0, vut_spawn=VutSpawn(4, 10.0, 8.0))
    trace = run_scenario(THREE_CRUISERS, layout, config, OracleBackend())
    assert trace.series("VUT")  # present in frames
    assert all(d["agent"] != "VUT" for d in trace.events("decision"))
    v_series = [v for _, s, d, v, a in trace.series("VUT")]
    assert all(abs(v - 8.0) < 0.2 for v in v_series)  # constant-speed policy


def test_collision_events_recorded_once():
    fixture = load_task("swerve")
    trace = run_scenario(
        load_task_script("swerve"), load_road(fixture.road),
        RunConfig(max_sim_seconds=fixture.max_sim_seconds, vut_spawn=fixture.vut_spawn,
                  vut_policy=fixture.vut_policy),
        OracleBackend(),
    )
    collisions = trace.events("collision")
    pairs = [(e["actor_a"], e["actor_b"]) for e in collisions]
    assert pairs.count(("front_car", "rear_car")) == 1
