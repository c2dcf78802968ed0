import pytest

from lanescript.decisions import MockUsageBackend, OracleBackend
from lanescript.errors import LanescriptError
from lanescript.fixtures import load_road, load_task, load_task_script
from lanescript.metrics import TaskMetrics, bench, trace_token_cost
from lanescript.orchestrator import RunConfig, run_scenario


def test_task_metrics_success_rate():
    assert TaskMetrics("t", runs=5, passes=3, token_cost=0, time_cost=0).success_rate == 0.6
    assert TaskMetrics("t", runs=5, passes=0, token_cost=0, time_cost=0).success_rate == 0.0
    assert TaskMetrics("t", runs=5, passes=5, token_cost=0, time_cost=0).success_rate == 1.0
    # backend failures leave the denominator
    m = TaskMetrics("t", runs=5, passes=2, token_cost=0, time_cost=0, backend_failures=1)
    assert m.success_rate == 0.5
    m = TaskMetrics("t", runs=2, passes=0, token_cost=0, time_cost=0, backend_failures=2)
    assert m.success_rate == 0.0  # no counted runs at all


def run_swerve(backend):
    fixture = load_task("swerve")
    config = RunConfig(max_sim_seconds=fixture.max_sim_seconds, vut_spawn=fixture.vut_spawn,
                       vut_policy=fixture.vut_policy)
    return run_scenario(load_task_script("swerve"), load_road(fixture.road), config, backend)


def test_trace_token_cost_zero_for_oracle():
    assert trace_token_cost(run_swerve(OracleBackend())) == 0.0


def test_trace_token_cost_arithmetic():
    trace = run_swerve(MockUsageBackend(OracleBackend(), 600, 200))
    decisions = trace.events("decision")
    agents = {d["agent"] for d in decisions}
    expected = len(decisions) * 800 / (trace.sim_seconds * len(agents))
    assert trace_token_cost(trace) == pytest.approx(expected)


def test_bench_smoke():
    report = bench(["swerve"], 2, OracleBackend)
    assert len(report.tasks) == 1
    row = report.tasks[0]
    assert row.task_id == "swerve"
    assert row.runs == 2
    assert row.success_rate == 1.0
    assert row.backend_failures == 0
    payload = report.to_dict()
    assert payload["average"]["success_rate"] == 1.0


def test_bench_rejects_checkerless_task():
    with pytest.raises(LanescriptError):
        bench(["surrounded"], 1, OracleBackend)
    with pytest.raises(LanescriptError):
        bench(["swerve"], 0, OracleBackend)
