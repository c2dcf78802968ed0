"""Metric aggregation over batches of runs."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from .checkers import CheckerParams, check_trace
from .errors import LanescriptError
from .fixtures import load_road, load_task, load_task_script
from .orchestrator import RunConfig, run_scenario


@dataclass(frozen=True)
class TaskMetrics:
    task_id: str
    runs: int
    passes: int
    token_cost: float  # tokens per sim-second per queried agent
    time_cost: float  # wall seconds per sim-second
    backend_failures: int = 0

    @property
    def success_rate(self) -> float:
        # backend outages are reported separately, not counted as failures
        counted = self.runs - self.backend_failures
        return self.passes / counted if counted else 0.0


@dataclass(frozen=True)
class MetricsReport:
    tasks: tuple

    @property
    def avg_success_rate(self):
        return sum(t.success_rate for t in self.tasks) / len(self.tasks)

    @property
    def avg_token_cost(self):
        return sum(t.token_cost for t in self.tasks) / len(self.tasks)

    @property
    def avg_time_cost(self):
        return sum(t.time_cost for t in self.tasks) / len(self.tasks)

    def to_dict(self):
        return {
            "tasks": [
                {
                    "task_id": t.task_id,
                    "runs": t.runs,
                    "success_rate": t.success_rate,
                    "token_cost": t.token_cost,
                    "time_cost": t.time_cost,
                    "backend_failures": t.backend_failures,
                }
                for t in self.tasks
            ],
            "average": {
                "success_rate": self.avg_success_rate,
                "token_cost": self.avg_token_cost,
                "time_cost": self.avg_time_cost,
            },
        }


def trace_token_cost(trace) -> float:
    """Tokens per simulation second per backend-queried agent."""
    decisions = trace.events("decision")
    total = sum(
        d["usage"]["prompt_tokens"] + d["usage"]["completion_tokens"] for d in decisions
    )
    agents = {d["agent"] for d in decisions}
    sim = trace.sim_seconds
    if sim <= 0 or not agents:
        return 0.0
    return total / (sim * len(agents))


def success_counts(verdicts):
    passes = sum(1 for v in verdicts if v.passed)
    return passes, len(verdicts) - passes


def bench(task_ids, runs_per_task, backend_factory, params: CheckerParams = CheckerParams(),
          base_config: RunConfig = None) -> MetricsReport:
    """Run each task `runs_per_task` times with distinct seeds and aggregate.

    `backend_factory()` must yield a fresh backend per run (cassettes are
    single-use; the oracle is stateless so one instance would also do).
    """
    if runs_per_task <= 0:
        raise LanescriptError("runs_per_task must be positive")
    rows = []
    for task_id in task_ids:
        fixture = load_task(task_id)
        if fixture.checker_id is None:
            raise LanescriptError(f"task {task_id!r} has no checker")
        script = load_task_script(task_id)
        layout = load_road(fixture.road)
        passes = 0
        failures = 0
        token_costs = []
        time_costs = []
        for seed in range(runs_per_task):
            config = base_config or RunConfig()
            config = replace(
                config,
                seed=seed,
                vut_spawn=fixture.vut_spawn,
                vut_policy=fixture.vut_policy,
                max_sim_seconds=fixture.max_sim_seconds,
            )
            started = time.monotonic()
            try:
                trace = run_scenario(script, layout, config, backend_factory())
            except LanescriptError:
                failures += 1
                continue
            wall = time.monotonic() - started
            verdict = check_trace(trace, fixture.checker_id, params)
            if verdict.passed and not trace.header.get("aborted"):
                passes += 1
            token_costs.append(trace_token_cost(trace))
            if trace.sim_seconds > 0:
                time_costs.append(wall / trace.sim_seconds)
        rows.append(
            TaskMetrics(
                task_id=task_id,
                runs=runs_per_task,
                passes=passes,
                token_cost=sum(token_costs) / len(token_costs) if token_costs else 0.0,
                time_cost=sum(time_costs) / len(time_costs) if time_costs else 0.0,
                backend_failures=failures,
            )
        )
    return MetricsReport(tuple(rows))
