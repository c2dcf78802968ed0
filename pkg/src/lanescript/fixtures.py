"""The 17-task fixture set: requirements, roads, reference scripts, checkers."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import LanescriptError, ScriptSyntaxError
from .orchestrator import VutSpawn
from .script_model import Script, parse_script
from .world import RoadLayout


def fixture_root() -> Path:
    env = os.environ.get("LANESCRIPT_FIXTURES")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "fixtures"


@dataclass(frozen=True)
class TaskFixture:
    task_id: str
    requirement_text: str
    road: str
    script_file: str
    checker_id: str = None  # only the eight execution tasks have checkers
    vut_spawn: VutSpawn = None
    max_sim_seconds: float = 30.0
    vut_policy: str = "constant_speed"


TASKS = {
    "accident": TaskFixture(
        "accident",
        "An accident occurred on the highway. One car turned left to avoid it, "
        "but with the left lane occupied, the following car turned right.",
        road="highway_4",
        script_file="task_01_accident.script",
        checker_id="accident",
        vut_spawn=VutSpawn(lane_index=4, longitudinal_m=40.0, speed_mps=8.0),
        max_sim_seconds=25.0,
    ),
    "ambulance": TaskFixture(
        "ambulance",
        "On the highway, an ambulance is driving straight at high speed. Multiple "
        "vehicles in the same lane move to both sides to make way for it.",
        road="highway_4",
        script_file="task_02_ambulance.script",
        checker_id="ambulance",
        vut_spawn=VutSpawn(lane_index=4, longitudinal_m=30.0, speed_mps=8.0),
        max_sim_seconds=25.0,
    ),
    "bus": TaskFixture(
        "bus",
        "A bus switched from the middle lane to the bus stop, then started again "
        "and changed lanes back.",
        road="urban_3",
        script_file="task_03_bus.script",
        checker_id="bus",
        vut_spawn=VutSpawn(lane_index=1, longitudinal_m=40.0, speed_mps=7.0),
        max_sim_seconds=40.0,
    ),
    "caught_in_pincer": TaskFixture(
        "caught_in_pincer",
        "A car to the left is overtaking, forcing the ego vehicle to decelerate, "
        "while a car behind speeds up, pressuring it to accelerate.",
        road="highway_4",
        script_file="task_04_caught_in_pincer.script",
    ),
    "cut_in": TaskFixture(
        "cut_in",
        "A car overtakes the VUT and then slows down.",
        road="urban_3",
        script_file="task_05_cut_in.script",
        checker_id="cut_in",
        vut_spawn=VutSpawn(lane_index=2, longitudinal_m=100.0, speed_mps=6.0),
        max_sim_seconds=25.0,
        vut_policy="braking_follower",
    ),
    "failed_at_start": TaskFixture(
        "failed_at_start",
        "A car parked in front of the bus station started, changed lanes, and "
        "collided with the bus that was changing lanes to park.",
        road="urban_3",
        script_file="task_06_failed_at_start.script",
    ),
    "meet_in_mind_1": TaskFixture(
        "meet_in_mind_1",
        "Two cars simultaneously change lanes to the middle lane.",
        road="urban_3",
        script_file="task_07_meet_in_mind_1.script",
    ),
    "meet_in_mind_2": TaskFixture(
        "meet_in_mind_2",
        "Two cars, unable to see each other, simultaneously attempt to overtake "
        "a car in the middle.",
        road="urban_3",
        script_file="task_08_meet_in_mind_2.script",
    ),
    "merge_alternately": TaskFixture(
        "merge_alternately",
        "Two cars collided in the right lane at a road intersection, and several "
        "cars in the rear weaved into the left lane.",
        road="urban_3",
        script_file="task_09_merge_alternately.script",
    ),
    "newbie_lane_change_1": TaskFixture(
        "newbie_lane_change_1",
        "A car in front on the right changes lanes without accelerating, causing "
        "a collision with the ego vehicle.",
        road="highway_4",
        script_file="task_10_newbie_lane_change_1.script",
    ),
    "newbie_lane_change_2": TaskFixture(
        "newbie_lane_change_2",
        "A truck is to the left of the ego vehicle, and a car in front on the "
        "right changes lanes without accelerating, causing a collision with the "
        "ego vehicle.",
        road="highway_4",
        script_file="task_11_newbie_lane_change_2.script",
    ),
    "reckless_driving": TaskFixture(
        "reckless_driving",
        "A reckless driver repeatedly overtakes other cars on the highway.",
        road="highway_4",
        script_file="task_12_reckless_driving.script",
        checker_id="reckless_driving",
        vut_spawn=VutSpawn(lane_index=4, longitudinal_m=30.0, speed_mps=8.0),
        max_sim_seconds=30.0,
    ),
    "sudden_jaywalker": TaskFixture(
        "sudden_jaywalker",
        "The VUT was moving in the left lane behind a stopped truck. As it "
        "approached, a pedestrian emerged from behind the truck.",
        road="urban_3",
        script_file="task_13_sudden_jaywalker.script",
        checker_id="sudden_jaywalker",
        vut_spawn=VutSpawn(lane_index=1, longitudinal_m=60.0, speed_mps=7.0),
        max_sim_seconds=25.0,
        vut_policy="braking_follower",
    ),
    "surrounded": TaskFixture(
        "surrounded",
        "Four police cars surround the criminal's vehicle from the front, back, "
        "left, and right.",
        road="highway_4",
        script_file="task_14_surrounded.script",
    ),
    "swerve": TaskFixture(
        "swerve",
        "There are two cars ahead of ego on the left lane. The front car suddenly "
        "decelerates, and the rear car swerves to the right to avoid a collision.",
        road="highway_4",
        script_file="task_15_swerve.script",
        checker_id="swerve",
        vut_spawn=VutSpawn(lane_index=3, longitudinal_m=78.0, speed_mps=8.0),
        max_sim_seconds=20.0,
        vut_policy="braking_follower",
    ),
    "three_in_line_1": TaskFixture(
        "three_in_line_1",
        "There are two cars in front of the VUT. The car at the very front slows "
        "down, and the second car, to avoid a collision, changes lanes to the right.",
        road="highway_4",
        script_file="task_16_three_in_line_1.script",
        checker_id="three_in_line_1",
        vut_spawn=VutSpawn(lane_index=2, longitudinal_m=75.0, speed_mps=5.0),
        max_sim_seconds=20.0,
        vut_policy="braking_follower",
    ),
    "three_in_line_2": TaskFixture(
        "three_in_line_2",
        "The front car suddenly hit the stopped car ahead, and the ego car "
        "collided with the front car.",
        road="highway_4",
        script_file="task_17_three_in_line_2.script",
    ),
}

EXECUTION_TASKS = (
    "accident", "ambulance", "bus", "reckless_driving",
    "cut_in", "sudden_jaywalker", "swerve", "three_in_line_1",
)


def load_task(task_id: str) -> TaskFixture:
    if task_id not in TASKS:
        raise LanescriptError(f"unknown task {task_id!r}")
    return TASKS[task_id]


def load_task_script(task_id: str) -> Script:
    fixture = load_task(task_id)
    path = fixture_root() / "tasks" / fixture.script_file
    return parse_script(path.read_text(encoding="utf-8"))


_ROAD_KV = re.compile(r"^([a-z_]+)\s*:\s*(.+)$")


def parse_road_config(text: str) -> RoadLayout:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _ROAD_KV.match(line)
        if m is None:
            raise ScriptSyntaxError(f"unrecognized road config line {line!r}", lineno)
        values[m.group(1)] = m.group(2)
    try:
        return RoadLayout(
            lane_count=int(values["lanes"]),
            lane_width_m=float(values.get("lane_width_m", 3.5)),
            length_m=float(values.get("length_m", 1000.0)),
        )
    except (KeyError, ValueError) as e:
        raise ScriptSyntaxError(f"bad road config: {e}") from None


def load_road(name: str) -> RoadLayout:
    path = fixture_root() / "roads" / f"{name}.road"
    return parse_road_config(path.read_text(encoding="utf-8"))
