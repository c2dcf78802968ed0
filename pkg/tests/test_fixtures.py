import pytest

from lanescript.errors import LanescriptError
from lanescript.fixtures import (
    EXECUTION_TASKS,
    TASKS,
    fixture_root,
    load_road,
    load_task,
    load_task_script,
    parse_road_config,
)
from lanescript.script_model import parse_script, serialize_script, validate_script


def test_seventeen_tasks():
    assert len(TASKS) == 17
    assert len(EXECUTION_TASKS) == 8
    assert set(EXECUTION_TASKS) <= set(TASKS)


@pytest.mark.parametrize("task_id", sorted(TASKS))
def test_every_fixture_parses_and_validates(task_id):
    fixture = load_task(task_id)
    script = load_task_script(task_id)
    layout = load_road(fixture.road)
    assert validate_script(script, layout).ok
    text = serialize_script(script)
    assert serialize_script(parse_script(text)) == text


@pytest.mark.parametrize("task_id", sorted(EXECUTION_TASKS))
def test_execution_fixtures_are_structured(task_id):
    script = load_task_script(task_id)
    assert all(sub.structured for sub in script.actors)
    fixture = load_task(task_id)
    assert fixture.checker_id is not None
    assert fixture.vut_spawn is not None


def test_roads():
    highway = load_road("highway_4")
    assert (highway.lane_count, highway.lane_width_m) == (4, 3.5)
    urban = load_road("urban_3")
    assert urban.lane_count == 3
    with pytest.raises(Exception):
        parse_road_config("lanes: not_a_number")


def test_unknown_task():
    with pytest.raises(LanescriptError):
        load_task("no_such_task")


def test_requirements_are_nonempty():
    for fixture in TASKS.values():
        assert fixture.requirement_text.strip()
        assert (fixture_root() / "tasks" / fixture.script_file).exists()
