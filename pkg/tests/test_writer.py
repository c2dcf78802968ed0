import random

import pytest

from lanescript.decisions import Usage
from lanescript.errors import EmptyFinal, UnparseableMaster, UnparseableSubscript
from lanescript.script_model import MasterScript, MasterStage, parse_script
from lanescript.writer import (
    generate_master,
    generate_subscripts,
    parse_master_text,
    render_master,
    user_involvement,
)

MASTER_TEXT = """Initial state: Two cars share lane 2 on a highway.
Stage 1: The front car suddenly decelerates.
Reasoning: It creates the hazard.
Stage 2: The rear car swerves right.
Reasoning: It must avoid a collision.
"""

SUB_DOC = """title: generated

actor front_car:
  kind: car
  initial: {lane: 2, long_m: 105, speed_mps: 6}
  step 1:
    action: Decelerate hard
    termination: The car has stopped.
"""


class FakeTextBackend:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def complete(self, system, user):
        self.calls.append((system, user))
        return self.responses.pop(0), Usage(100, 40, 10.0)


def test_parse_master_text():
    master = parse_master_text(MASTER_TEXT)
    assert master.initial_state == "Two cars share lane 2 on a highway."
    assert len(master.stages) == 2
    assert master.stages[0].description == "The front car suddenly decelerates."
    assert master.stages[1].reasoning == "It must avoid a collision."


def test_parse_master_requires_stages():
    with pytest.raises(UnparseableMaster):
        parse_master_text("just an essay with no structure")


def test_render_master_round_trip():
    master = MasterScript("Initial.", (MasterStage("One.", "Because."), MasterStage("Two.")))
    assert parse_master_text(render_master(master)) == master


def test_generate_master_repair_retry():
    backend = FakeTextBackend(["no stages at all", MASTER_TEXT])
    master, usage = generate_master("some requirement", None, backend)
    assert len(master.stages) == 2
    assert usage.prompt_tokens == 200  # both attempts billed
    assert "Follow the format exactly" in backend.calls[1][1]


def test_generate_master_second_failure_propagates():
    backend = FakeTextBackend(["nope", "still nope"])
    with pytest.raises(UnparseableMaster):
        generate_master("req", None, backend)


def test_generate_subscripts_strips_fences_and_warns():
    fenced = "```\n" + SUB_DOC + "\n```"
    backend = FakeTextBackend([fenced])
    master = parse_master_text(MASTER_TEXT)
    script, warnings, usage = generate_subscripts(
        master, backend, expected_actors=["front_car", "rear_car"]
    )
    assert script.actor_names == ("front_car",)
    assert warnings and "rear_car" in warnings[0]


def test_generate_subscripts_repair_then_fail():
    backend = FakeTextBackend(["garbage {{{", "more garbage"])
    master = parse_master_text(MASTER_TEXT)
    with pytest.raises(UnparseableSubscript):
        generate_subscripts(master, backend)
    assert len(backend.calls) == 2


# --- user involvement ------------------------------------------------------------

def test_involvement_identity_and_disjoint():
    assert user_involvement("abc def", "abcdef") == 0.0  # whitespace ignored
    assert user_involvement("abc", "xyz") == 100.0


def test_involvement_single_substitution():
    assert user_involvement("abcdef", "abXdef") == pytest.approx(16.67, abs=0.01)


def test_involvement_pure_insertion():
    # 4 of 8 final characters supplied by the user
    assert user_involvement("abcd", "aXbXcXdX") == 50.0


def test_involvement_accepts_scripts():
    script = parse_script(SUB_DOC)
    assert user_involvement(script, script) == 0.0


def test_involvement_empty_final():
    with pytest.raises(EmptyFinal):
        user_involvement("abc", "   \n ")


def test_involvement_bounded_on_random_edits():
    rng = random.Random(11)
    alphabet = "abcdefgh"
    for _ in range(200):
        gen = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 40)))
        fin = list(gen)
        for _ in range(rng.randint(0, 10)):
            op = rng.choice(["ins", "del", "sub"])
            if op == "ins":
                fin.insert(rng.randrange(len(fin) + 1), rng.choice(alphabet))
            elif op == "del" and fin:
                fin.pop(rng.randrange(len(fin)))
            elif fin:
                fin[rng.randrange(len(fin))] = rng.choice(alphabet)
        if not fin:
            continue
        pct = user_involvement(gen, "".join(fin))
        assert 0.0 <= pct <= 100.0
