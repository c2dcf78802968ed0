"""Render a WorldView as the standardized textual observation given to the LLM."""

from __future__ import annotations

from dataclasses import dataclass

from .world import RoadLayout, WorldView, lane_of

_ORDINALS = (
    "first", "second", "third", "fourth", "fifth",
    "sixth", "seventh", "eighth", "ninth", "tenth",
)

_POSITION_SENTENCE = (
    "{Pos} current position is `({s}, {d})`, where {s} is the longitudinal position "
    "and {d} is the lateral position. The longitudinal position is parallel to the "
    "lane, and the lateral position is perpendicular to the lane."
)


def ordinal(n: int) -> str:
    if n < 1:
        raise ValueError("ordinal is defined for n >= 1")
    if n <= len(_ORDINALS):
        return _ORDINALS[n - 1]
    if 10 <= n % 100 <= 20:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


@dataclass(frozen=True)
class ObservationText:
    text: str
    actor_order: tuple


def _two(x: float) -> str:
    return f"{x:.2f}"


def _relation_phrase(relation) -> str:
    lane_rel, long_rel = relation
    where = "ahead" if long_rel == "ahead" else "behind"
    if lane_rel == "same_lane":
        return f"in the same lane as you and is {where} of you"
    if lane_rel == "left_lane":
        return f"on the lane to your left and is {where} of you"
    if lane_rel == "right_lane":
        return f"on the lane to your right and is {where} of you"
    return f"on a lane further to your {{side}} and is {where} of you"


def _relation_phrase_full(self_state, other, relation, layout):
    phrase = _relation_phrase(relation)
    if "{side}" in phrase:
        side = "left" if other.d < self_state.d else "right"
        phrase = phrase.format(side=side)
    return phrase


def _ordered_others(view: WorldView):
    # Ahead actors before behind actors, then by longitudinal gap, then name:
    # matches how the reference transcripts list a leading car before a
    # trailing one even when the trailer is closer.
    def key(item):
        st, (lane_rel, long_rel) = item
        return (0 if long_rel == "ahead" else 1, abs(st.s - view.self_state.s), st.name)

    return sorted(view.others, key=key)


def encode_observation(view: WorldView, layout: RoadLayout) -> ObservationText:
    me = view.self_state
    lane = lane_of(me.d, layout)
    parts = [
        f"You are driving on a road with {layout.lane_count} lanes, and you are "
        f"currently driving in the {ordinal(lane)} lane from the left. "
        + _POSITION_SENTENCE.format(Pos="Your", s=_two(me.s), d=_two(me.d))
        + f" Your current speed is {_two(me.v)} m/s, acceleration is {_two(me.a)} m/s^2, "
        f"and lane position is {_two(me.s)} m."
    ]
    order = []
    for st, relation in _ordered_others(view):
        order.append(st.name)
        phrase = _relation_phrase_full(me, st, relation, layout)
        parts.append(
            f"- `{st.name}` is driving {phrase}. "
            + _POSITION_SENTENCE.format(Pos="Its", s=_two(st.s), d=_two(st.d))
            + f" Its current speed is {_two(st.v)} m/s, acceleration is {_two(st.a)} m/s^2, "
            f"and lane position is {_two(st.s)} m."
        )
    return ObservationText(text="\n\n".join(parts), actor_order=tuple(order))
