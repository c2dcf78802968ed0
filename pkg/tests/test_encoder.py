import pytest

from lanescript.encoder import encode_observation, ordinal
from lanescript.world import ActorState, RoadLayout, WorldView, relation_of


def car(name, s, d, v, a=0.0):
    return ActorState(name=name, kind="car", s=s, d=d, v=v, a=a)


def make_view(layout, me, others):
    return WorldView(self_state=me, others=tuple((o, relation_of(me, o, layout)) for o in others))


def test_ordinal():
    assert ordinal(1) == "first"
    assert ordinal(4) == "fourth"
    assert ordinal(10) == "tenth"
    assert ordinal(11) == "11th"
    assert ordinal(21) == "21st"
    assert ordinal(112) == "112th"
    with pytest.raises(ValueError):
        ordinal(0)


def test_self_paragraph(highway):
    view = make_view(highway, car("me", 98.5, 3.5, 5.843, 0.729), [])
    text = encode_observation(view, highway).text
    assert text.startswith("You are driving on a road with 4 lanes, and you are "
                           "currently driving in the second lane from the left.")
    assert "`(98.50, 3.50)`" in text  # two decimals everywhere
    assert "speed is 5.84 m/s" in text
    assert "acceleration is 0.73 m/s^2" in text
    assert "lane position is 98.50 m" in text


def test_relation_phrases(highway):
    me = car("me", 100.0, 3.5, 5.0)
    cases = [
        (car("x", 110.0, 3.5, 5.0), "in the same lane as you and is ahead of you"),
        (car("x", 90.0, 3.5, 5.0), "in the same lane as you and is behind of you"),
        (car("x", 110.0, 0.0, 5.0), "on the lane to your left and is ahead of you"),
        (car("x", 110.0, 7.0, 5.0), "on the lane to your right and is ahead of you"),
        (car("x", 110.0, 10.5, 5.0), "on a lane further to your right and is ahead of you"),
    ]
    for other, phrase in cases:
        text = encode_observation(make_view(highway, me, [other]), highway).text
        assert phrase in text, phrase
    # two lanes to the left
    me4 = car("me", 100.0, 10.5, 5.0)
    text = encode_observation(make_view(highway, me4, [car("x", 90.0, 3.5, 5.0)]), highway).text
    assert "on a lane further to your left and is behind of you" in text


def test_ordering_ahead_before_behind_then_gap_then_name(highway):
    me = car("me", 100.0, 3.5, 5.0)
    others = [
        car("close_behind", 97.0, 3.5, 5.0),
        car("far_ahead", 140.0, 3.5, 5.0),
        car("near_ahead", 110.0, 3.5, 5.0),
        car("aaa_ahead", 110.0, 7.0, 5.0),  # same gap as near_ahead: name breaks tie
    ]
    obs = encode_observation(make_view(highway, me, others), highway)
    assert obs.actor_order == ("aaa_ahead", "near_ahead", "far_ahead", "close_behind")


def test_bullets_are_backticked_and_separated(highway):
    me = car("me", 100.0, 3.5, 5.0)
    obs = encode_observation(make_view(highway, me, [car("other", 110.0, 3.5, 5.0)]), highway)
    assert "\n\n- `other` is driving" in obs.text
