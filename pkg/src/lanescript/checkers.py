"""Programmatic trace checkers: reproducible stand-ins for manual review.

Each checker is a pure function Trace -> Verdict built from ordered clause
predicates. Thresholds live in CheckerParams so reviewers can see and adjust
them; defaults: stopped means <= 0.5 m/s, a near miss is a same-lane center
gap under 8 m, the bus stop tolerance is +/- 2.5 m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownChecker
from .world import lane_of


@dataclass(frozen=True)
class CheckerParams:
    stop_speed_mps: float = 0.5
    near_miss_m: float = 8.0
    bus_stop_tolerance_m: float = 2.5
    jaywalk_trigger_gap_m: float = 30.0
    cut_in_slow_mps: float = 3.5
    # Review wording for one task has the swerving car also hitting the car it
    # avoided; a sibling task has it escaping cleanly. Both readings stay
    # available as a toggle.
    require_swerve_front_collision: bool = True


@dataclass(frozen=True)
class Clause:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    checker_id: str
    clauses: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)


# --- trace helpers --------------------------------------------------------------

def _lane_series(trace, actor):
    layout = trace.layout()
    return [(t, lane_of(d, layout), s, d, v) for t, s, d, v, a in trace.series(actor)]


def _first_time(series, pred):
    for row in series:
        if pred(row):
            return row[0]
    return None


def _collided(trace, a, b):
    lo, hi = min(a, b), max(a, b)
    return any(
        e["actor_a"] == lo and e["actor_b"] == hi for e in trace.events("collision")
    )


def _paired(trace, a, b):
    """Aligned per-frame rows [(t, row_a, row_b)] for two actors."""
    sa = {t: (t, s, d, v) for t, s, d, v, _ in trace.series(a)}
    out = []
    for t, s, d, v, _ in trace.series(b):
        if t in sa:
            out.append((t, sa[t], (t, s, d, v)))
    return out


def _min_same_lane_gap(trace, a, b):
    layout = trace.layout()
    best = None
    for t, ra, rb in _paired(trace, a, b):
        if lane_of(ra[2], layout) == lane_of(rb[2], layout):
            gap = abs(ra[1] - rb[1])
            if best is None or gap < best:
                best = gap
    return best


# --- individual checkers ----------------------------------------------------------

def check_swerve(trace, p: CheckerParams) -> Verdict:
    clauses = []
    front = trace.series("front_car")
    t_stop = _first_time(front, lambda r: r[3] <= p.stop_speed_mps)
    clauses.append(Clause("front_car_stops", t_stop is not None,
                          f"first v<={p.stop_speed_mps} at t={t_stop}"))

    entered = None
    if t_stop is not None:
        for t, ra, rb in _paired(trace, "rear_car", "VUT"):
            layout = trace.layout()
            if t >= t_stop and lane_of(ra[2], layout) == lane_of(rb[2], layout):
                entered = t
                break
    clauses.append(Clause("rear_car_enters_vut_lane", entered is not None,
                          f"first shared lane after stop at t={entered}"))

    gap = _min_same_lane_gap(trace, "rear_car", "VUT")
    clauses.append(Clause("near_miss_with_vut", gap is not None and gap < p.near_miss_m,
                          f"min same-lane gap {gap}"))

    if p.require_swerve_front_collision:
        hit = _collided(trace, "rear_car", "front_car")
        clauses.append(Clause("rear_car_hits_front_car", hit, ""))
    return Verdict("swerve", tuple(clauses))


def check_three_in_line_1(trace, p: CheckerParams) -> Verdict:
    clauses = []
    front = trace.series("front_car")
    t_stop = _first_time(front, lambda r: r[3] <= p.stop_speed_mps)
    clauses.append(Clause("front_car_stops", t_stop is not None,
                          f"first v<={p.stop_speed_mps} at t={t_stop}"))

    lanes = _lane_series(trace, "rear_car")
    start_lane = lanes[0][1] if lanes else None
    t_change = _first_time(lanes, lambda r: r[1] == (start_lane or 0) + 1)
    clauses.append(Clause("rear_car_changes_right", t_change is not None,
                          f"lane {start_lane}->{(start_lane or 0) + 1} at t={t_change}"))

    clauses.append(Clause("no_rear_front_collision",
                          not _collided(trace, "rear_car", "front_car"), ""))

    drives_away = False
    if t_change is not None:
        rows = [r for r in trace.series("rear_car") if r[0] >= t_change]
        drives_away = len(rows) >= 2 and rows[-1][1] > rows[0][1] + 1.0
    clauses.append(Clause("rear_car_drives_away", drives_away, ""))
    return Verdict("three_in_line_1", tuple(clauses))


def check_accident(trace, p: CheckerParams) -> Verdict:
    clauses = []
    wreck = trace.series("crashed_car")
    clauses.append(Clause("accident_vehicle_stays_stopped",
                          bool(wreck) and all(r[3] <= p.stop_speed_mps for r in wreck), ""))

    first = _lane_series(trace, "first_car")
    went_left = bool(first) and any(r[1] == first[0][1] - 1 for r in first)
    clauses.append(Clause("first_car_turns_left", went_left, ""))

    second = _lane_series(trace, "second_car")
    went_right = bool(second) and any(r[1] == second[0][1] + 1 for r in second)
    clauses.append(Clause("second_car_turns_right", went_right, ""))

    clean = not _collided(trace, "first_car", "crashed_car") and not _collided(
        trace, "second_car", "crashed_car"
    )
    clauses.append(Clause("no_collision_with_wreck", clean, ""))
    return Verdict("accident", tuple(clauses))


def check_ambulance(trace, p: CheckerParams) -> Verdict:
    clauses = []
    layout = trace.layout()
    amb = _lane_series(trace, "ambulance")
    amb_lane = amb[0][1] if amb else None
    clauses.append(Clause("ambulance_keeps_lane",
                          bool(amb) and all(r[1] == amb_lane for r in amb), ""))

    blockers = [a["name"] for a in trace.frames()[0]["actors"]
                if a["name"].startswith("slow_car")]
    made_way = bool(blockers)
    for name in blockers:
        cleared_before_pass = False
        for t, ra, rb in _paired(trace, "ambulance", name):
            if ra[1] >= rb[1]:  # ambulance has caught up
                cleared_before_pass = lane_of(rb[2], layout) != amb_lane
                break
        else:
            cleared_before_pass = False
        made_way = made_way and cleared_before_pass
    clauses.append(Clause("vehicles_make_way", made_way, f"blockers={blockers}"))

    clauses.append(Clause("no_collisions", not trace.events("collision"), ""))

    final = trace.series("ambulance")
    passed_all = bool(final) and all(
        final[-1][1] > trace.series(name)[-1][1] for name in blockers
    )
    clauses.append(Clause("ambulance_passes_through", passed_all, ""))
    return Verdict("ambulance", tuple(clauses))


def check_bus(trace, p: CheckerParams, bus_stop_s=200.0, stop_lane=3, start_lane=2) -> Verdict:
    clauses = []
    lanes = _lane_series(trace, "bus")
    t_stopped = _first_time(
        lanes, lambda r: r[1] == stop_lane and r[4] <= p.stop_speed_mps
        and abs(r[2] - bus_stop_s) <= p.bus_stop_tolerance_m
    )
    clauses.append(Clause("stops_at_bus_stop", t_stopped is not None,
                          f"stopped in lane {stop_lane} within ±{p.bus_stop_tolerance_m} m "
                          f"of s={bus_stop_s} at t={t_stopped}"))

    resumed = None
    if t_stopped is not None:
        resumed = _first_time(lanes, lambda r: r[0] > t_stopped and r[4] > 1.0)
    clauses.append(Clause("starts_again", resumed is not None, ""))

    back = None
    if resumed is not None:
        back = _first_time(lanes, lambda r: r[0] > resumed and r[1] == start_lane)
    clauses.append(Clause("returns_to_original_lane", back is not None, ""))
    return Verdict("bus", tuple(clauses))


def _overtake_side(trace, mover, target):
    """Lane relation (mover - target) at the frame where mover passes target."""
    layout = trace.layout()
    for t, rm, rt in _paired(trace, mover, target):
        if rm[1] >= rt[1]:
            return lane_of(rm[2], layout) - lane_of(rt[2], layout)
    return None


def check_reckless(trace, p: CheckerParams) -> Verdict:
    clauses = []
    side1 = _overtake_side(trace, "reckless_car", "car_one")
    clauses.append(Clause("overtakes_first_from_left", side1 is not None and side1 < 0,
                          f"lane offset at pass: {side1}"))
    side2 = _overtake_side(trace, "reckless_car", "car_two")
    clauses.append(Clause("overtakes_second_from_right", side2 is not None and side2 > 0,
                          f"lane offset at pass: {side2}"))
    rk = trace.series("reckless_car")
    ahead = bool(rk) and all(
        rk[-1][1] > trace.series(n)[-1][1] for n in ("car_one", "car_two")
    )
    clauses.append(Clause("ends_ahead_of_both", ahead, ""))
    return Verdict("reckless_driving", tuple(clauses))


def check_cut_in(trace, p: CheckerParams) -> Verdict:
    clauses = []
    layout = trace.layout()
    pairs = _paired(trace, "cut_car", "VUT")
    starts_behind = bool(pairs) and pairs[0][1][1] < pairs[0][2][1]
    clauses.append(Clause("starts_behind_vut", starts_behind, ""))

    t_ahead = None
    for t, rc, rv in pairs:
        if rc[1] > rv[1] and lane_of(rc[2], layout) == lane_of(rv[2], layout):
            t_ahead = t
            break
    clauses.append(Clause("cuts_in_ahead_of_vut", t_ahead is not None, f"t={t_ahead}"))

    slowed = None
    if t_ahead is not None:
        slowed = _first_time(trace.series("cut_car"),
                             lambda r: r[0] > t_ahead and r[3] <= p.cut_in_slow_mps)
    clauses.append(Clause("slows_down_after_cut_in", slowed is not None,
                          f"v<={p.cut_in_slow_mps} at t={slowed}"))
    return Verdict("cut_in", tuple(clauses))


def check_sudden_jaywalker(trace, p: CheckerParams) -> Verdict:
    clauses = []
    layout = trace.layout()
    truck = trace.series("truck")
    clauses.append(Clause("truck_stays_stopped",
                          bool(truck) and all(r[3] <= p.stop_speed_mps for r in truck), ""))

    ped = trace.series("jaywalker")
    d0 = ped[0][2] if ped else None
    t_move = _first_time(ped, lambda r: abs(r[2] - d0) > 0.3)
    clauses.append(Clause("jaywalker_steps_out", t_move is not None, f"t={t_move}"))

    triggered_near = False
    if t_move is not None:
        for t, rv, rt in _paired(trace, "VUT", "truck"):
            if t >= t_move:
                triggered_near = abs(rv[1] - rt[1]) <= p.jaywalk_trigger_gap_m
                break
    clauses.append(Clause("steps_out_as_vut_approaches", triggered_near,
                          f"VUT within {p.jaywalk_trigger_gap_m} m of truck"))

    vut_lanes = {lane_of(d, layout) for _, s, d, v, a in trace.series("VUT")}
    entered = t_move is not None and any(
        r[0] >= t_move and lane_of(r[2], layout) in vut_lanes for r in ped
    )
    clauses.append(Clause("enters_vut_lane", entered, ""))
    return Verdict("sudden_jaywalker", tuple(clauses))


CHECKERS = {
    "accident": check_accident,
    "ambulance": check_ambulance,
    "bus": check_bus,
    "reckless_driving": check_reckless,
    "cut_in": check_cut_in,
    "sudden_jaywalker": check_sudden_jaywalker,
    "swerve": check_swerve,
    "three_in_line_1": check_three_in_line_1,
}


def check_trace(trace, checker_id: str, params: CheckerParams = CheckerParams()) -> Verdict:
    if checker_id not in CHECKERS:
        raise UnknownChecker(checker_id)
    if trace.header.get("aborted"):
        return Verdict(checker_id, (Clause("trace_complete", False, "run aborted"),))
    return CHECKERS[checker_id](trace, params)
