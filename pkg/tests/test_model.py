import json
from fractions import Fraction as F

import pytest

from conftest import load_fixture
from ptgsolve.exactmath import Affine
from ptgsolve.model import (
    Game,
    GameSyntaxError,
    Guard,
    Location,
    Region,
    Transition,
    ValidationError,
    check_sptg,
    make_game,
    parse_game,
    regions_of,
    serialize_game,
)


def test_parse_fig1_constants():
    g = parse_game(load_fixture("fig1.json"))
    assert len(g.locations) == 8
    assert len(g.transitions) == 12
    assert g.max_transition_weight() == 7
    assert g.max_rate() == 16
    assert g.max_final_cost() == 0
    assert [l.name for l in g.final_locations] == ["lf"]


def test_parse_fig3_reset():
    g = parse_game(load_fixture("fig3.json"))
    assert g.clock_bound == 1
    assert sum(1 for t in g.transitions if t.reset) == 1


def test_final_with_outgoing_edge_rejected():
    doc = json.loads(load_fixture("fig1.json"))
    doc["transitions"].append(
        {"from": "lf", "to": "l1",
         "guard": {"lo": "0", "hi": "1", "lo_closed": True, "hi_closed": True},
         "reset": False, "weight": 0}
    )
    with pytest.raises(ValidationError) as err:
        parse_game(json.dumps(doc))
    assert err.value.reason == "final with outgoing edge"


def test_unknown_location_rejected():
    doc = json.loads(load_fixture("fig1.json"))
    doc["transitions"][0]["to"] = "nowhere"
    with pytest.raises(ValidationError):
        parse_game(json.dumps(doc))


def test_guard_beyond_clock_bound_rejected():
    doc = json.loads(load_fixture("fig1.json"))
    doc["transitions"][0]["guard"]["hi"] = "2"
    with pytest.raises(ValidationError) as err:
        parse_game(json.dumps(doc))
    assert err.value.reason == "guard out of bounds"


def test_rational_guard_endpoint_rejected():
    doc = json.loads(load_fixture("fig1.json"))
    doc["transitions"][0]["guard"]["hi"] = "1/2"
    with pytest.raises(ValidationError):
        parse_game(json.dumps(doc))


def test_unbounded_guard_rejected():
    doc = json.loads(load_fixture("fig1.json"))
    doc["transitions"][0]["guard"]["hi"] = "+inf"
    with pytest.raises(ValidationError):
        parse_game(json.dumps(doc))


def test_missing_final_cost_rejected():
    doc = json.loads(load_fixture("fig1.json"))
    del doc["locations"][-1]["final_cost"]
    with pytest.raises(ValidationError):
        parse_game(json.dumps(doc))


def test_deadlocked_location_rejected():
    doc = json.loads(load_fixture("fig1.json"))
    doc["transitions"] = [t for t in doc["transitions"] if t["from"] != "l7"]
    with pytest.raises(ValidationError) as err:
        parse_game(json.dumps(doc))
    assert err.value.reason == "deadlock"


def test_waiting_reaches_late_guard():
    # a location whose only guard sits at the clock bound is fine when it can wait
    text = json.dumps({
        "clock_bound": 1,
        "locations": [
            {"name": "a", "owner": "min", "rate": 0, "urgent": False},
            {"name": "f", "owner": "final", "rate": 0, "urgent": False,
             "final_cost": {"slope": "0", "intercept": "0"}},
        ],
        "transitions": [
            {"from": "a", "to": "f",
             "guard": {"lo": "1", "hi": "1", "lo_closed": True, "hi_closed": True},
             "reset": False, "weight": 0},
        ],
    })
    g = parse_game(text)
    assert g.location("a").owner == "min"


def test_urgent_location_needs_guard_everywhere():
    text = json.dumps({
        "clock_bound": 1,
        "locations": [
            {"name": "a", "owner": "min", "rate": 0, "urgent": True},
            {"name": "f", "owner": "final", "rate": 0, "urgent": False,
             "final_cost": {"slope": "0", "intercept": "0"}},
        ],
        "transitions": [
            {"from": "a", "to": "f",
             "guard": {"lo": "1", "hi": "1", "lo_closed": True, "hi_closed": True},
             "reset": False, "weight": 0},
        ],
    })
    with pytest.raises(ValidationError) as err:
        parse_game(text)
    assert err.value.reason == "deadlock"


def test_not_json_is_syntax_error():
    with pytest.raises(GameSyntaxError):
        parse_game("not json at all")


def test_check_sptg():
    fig1 = parse_game(load_fixture("fig1.json"))
    fig3 = parse_game(load_fixture("fig3.json"))
    assert check_sptg(fig1, 1)
    assert not check_sptg(fig3, 1)
    assert not check_sptg(fig1, F(1, 2))


def test_regions_single_guard():
    g = parse_game(load_fixture("fig1.json"))
    assert regions_of(g) == [Region(0, 0), Region(0, 1), Region(1, 1)]


def test_regions_mixed_guards():
    g = parse_game(load_fixture("reset_chain.json"))
    assert regions_of(g) == [
        Region(0, 0), Region(0, 1), Region(1, 1), Region(1, 2), Region(2, 2),
    ]


def test_regions_partition_bound():
    g = parse_game(load_fixture("reset_chain.json"))
    regs = regions_of(g)
    # the union covers [0, M] with no overlap: points alternate with opens
    assert regs[0].lo == 0 and regs[-1].hi == g.clock_bound
    for left, right in zip(regs, regs[1:]):
        assert left.hi == right.lo
        assert left.is_point != right.is_point


def test_serialize_round_trip():
    for name in ("fig1.json", "fig3.json", "appc.json", "urgent_all.json", "reset_chain.json"):
        g = parse_game(load_fixture(name))
        assert parse_game(serialize_game(g)) == g


def test_weight_bound_invariant():
    g = parse_game(load_fixture("fig1.json"))
    cap = g.max_transition_weight()
    widened = make_game(
        g.locations,
        list(g.transitions)
        + [Transition("l1", Guard.closed(0, 1), False, "lf", cap)],
        g.clock_bound,
    )
    assert widened.max_transition_weight() == cap


def test_internal_games_allow_rational_guards():
    loc = Location("a", "min", F(0), False, None)
    fin = Location("f", "final", F(0), False, Affine(0, 0))
    t = Transition("a", Guard.closed(0, F(3, 4)), False, "f", 0)
    g = make_game([loc, fin], [t], 1)
    assert g.transitions[0].guard.hi == F(3, 4)
