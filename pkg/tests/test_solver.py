"""End-to-end checks for the sweep solver on the bundled fixtures."""

from fractions import Fraction

import pytest

from conftest import load_fixture
from ptgsolve.exactmath import Affine, evaluate
from ptgsolve.model import Config, Guard, Location, Transition, make_game, parse_game
from ptgsolve.solver import (
    BudgetExceeded,
    EmptyGame,
    InfiniteValue,
    MissingTerminalValue,
    NonSPTG,
    default_max_steps,
    make_urgent,
    prune_infinite,
    solve,
    waiting,
)
from ptgsolve.strategy import fake_value_upper_bound, play_out, validate_nc

F = Fraction

# Hand-checked optimal values for the seven control locations of fig1,
# as (clock, value) breakpoints of the piecewise-affine value function.
FIG1_VALUES = {
    "l1": [(0, F(-19, 2)), (F(1, 4), -6), (F(1, 2), F(-11, 2)), (F(3, 4), -2), (F(9, 10), F(-1, 5)), (1, 0)],
    "l2": [(0, F(-19, 2)), (F(1, 4), -6), (F(1, 2), F(-11, 2)), (F(3, 4), -2), (1, 1)],
    "l3": [(0, -10), (F(1, 4), -6), (F(1, 2), F(-11, 2)), (1, -7)],
    "l4": [(0, -4), (1, -7)],
    "l5": [(0, -14), (F(3, 4), -2), (1, 1)],
    "l6": [(0, -11), (1, 1)],
    "l7": [(0, -16), (1, 0)],
}


@pytest.fixture(scope="module")
def fig1():
    return parse_game(load_fixture("fig1.json"))


@pytest.fixture(scope="module")
def fig1_solution(fig1):
    return solve(fig1)


@pytest.mark.parametrize("name", sorted(FIG1_VALUES))
def test_fig1_value_tables(fig1_solution, name):
    fn = fig1_solution.values[name]
    expected = FIG1_VALUES[name]
    assert list(zip(fn.xs, fn.vals)) == [(F(x), F(v)) for x, v in expected]


def test_fig1_final_location_value(fig1, fig1_solution):
    lf = next(l for l in fig1.locations if l.final_cost is not None)
    fn = fig1_solution.values[lf.name]
    for x in (F(0), F(1, 3), F(1)):
        assert evaluate(fn, x) == lf.final_cost(x)


def test_fig1_nothing_infinite(fig1_solution):
    assert fig1_solution.infinite == {}


def test_fig1_trace_boundaries(fig1_solution):
    assert fig1_solution.trace.boundaries == [F(1), F(3, 4), F(1, 2), F(1, 4), F(0)]


def test_fig1_trace_window_events(fig1_solution):
    w0, w1, w2, w3 = fig1_solution.trace.windows
    # The first window walks down from 1: the value of l1 changes slope at
    # 9/10 without invalidating the segment, then l2's chord breaks the
    # slope bound and 3/4 becomes the next boundary.
    assert w0.slope_breaks == [(F(9, 10), ["l1"])]
    assert w0.rejection is not None and w0.rejection[1] == ["l2"]
    assert w0.rejection[0] < F(3, 4)
    assert w1.slope_breaks == []
    assert w1.rejection is not None and w1.rejection[1] == ["l1"]
    assert w1.rejection[0] < F(1, 2)
    assert w2.rejection is not None and w2.rejection[1] == ["l2"]
    assert w2.rejection[0] < F(1, 4)
    # The last window reaches 0 with no violation.
    assert w3.rejection is None


PROBES = [F(0), F(1, 8), F(1, 4), F(1, 2), F(2, 3), F(3, 4), F(9, 10), F(19, 20), F(1)]


def test_fig1_optimal_playouts_match_values(fig1, fig1_solution):
    """Playing both synthesized strategies against each other realizes the value."""
    sol = fig1_solution
    for name in FIG1_VALUES:
        for nu in PROBES:
            play = play_out(fig1, Config(name, nu), sol.min_strategy, sol.max_strategy)
            assert play.reached_final, (name, nu)
            assert play.cost == evaluate(sol.values[name], nu), (name, nu)


def test_fig1_min_strategy_has_no_bad_cycles(fig1, fig1_solution):
    assert validate_nc(fig1, fig1_solution.min_strategy.sigma1) == []


@pytest.mark.parametrize(
    "name,nu,expected",
    [
        ("l1", F(0), F(-19, 2)),
        ("l1", F(9, 10), F(-1, 5)),
        ("l3", F(0), F(-10)),
        ("l7", F(0), F(-16)),
    ],
)
def test_fig1_fake_value_is_exact(fig1, fig1_solution, name, nu, expected):
    got = fake_value_upper_bound(fig1, fig1_solution.max_strategy, Config(name, nu))
    assert got == expected


def test_urgent_game_through_solve():
    g = parse_game(load_fixture("urgent_all.json"))
    sol = solve(g)
    fn = sol.values["l3"]
    assert list(zip(fn.xs, fn.vals)) == [(F(0), F(-10)), (F(6, 19), F(-94, 19)), (F(1), F(-7))]
    # Every location is urgent, so no slope test can fail and a single
    # window covers the whole clock range.
    assert sol.trace.boundaries == [F(1), F(0)]
    assert len(sol.trace.windows) == 1


def test_appc_values_and_threshold():
    g = parse_game(load_fixture("appc.json"))
    sol = solve(g)
    for name in ("l1", "l2"):
        fn = sol.values[name]
        assert fn.vals == (F(-10), F(-10))
    assert sol.min_strategy.threshold == F(-30)
    # Waiting costs Max nothing here (rate 0) so the synthesized row waits
    # out the clock and fires the exit edge at the bound.
    (lo, hi, move), = sol.max_strategy.rows["l1"]
    assert (lo, hi, move.kind) == (F(0), F(1), "wait_until")
    end = sol.max_strategy.at_end["l1"]
    assert g.transitions[end.t_index].target == "lf"


def _mixed_game():
    locs = (
        Location("trap", "max", 0, False, None),
        Location("drain", "min", 0, False, None),
        Location("m", "min", 0, False, None),
        Location("f", "final", 0, False, Affine(0, 0)),
    )
    trans = (
        Transition("trap", Guard.closed(0, 1), False, "trap", 1),
        Transition("drain", Guard.closed(0, 1), False, "drain", -1),
        Transition("drain", Guard.closed(0, 1), False, "f", 0),
        Transition("m", Guard.closed(0, 1), False, "f", 2),
    )
    return make_game(locs, trans, 1)


def test_prune_infinite_splits_off_divergent_locations():
    g = _mixed_game()
    pr = prune_infinite(g)
    assert pr.infinite == {"trap": float("inf"), "drain": float("-inf")}
    assert [l.name for l in pr.game.locations] == ["m", "f"]
    # Surviving transition indices point back into the original game.
    assert pr.transition_origin == (3,)
    assert g.transitions[3].source == "m"


def test_solve_keeps_infinite_locations_in_values():
    sol = solve(_mixed_game())
    assert evaluate(sol.values["trap"], F(1, 2)) == float("inf")
    assert evaluate(sol.values["drain"], F(1, 2)) == float("-inf")
    assert evaluate(sol.values["m"], F(1, 2)) == 2
    assert set(sol.infinite) == {"trap", "drain"}


def test_empty_game_when_nothing_finite_remains():
    locs = (
        Location("trap", "max", 0, False, None),
        Location("f", "final", 0, False, Affine(0, 0)),
    )
    trans = (Transition("trap", Guard.closed(0, 1), False, "trap", 1),)
    with pytest.raises(EmptyGame) as exc:
        solve(make_game(locs, trans, 1))
    assert exc.value.infinite == {"trap": float("inf")}


def test_budget_exhaustion_raises(fig1):
    with pytest.raises(BudgetExceeded):
        solve(fig1, max_steps=1)


def test_non_sptg_inputs_are_rejected():
    for name in ("fig3.json", "reset_chain.json"):
        with pytest.raises(NonSPTG):
            solve(parse_game(load_fixture(name)))


def test_waiting_requires_anchor_values(fig1):
    with pytest.raises(MissingTerminalValue):
        waiting(fig1, F(1), {})
    anchors = {l.name: Fraction(0) for l in fig1.locations}
    anchors["l1"] = float("inf")
    with pytest.raises(InfiniteValue):
        waiting(fig1, F(1), anchors)


def test_waiting_clones_every_lazy_location(fig1):
    anchors = {l.name: Fraction(i) for i, l in enumerate(fig1.locations)}
    wg = waiting(fig1, F(1, 2), anchors)
    clones = [l for l in wg.locations if l.name.endswith("@wait")]
    lazy = [l for l in fig1.locations if l.final_cost is None and not l.urgent]
    assert len(clones) == len(lazy)
    for c in clones:
        base = next(l for l in fig1.locations if l.name + "@wait" == c.name)
        # Cloned terminal cost pays the waiting rate until the window edge,
        # then the anchor value: at the edge it equals the anchor exactly.
        assert c.final_cost(F(1, 2)) == anchors[base.name]
    # Original transitions keep their positions; clone edges follow.
    for i, t in enumerate(fig1.transitions):
        assert wg.transitions[i].source == t.source
        assert wg.transitions[i].target == t.target
        assert wg.transitions[i].guard == Guard.closed(0, F(1, 2))
    assert all(t.target.endswith("@wait") for t in wg.transitions[len(fig1.transitions):])


def test_make_urgent_marks_everything(fig1):
    ug = make_urgent(fig1)
    assert all(l.urgent for l in ug.locations if l.final_cost is None)
    assert [t.source for t in ug.transitions] == [t.source for t in fig1.transitions]


def test_default_budget_scales_with_game_size(fig1):
    assert default_max_steps(fig1) == 27392
