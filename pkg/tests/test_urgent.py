from fractions import Fraction

import pytest

from ptgsolve.exactmath import INF, NEG_INF, Affine, evaluate, pairwise_intersections
from ptgsolve.model import Guard, Location, Transition, make_game, parse_game
from ptgsolve.urgent import (
    InstantEvaluator,
    NotFinite,
    PreconditionError,
    extract_untimed_strategies,
    iteration_bound,
    line_family,
    possible_cutpoints,
    solve_all_urgent,
    solve_instant,
)

from conftest import all_urgent, load_fixture

F = Fraction


def tiny(owner_weights, finals, *, bound=1):
    """Build a small all-urgent game from a compact description.

    owner_weights: {name: (owner, [(weight, target), ...])}
    finals: {name: Affine}
    """
    locs = []
    trans = []
    for name, (owner, moves) in owner_weights.items():
        locs.append(Location(name, owner, 0, True, None))
        for w, tgt in moves:
            trans.append(Transition(name, Guard.closed(0, bound), False, tgt, w))
    for name, phi in finals.items():
        locs.append(Location(name, "final", 0, False, phi))
    return make_game(tuple(locs), tuple(trans), bound)


@pytest.fixture(scope="module")
def fig1_urgent():
    return all_urgent(parse_game(load_fixture("fig1.json")))


@pytest.fixture(scope="module")
def appc_urgent():
    return all_urgent(parse_game(load_fixture("appc.json")))


def test_requires_urgency():
    g = parse_game(load_fixture("fig1.json"))
    with pytest.raises(PreconditionError):
        solve_instant(g, 1)


def test_fig1_values_at_one(fig1_urgent):
    vv = solve_instant(fig1_urgent, 1)
    expected = {
        "l1": 0,
        "l2": 1,
        "l3": -7,
        "l4": -7,
        "l5": 1,
        "l6": 1,
        "l7": 0,
        "lf": 0,
    }
    assert {k: v for k, v in vv.values.items()} == expected
    assert vv.all_finite()


def test_fig1_values_at_zero(fig1_urgent):
    # final cost is identically 0, so only the discrete weights matter and
    # the answer agrees with the valuation-1 one
    vv = solve_instant(fig1_urgent, 0)
    assert vv["l3"] == -7
    assert vv["l1"] == 0


def test_iteration_bound_examples(fig1_urgent):
    assert iteration_bound(fig1_urgent) == 856
    g = tiny({"a": ("min", [(1, "f")])}, {"f": Affine(0, 0)})
    assert iteration_bound(g) == 10
    g0 = tiny({"a": ("min", [(0, "f")])}, {"f": Affine(0, 0)})
    assert iteration_bound(g0) == 2 * len(g0.locations)


def test_iterates_decrease_and_converge(fig1_urgent):
    ev = InstantEvaluator(fig1_urgent)
    hist = []
    vals, _, rounds = ev.run(F(1, 3), history=hist)
    assert rounds <= iteration_bound(fig1_urgent)
    assert hist[-1] == vals
    for a, b in zip(hist, hist[1:]):
        assert all(x >= y for x, y in zip(a, b))


def test_ranks_settle_in_order(fig1_urgent):
    ev = InstantEvaluator(fig1_urgent)
    vals, ranks, _ = ev.run(1)
    by_name = dict(zip(ev.names, ranks))
    assert by_name["lf"] == 0
    assert all(by_name[l.name] >= 1 for l in fig1_urgent.nonfinal_locations)


def test_min_divergence_snaps_to_neg_inf():
    g = tiny(
        {"l": ("min", [(-1, "l"), (0, "f")])},
        {"f": Affine(0, 0)},
    )
    vv = solve_instant(g, 0)
    assert vv["l"] == NEG_INF


def test_max_prefers_endless_play():
    g = tiny(
        {"l": ("max", [(-1, "l"), (0, "f")])},
        {"f": Affine(0, 0)},
    )
    assert solve_instant(g, 0)["l"] == INF


def test_stuck_location_is_plus_inf():
    g = tiny(
        {"dead": ("max", []), "root": ("min", [(0, "dead"), (3, "f")])},
        {"f": Affine(0, 0)},
    )
    vv = solve_instant(g, 0)
    assert vv["dead"] == INF
    assert vv["root"] == 3


def test_line_family_constant_window():
    g = tiny({"a": ("min", [(1, "f")])}, {"f": Affine(0, 0)})
    fam = line_family(g)
    assert sorted(l.intercept for l in fam) == [-1, 0, 1, 2]
    assert all(l.slope == 0 for l in fam)


def test_line_family_fig1(fig1_urgent):
    fam = line_family(fig1_urgent)
    assert len(fam) == 106
    assert {l.slope for l in fam} == {0}
    assert min(l.intercept for l in fam) == -49
    assert max(l.intercept for l in fam) == 56


def test_cutpoints_constant_finals():
    g = tiny({"a": ("min", [(1, "f")])}, {"f": Affine(0, 0)})
    assert possible_cutpoints(g, F(1)) == [0, 1]
    assert possible_cutpoints(g, F(1, 2)) == [0, F(1, 2)]


def test_cutpoints_urgent_all_fixture():
    g = parse_game(load_fixture("urgent_all.json"))
    pts = possible_cutpoints(g, 1)
    assert pts[0] == 0 and pts[-1] == 1
    assert F(6, 19) in pts
    assert all(p.denominator in (1, 19) for p in pts)


def test_cutpoints_three_final_grid():
    g = tiny(
        {"a": ("min", [(1, "f0"), (0, "fu"), (-1, "fd")])},
        {"f0": Affine(0, 0), "fu": Affine(2, -1), "fd": Affine(-2, 1)},
    )
    assert possible_cutpoints(g, 1) == [0, F(1, 4), F(1, 2), F(3, 4), 1]


def test_cutpoints_agree_with_line_family():
    games = [
        tiny(
            {"a": ("min", [(1, "f0"), (0, "fu"), (-1, "fd")])},
            {"f0": Affine(0, 0), "fu": Affine(2, -1), "fd": Affine(-2, 1)},
        ),
        parse_game(load_fixture("urgent_all.json")),
    ]
    for g in games:
        for r in (F(1), F(2, 3)):
            lazy = possible_cutpoints(g, r)
            literal = sorted(
                set(pairwise_intersections(line_family(g), 0, r)) | {F(0), r}
            )
            assert lazy == literal


def test_solve_all_urgent_tracks_final_cost():
    g = tiny({"a": ("min", [(0, "f")])}, {"f": Affine(1, 0)})
    sol = solve_all_urgent(g, 1)
    f = sol["a"]
    assert f.xs == (0, 1)
    assert f.vals == (0, 1)


def test_solve_all_urgent_constant(appc_urgent):
    sol = solve_all_urgent(appc_urgent, 1)
    for name in ("l1", "l2"):
        f = sol[name]
        assert f.xs == (0, 1)
        assert f.vals == (-10, -10)


def test_solve_all_urgent_breakpoint():
    g = parse_game(load_fixture("urgent_all.json"))
    f = solve_all_urgent(g, 1)["l3"]
    assert f.xs == (0, F(6, 19), 1)
    assert f.vals == (-10, F(-94, 19), -7)
    assert evaluate(f, F(1, 2)) == min(-3 * F(1, 2) - 4, 16 * F(1, 2) - 10)


def test_solve_all_urgent_infinite_column():
    g = tiny(
        {"l": ("min", [(-1, "l"), (0, "f")])},
        {"f": Affine(0, 0)},
    )
    f = solve_all_urgent(g, 1)["l"]
    assert f.pieces == (NEG_INF,)
    assert evaluate(f, F(1, 3)) == NEG_INF


def test_strategies_appc(appc_urgent):
    s = extract_untimed_strategies(appc_urgent, 1)
    tr = appc_urgent.transitions
    assert s.values["l1"] == -10 and s.values["l2"] == -10
    assert tr[s.max_choice["l1"]].target == "lf"
    assert tr[s.sigma1["l2"]].target == "l1"
    assert tr[s.sigma2["l2"]].target == "lf"
    assert s.threshold == -30


def test_sigma1_escapes_zero_cycle():
    g = tiny(
        {
            "a": ("min", [(0, "b")]),
            "b": ("min", [(0, "a"), (0, "f")]),
        },
        {"f": Affine(0, 0)},
    )
    s = extract_untimed_strategies(g, 0)
    assert g.transitions[s.sigma1["b"]].target == "f"
    assert g.transitions[s.sigma1["a"]].target == "b"


def test_sigma2_reaches_final_quickly(fig1_urgent):
    s = extract_untimed_strategies(fig1_urgent, F(1, 2))
    pos = {l.name for l in fig1_urgent.nonfinal_locations}
    assert set(s.sigma2) == pos
    # following sigma2 from any location, allowing the opponent any reply,
    # must shrink the attractor level, so |L| hops suffice to leave pos
    for start in pos:
        cur = start
        for _ in range(len(fig1_urgent.locations)):
            loc = fig1_urgent.location(cur)
            if loc.is_final:
                break
            if loc.owner == "min":
                cur = fig1_urgent.transitions[s.sigma2[cur]].target
            else:
                # adversarial: any move, take the first
                cur = fig1_urgent.transitions[fig1_urgent.outgoing(cur)[0]].target
        assert fig1_urgent.location(cur).is_final


def test_strategies_need_finite_values():
    g = tiny(
        {"l": ("min", [(-1, "l"), (0, "f")])},
        {"f": Affine(0, 0)},
    )
    with pytest.raises(NotFinite):
        extract_untimed_strategies(g, 0)


def test_tight_choice_matches_value(fig1_urgent):
    s = extract_untimed_strategies(fig1_urgent, 1)
    vv = s.values
    for name, idx in {**s.max_choice, **s.sigma1}.items():
        t = fig1_urgent.transitions[idx]
        assert t.weight + vv[t.target] == vv[name]
