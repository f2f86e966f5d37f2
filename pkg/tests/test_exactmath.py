from fractions import Fraction as F

import pytest

from ptgsolve.exactmath import (
    INF,
    NEG_INF,
    Affine,
    CostFunction,
    DomainError,
    InfinitePiece,
    SeamMismatch,
    concat,
    evaluate,
    format_value,
    pairwise_intersections,
    parse_value,
    slope_between,
)


def test_evaluate_affine_endpoint():
    f = CostFunction.from_affine(0, 1, Affine(-3, -4))
    assert evaluate(f, 1) == -7


def test_evaluate_constant():
    f = CostFunction.constant(0, 1, 0)
    assert evaluate(f, F(1, 2)) == 0


def test_evaluate_interpolates_between_breakpoints():
    f = CostFunction.from_points([(0, F(-19, 2)), (F(1, 4), -6), (F(1, 2), F(-11, 2))])
    assert evaluate(f, F(1, 8)) == F(-31, 4)


def test_evaluate_outside_domain():
    f = CostFunction.constant(0, 1, 0)
    with pytest.raises(DomainError):
        evaluate(f, 2)


def test_concat_two_segments():
    right = CostFunction.from_points([(F(1, 2), F(1, 2)), (1, 1)])
    left = CostFunction.from_points([(0, F(-1, 2)), (F(1, 2), F(1, 2))])
    glued = concat(right, left)
    assert glued.xs == (F(0), F(1, 2), F(1))
    assert evaluate(glued, F(1, 2)) == F(1, 2)
    assert len(glued.pieces) == 2


def test_concat_point_domain_is_identity():
    f = CostFunction.from_points([(F(1, 4), 2), (1, 5)])
    point = f.restrict(F(1, 4), F(1, 4))
    assert concat(f, point) == f


def test_concat_prepends_fig_segments():
    # the last two pieces of the first location's value function
    right = CostFunction.from_points([(F(9, 10), F(-1, 5)), (1, 0)])
    left = CostFunction.from_points([(F(3, 4), -2), (F(9, 10), F(-1, 5))])
    glued = concat(right, left)
    assert glued.xs == (F(3, 4), F(9, 10), F(1))
    assert evaluate(glued, F(9, 10)) == F(-1, 5)


def test_concat_seam_mismatch():
    right = CostFunction.constant(F(1, 2), 1, 3)
    left = CostFunction.constant(0, F(1, 2), 2)
    with pytest.raises(SeamMismatch):
        concat(right, left)


def test_concat_needs_single_point_overlap():
    right = CostFunction.constant(F(1, 4), 1, 0)
    left = CostFunction.constant(0, F(1, 2), 0)
    with pytest.raises(DomainError):
        concat(right, left)


def test_concat_agreement_invariant():
    right = CostFunction.from_points([(F(1, 2), 1), (1, 3)])
    left = CostFunction.from_points([(0, 0), (F(1, 2), 1)])
    glued = concat(right, left)
    for x in (0, F(1, 4), F(1, 2), F(3, 4), 1):
        want = evaluate(right, x) if x >= F(1, 2) else evaluate(left, x)
        assert evaluate(glued, x) == want


def test_slope_between_affine():
    f = CostFunction.from_affine(0, 1, Affine(-3, -4))
    assert slope_between(f, 0, 1) == -3


def test_slope_between_constant():
    f = CostFunction.constant(0, 1, 7)
    assert slope_between(f, F(1, 8), F(3, 4)) == 0


def test_slope_between_chord_over_kink():
    f = CostFunction.from_points([(F(3, 4), -2), (F(9, 10), F(-1, 5)), (1, 0)])
    assert slope_between(f, F(3, 4), F(9, 10)) == 12


def test_slope_between_translation_invariant():
    pts = [(0, F(-19, 2)), (F(1, 4), -6), (F(1, 2), F(-11, 2))]
    f = CostFunction.from_points(pts)
    g = CostFunction.from_points([(x, v + 17) for x, v in pts])
    for a, b in [(0, F(1, 4)), (F(1, 8), F(3, 8)), (0, F(1, 2))]:
        assert slope_between(f, a, b) == slope_between(g, a, b)


def test_slope_between_infinite_piece():
    f = CostFunction.constant(0, 1, INF)
    with pytest.raises(InfinitePiece):
        slope_between(f, 0, 1)


def test_pairwise_intersections_basic():
    assert pairwise_intersections([Affine(-3, -4), Affine(16, -10)], 0, 1) == [F(6, 19)]


def test_pairwise_intersections_parallel():
    assert pairwise_intersections([Affine(1, 0), Affine(1, 1)], 0, 1) == []


def test_pairwise_intersections_concurrent_lines():
    # all three pairs of these lines meet at the single point 1/2
    lines = [Affine(0, 0), Affine(2, -1), Affine(-2, 1)]
    assert pairwise_intersections(lines, 0, 1) == [F(1, 2)]


def test_pairwise_intersections_size_bound():
    lines = [Affine(k, k * k) for k in range(6)]
    hits = pairwise_intersections(lines, -100, 100)
    assert len(hits) <= len(lines) * (len(lines) - 1) // 2


def test_canonical_merges_collinear_pieces():
    f = CostFunction.from_points([(0, 0), (F(1, 2), F(1, 2)), (1, 1)])
    assert f.xs == (F(0), F(1))
    assert f == CostFunction.from_affine(0, 1, Affine(1, 0))


def test_breakpoints_strictly_increasing():
    with pytest.raises(DomainError):
        CostFunction.from_points([(0, 0), (0, 1)])


def test_infinite_constant_function():
    f = CostFunction.constant(0, 1, NEG_INF)
    assert evaluate(f, F(1, 3)) == NEG_INF
    assert not f.all_finite()


def test_restrict_mid_piece():
    f = CostFunction.from_points([(0, 0), (1, 4)])
    g = f.restrict(F(1, 4), F(3, 4))
    assert g.lo == F(1, 4) and g.hi == F(3, 4)
    assert evaluate(g, F(1, 2)) == 2


def test_value_round_trip_strings():
    for v in (F(6, 19), F(-31, 4), F(5), INF, NEG_INF):
        assert parse_value(format_value(v)) == v
    assert format_value(F(5)) == "5"
    assert format_value(F(-1, 5)) == "-1/5"
