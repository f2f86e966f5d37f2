"""Exact rational arithmetic and piecewise-affine cost functions.

Everything downstream (value iteration, the sweep, region solving) works with
values that are either exact rationals or one of the two infinities.  Floats
appear only as the +inf/-inf sentinels; no rounding happens anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

INF = float("inf")
NEG_INF = float("-inf")

#: A value is an exact rational or one of the infinity sentinels.
Value = Union[Fraction, float]


class DomainError(ValueError):
    """Argument outside a cost function's domain, or malformed domain."""


class SeamMismatch(ValueError):
    """Concatenation seam values disagree."""


class InfinitePiece(ValueError):
    """Operation requires finite values but hit an infinite piece."""


def is_finite(v: Value) -> bool:
    return not isinstance(v, float)


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"expected an exact rational, got {type(v).__name__}: {v!r}")


def format_value(v: Value) -> str:
    """Render a value as "p/q" ("p" when integral), or "+inf"/"-inf"."""
    if isinstance(v, float):
        return "+inf" if v > 0 else "-inf"
    f = as_fraction(v)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def parse_value(text: str) -> Value:
    if text == "+inf":
        return INF
    if text == "-inf":
        return NEG_INF
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


@dataclass(frozen=True)
class Affine:
    """The line nu -> slope * nu + intercept."""

    slope: Fraction
    intercept: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", as_fraction(self.slope))
        object.__setattr__(self, "intercept", as_fraction(self.intercept))

    def __call__(self, nu) -> Fraction:
        return self.slope * as_fraction(nu) + self.intercept

    def intersect(self, other: "Affine") -> Fraction | None:
        """Abscissa where two non-parallel lines meet, else None."""
        if self.slope == other.slope:
            return None
        return (other.intercept - self.intercept) / (self.slope - other.slope)

    def shift(self, dy) -> "Affine":
        return Affine(self.slope, self.intercept + as_fraction(dy))

    @staticmethod
    def through(x1, v1, x2, v2) -> "Affine":
        x1, v1, x2, v2 = map(as_fraction, (x1, v1, x2, v2))
        if x1 == x2:
            raise DomainError("two distinct abscissae required")
        slope = (v2 - v1) / (x2 - x1)
        return Affine(slope, v1 - slope * x1)


def _check_piece(piece) -> None:
    if isinstance(piece, Affine):
        return
    if isinstance(piece, float) and (piece == INF or piece == NEG_INF):
        return
    raise TypeError(f"piece must be Affine or an infinity sentinel, got {piece!r}")


@dataclass(frozen=True)
class CostFunction:
    """Piecewise function on a closed rational interval [lo, hi].

    ``xs`` are the breakpoints (strictly increasing, first is lo, last is hi),
    ``vals`` the exact values at the breakpoints, and ``pieces[i]`` describes
    the open interval (xs[i], xs[i+1]): an Affine line or an infinity
    sentinel.  Adjacent finite pieces share their breakpoint value, so the
    function is continuous wherever it is finite.  A breakpoint value next to
    an infinite piece records the finite neighbour's value when there is one.

    Instances are canonical: collinear neighbours and same-sign infinite
    neighbours are merged on construction, which makes equality structural.
    """

    xs: tuple
    vals: tuple
    pieces: tuple

    def __post_init__(self):
        xs = tuple(as_fraction(x) for x in self.xs)
        if not xs:
            raise DomainError("a cost function needs at least one breakpoint")
        if any(xs[i] >= xs[i + 1] for i in range(len(xs) - 1)):
            raise DomainError("breakpoints must be strictly increasing")
        vals = tuple(v if isinstance(v, float) else as_fraction(v) for v in self.vals)
        if len(vals) != len(xs):
            raise DomainError("one value per breakpoint required")
        pieces = tuple(self.pieces)
        if len(pieces) != len(xs) - 1:
            raise DomainError("one piece per consecutive breakpoint pair required")
        for p in pieces:
            _check_piece(p)
        for i, p in enumerate(pieces):
            if isinstance(p, Affine):
                if p(xs[i]) != vals[i] or p(xs[i + 1]) != vals[i + 1]:
                    raise DomainError(
                        f"piece {i} does not meet its breakpoint values"
                    )
        xs, vals, pieces = _canonical(xs, vals, pieces)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vals", vals)
        object.__setattr__(self, "pieces", pieces)

    @property
    def lo(self) -> Fraction:
        return self.xs[0]

    @property
    def hi(self) -> Fraction:
        return self.xs[-1]

    @property
    def is_point(self) -> bool:
        return len(self.xs) == 1

    def all_finite(self) -> bool:
        return all(isinstance(p, Affine) for p in self.pieces) and all(
            is_finite(v) for v in self.vals
        )

    @staticmethod
    def from_points(points: Sequence) -> "CostFunction":
        """Interpolate finite breakpoint values: [(x0, v0), ..., (xn, vn)]."""
        pts = [(as_fraction(x), as_fraction(v)) for x, v in points]
        if len(pts) == 1:
            return CostFunction((pts[0][0],), (pts[0][1],), ())
        xs = tuple(x for x, _ in pts)
        vals = tuple(v for _, v in pts)
        pieces = tuple(
            Affine.through(xs[i], vals[i], xs[i + 1], vals[i + 1])
            for i in range(len(xs) - 1)
        )
        return CostFunction(xs, vals, pieces)

    @staticmethod
    def from_affine(lo, hi, line: Affine) -> "CostFunction":
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo == hi:
            return CostFunction((lo,), (line(lo),), ())
        return CostFunction((lo, hi), (line(lo), line(hi)), (line,))

    @staticmethod
    def constant(lo, hi, v: Value) -> "CostFunction":
        lo, hi = as_fraction(lo), as_fraction(hi)
        if isinstance(v, float):
            if lo == hi:
                return CostFunction((lo,), (v,), ())
            return CostFunction((lo, hi), (v, v), (v,))
        return CostFunction.from_affine(lo, hi, Affine(Fraction(0), as_fraction(v)))

    @staticmethod
    def point(x, v: Value) -> "CostFunction":
        return CostFunction((as_fraction(x),), (v if isinstance(v, float) else as_fraction(v),), ())

    def piece_at(self, nu) -> int:
        """Index of the piece whose closed span contains nu (leftmost)."""
        nu = as_fraction(nu)
        if nu < self.lo or nu > self.hi:
            raise DomainError(f"{nu} outside domain [{self.lo}, {self.hi}]")
        lo_idx, hi_idx = 0, len(self.pieces) - 1
        while lo_idx < hi_idx:
            mid = (lo_idx + hi_idx) // 2
            if nu <= self.xs[mid + 1]:
                hi_idx = mid
            else:
                lo_idx = mid + 1
        return lo_idx

    def restrict(self, lo, hi) -> "CostFunction":
        """The same function on the subdomain [lo, hi]."""
        lo, hi = as_fraction(lo), as_fraction(hi)
        if lo < self.lo or hi > self.hi or lo > hi:
            raise DomainError(f"[{lo}, {hi}] not inside [{self.lo}, {self.hi}]")
        if lo == hi:
            return CostFunction.point(lo, evaluate(self, lo))
        xs = [lo]
        vals = [evaluate(self, lo)]
        pieces = []
        for i, p in enumerate(self.pieces):
            a, b = self.xs[i], self.xs[i + 1]
            if b <= lo or a >= hi:
                continue
            cut_b = min(b, hi)
            pieces.append(p)
            xs.append(cut_b)
            vals.append(p(cut_b) if isinstance(p, Affine) else self.vals[i + 1] if cut_b == b else p)
        return CostFunction(tuple(xs), tuple(vals), tuple(pieces))


def _canonical(xs, vals, pieces):
    """Merge collinear finite neighbours and same-sign infinite neighbours."""
    if len(pieces) <= 1:
        return xs, vals, pieces
    out_x = [xs[0]]
    out_v = [vals[0]]
    out_p = []
    for i, p in enumerate(pieces):
        if out_p:
            prev = out_p[-1]
            mergeable = (
                isinstance(prev, Affine) and isinstance(p, Affine) and prev == p
            ) or (
                isinstance(prev, float) and isinstance(p, float) and prev == p
                and vals[i] == prev
            )
            if mergeable:
                out_x[-1] = xs[i + 1]
                out_v[-1] = vals[i + 1]
                continue
        out_p.append(p)
        out_x.append(xs[i + 1])
        out_v.append(vals[i + 1])
    return tuple(out_x), tuple(out_v), tuple(out_p)


def evaluate(f: CostFunction, nu) -> Value:
    """Exact value of f at nu; at a breakpoint, the recorded shared value."""
    nu = as_fraction(nu)
    if nu < f.lo or nu > f.hi:
        raise DomainError(f"{nu} outside domain [{f.lo}, {f.hi}]")
    # breakpoints carry their own value (matters next to infinite pieces)
    idx = None
    for i, x in enumerate(f.xs):
        if x == nu:
            return f.vals[i]
        if x > nu:
            idx = i - 1
            break
    if idx is None:
        idx = len(f.pieces) - 1
    piece = f.pieces[idx]
    if isinstance(piece, Affine):
        return piece(nu)
    return piece


def concat(f: CostFunction, f_left: CostFunction) -> CostFunction:
    """Glue f (right part) onto f_left (left part); domains meet in one point.

    The argument order follows the sweep's usage: a freshly computed left
    segment is prepended to the function accumulated so far.
    """
    if f.lo != f_left.hi:
        raise DomainError(
            f"domains must overlap in exactly one point, got [{f_left.lo},{f_left.hi}] then [{f.lo},{f.hi}]"
        )
    if evaluate(f, f.lo) != evaluate(f_left, f_left.hi):
        raise SeamMismatch(
            f"seam at {f.lo}: {format_value(evaluate(f_left, f_left.hi))} vs {format_value(evaluate(f, f.lo))}"
        )
    if f.is_point:
        return f_left
    if f_left.is_point:
        return f
    xs = f_left.xs + f.xs[1:]
    vals = f_left.vals + f.vals[1:]
    pieces = f_left.pieces + f.pieces
    return CostFunction(xs, vals, pieces)


def slope_between(f: CostFunction, nu1, nu2) -> Fraction:
    """Exact chord slope (f(nu2) - f(nu1)) / (nu2 - nu1), nu1 < nu2."""
    nu1, nu2 = as_fraction(nu1), as_fraction(nu2)
    if not nu1 < nu2:
        raise DomainError(f"need nu1 < nu2, got {nu1} >= {nu2}")
    v1, v2 = evaluate(f, nu1), evaluate(f, nu2)
    if not (is_finite(v1) and is_finite(v2)):
        raise InfinitePiece(f"chord over ({nu1}, {nu2}) hits an infinite value")
    return (v2 - v1) / (nu2 - nu1)


def pairwise_intersections(fs: Iterable[Affine], lo, hi) -> list:
    """All abscissae in [lo, hi] where two distinct lines of fs meet, sorted."""
    lo, hi = as_fraction(lo), as_fraction(hi)
    lines = list(dict.fromkeys(fs))
    found = set()
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            x = lines[i].intersect(lines[j])
            if x is not None and lo <= x <= hi:
                found.add(x)
    return sorted(found)
