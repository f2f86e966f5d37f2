"""Solving games where every non-final location is urgent.

At a fixed valuation nu time cannot pass, so the game is a finite min/max
reachability game over the locations.  Value iteration from +inf converges to
the greatest fixpoint, which is the value; entries that sink below the finite
range are snapped to -inf.  The full value function over [0, r] is then
reconstructed by evaluating at every possible cutpoint, because between two
candidate cutpoints no two lines of the relevant family can cross.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exactmath import (
    INF,
    NEG_INF,
    CostFunction,
    as_fraction,
    format_value,
    is_finite,
)
from .model import MAX, MIN, Game


class PreconditionError(ValueError):
    """The game is not in the shape this routine requires."""


class NotFinite(ValueError):
    """Strategy extraction needs finite values everywhere."""


@dataclass(frozen=True)
class ValueVector:
    nu: Fraction
    values: dict

    def __getitem__(self, name: str) -> Value:
        return self.values[name]

    def all_finite(self) -> bool:
        return all(is_finite(v) for v in self.values.values())


def iteration_bound(g: Game) -> int:
    """Hard cap on value-iteration rounds until the fixpoint."""
    n = len(g.locations)
    nf = len(g.final_locations)
    pt = g.max_transition_weight()
    pf = g.max_final_cost()
    return nf * n * ((2 * n - 1) * pt + math.ceil(2 * pf) + 1) + n


class InstantEvaluator:
    """Precompiled value iteration for one all-urgent game.

    The hot loop runs on integers: final costs at nu are brought to a common
    denominator and every arithmetic step stays exact.  Infinities are float
    sentinels, which compare and add correctly against Python ints.
    """

    def __init__(self, g: Game):
        for loc in g.locations:
            if not loc.is_final and not loc.urgent:
                raise PreconditionError(
                    f"non-urgent non-final location {loc.name}; make the game urgent first"
                )
        self.game = g
        self.names = [l.name for l in g.locations]
        self.index = {n: i for i, n in enumerate(self.names)}
        self.final_phi = {
            self.index[l.name]: l.final_cost for l in g.locations if l.is_final
        }
        self.rows = []  # (loc_idx, is_max, [(weight, tgt_idx), ...])
        for l in g.locations:
            if l.is_final:
                continue
            moves = [
                (g.transitions[i].weight, self.index[g.transitions[i].target])
                for i in g.outgoing(l.name)
            ]
            self.rows.append((self.index[l.name], l.owner == MAX, moves))
        n = len(g.locations)
        self.cutoff = -(n - 1) * g.max_transition_weight() - g.max_final_cost()
        self.bound = iteration_bound(g)

    def run(self, nu, history: list | None = None) -> tuple:
        """Returns (values list, ranks list, rounds).

        ranks[i] is the round at which location i last changed (finals 0);
        entries still +inf at the fixpoint keep rank 0.  When a list is
        passed as history it receives the value vector after every round.
        """
        nu = as_fraction(nu)
        phi_at = {i: phi(nu) for i, phi in self.final_phi.items()}
        denom = math.lcm(
            as_fraction(self.cutoff).denominator,
            *(v.denominator for v in phi_at.values()),
        )
        cutoff = int(as_fraction(self.cutoff) * denom)
        x = [INF] * len(self.names)
        for i, v in phi_at.items():
            x[i] = int(v * denom)
        ranks = [0] * len(self.names)
        rounds = 0
        scaled_weights = [
            (idx, is_max, [(w * denom, t) for (w, t) in moves])
            for (idx, is_max, moves) in self.rows
        ]
        while True:
            rounds += 1
            if rounds > self.bound:
                raise AssertionError(
                    f"value iteration exceeded its round bound {self.bound}"
                )
            changed = False
            prev = list(x)
            for idx, is_max, moves in scaled_weights:
                if not moves:
                    best = INF  # stuck: the play never reaches a final
                else:
                    it = (w + prev[t] for (w, t) in moves)
                    best = max(it) if is_max else min(it)
                if not isinstance(best, float) and best < cutoff:
                    best = NEG_INF
                if best != prev[idx]:
                    x[idx] = best
                    ranks[idx] = rounds
                    changed = True
            if history is not None:
                history.append(
                    [v if isinstance(v, float) else Fraction(v, denom) for v in x]
                )
            if not changed:
                break
        vals = [
            v if isinstance(v, float) else Fraction(v, denom) for v in x
        ]
        return vals, ranks, rounds

    def value_vector(self, nu) -> ValueVector:
        vals, _, _ = self.run(nu)
        return ValueVector(as_fraction(nu), dict(zip(self.names, vals)))


def solve_instant(g: Game, nu) -> ValueVector:
    """Exact values of an all-urgent game at one valuation."""
    return InstantEvaluator(g).value_vector(nu)


def line_family(g: Game) -> list:
    """All integer shifts k + phi of final cost functions, k in the value window."""
    n = len(g.locations)
    pt = g.max_transition_weight()
    lo, hi = -(n - 1) * pt, n * pt
    out = []
    seen = set()
    for l in g.final_locations:
        for k in range(lo, hi + 1):
            line = l.final_cost.shift(k)
            if line not in seen:
                seen.add(line)
                out.append(line)
    return out


def possible_cutpoints(g: Game, r) -> list:
    """Candidate cutpoints in [0, r]: crossings of the line family, plus 0 and r.

    Enumerating the full family is wasteful; for each pair of base final
    functions only integer offsets d = k1 - k2 within the value window can
    produce a crossing, and the crossing abscissa determines d uniquely, so
    the pairs are walked directly.
    """
    r = as_fraction(r)
    n = len(g.locations)
    pt = g.max_transition_weight()
    width = (2 * n - 1) * pt
    finals = [l.final_cost for l in g.final_locations]
    found = {Fraction(0), r}
    for i in range(len(finals)):
        for j in range(i + 1, len(finals)):
            ds = finals[i].slope - finals[j].slope
            if ds == 0:
                continue
            dc = finals[j].intercept - finals[i].intercept
            # x = (dc + d)/ds must land in [0, r]
            lo_d, hi_d = sorted((-dc, r * ds - dc))
            lo_i = max(math.ceil(lo_d), -width)
            hi_i = min(math.floor(hi_d), width)
            for d in range(lo_i, hi_i + 1):
                x = (dc + d) / ds
                if 0 <= x <= r:
                    found.add(x)
    return sorted(found)


def solve_all_urgent(g: Game, r) -> dict:
    """Value functions of an all-urgent game on [0, r]."""
    r = as_fraction(r)
    ev = InstantEvaluator(g)
    pts = possible_cutpoints(g, r)
    if r == 0:
        pts = [Fraction(0)]
    samples = [ev.run(p)[0] for p in pts]
    out = {}
    for i, name in enumerate(ev.names):
        column = [s[i] for s in samples]
        if any(isinstance(v, float) for v in column):
            uniform = column[0]
            if not all(v == uniform for v in column):
                raise AssertionError(
                    f"{name}: infinite value must be uniform across the interval"
                )
            out[name] = CostFunction.constant(0, r, uniform)
        elif len(pts) == 1:
            out[name] = CostFunction.point(pts[0], column[0])
        else:
            out[name] = CostFunction.from_points(list(zip(pts, column)))
    return out


def attractor_strategy(g: Game) -> dict:
    """Minimal-step reachability choices toward the final locations.

    Level 0 holds the finals; a Min location enters the attractor once some
    successor is in, a Max location once all successors are.  The returned
    map sends each non-final location to the index of its chosen transition
    (lowest index among those into the lowest level).
    """
    level = {l.name: 0 for l in g.final_locations}
    nonfinal = [l for l in g.locations if not l.is_final]
    current = 0
    while True:
        current += 1
        grew = False
        for l in nonfinal:
            if l.name in level:
                continue
            succs = [g.transitions[i].target for i in g.outgoing(l.name)]
            if l.owner == MIN:
                ok = any(s in level for s in succs)
            else:
                ok = succs and all(s in level for s in succs)
            if ok:
                level[l.name] = current
                grew = True
        if not grew:
            break
    choice = {}
    for l in nonfinal:
        if l.name not in level:
            continue
        best = None
        for i in g.outgoing(l.name):
            tgt = g.transitions[i].target
            if tgt in level:
                key = level[tgt]
                if best is None or key < best[0]:
                    best = (key, i)
        choice[l.name] = best[1]
    return choice


@dataclass(frozen=True)
class UntimedStrategies:
    """Positional choices at one valuation: transition indices per location."""

    max_choice: dict
    sigma1: dict
    sigma2: dict
    threshold: Fraction
    values: ValueVector


def extract_untimed_strategies(g: Game, nu) -> UntimedStrategies:
    ev = InstantEvaluator(g)
    vals, ranks, _ = ev.run(nu)
    if any(isinstance(v, float) for v in vals):
        bad = [ev.names[i] for i, v in enumerate(vals) if isinstance(v, float)]
        raise NotFinite(f"infinite values at {format_value(as_fraction(nu))}: {bad}")
    by_name = dict(zip(ev.names, vals))
    rank_of = dict(zip(ev.names, ranks))

    max_choice = {}
    sigma1 = {}
    for l in g.locations:
        if l.is_final:
            continue
        tight = [
            i
            for i in g.outgoing(l.name)
            if g.transitions[i].weight + by_name[g.transitions[i].target]
            == by_name[l.name]
        ]
        if l.owner == MAX:
            max_choice[l.name] = tight[0]
        else:
            progressing = [
                i for i in tight if rank_of[g.transitions[i].target] < rank_of[l.name]
            ]
            # the round that settled this value used one such transition
            sigma1[l.name] = progressing[0]

    sigma2 = attractor_strategy(g)
    missing = [l.name for l in g.locations if not l.is_final and l.name not in sigma2]
    if missing:
        raise NotFinite(f"attractor does not cover {missing}; values cannot be finite")

    n = len(g.locations)
    reach_cost = (n - 1) * g.max_transition_weight() + g.max_final_cost()
    threshold = min(by_name.values()) - reach_cost
    return UntimedStrategies(
        max_choice,
        sigma1,
        sigma2,
        as_fraction(threshold),
        ValueVector(as_fraction(nu), by_name),
    )
