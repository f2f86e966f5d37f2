"""Exact solver for simple priced timed games over the unit clock interval.

The value functions are computed by a right-to-left sweep.  Anchored at the
right end of the remaining interval, every location gets a fresh final
clone that prices "wait here until the anchor, then bank the known value";
the resulting game is urgent everywhere and can be solved at single
valuations.  Walking the candidate cutpoints downward, a chord-slope test
per location decides how far the anchored picture stays truthful; where it
breaks, the sweep restarts from the last confirmed point.  Each confirmed
segment is exact, so the assembled functions are the values of the game.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exactmath import (
    Affine,
    CostFunction,
    as_fraction,
    concat,
    evaluate,
    format_value,
)
from .model import FINAL, MAX, MIN, Game, Guard, Location, Transition, check_sptg, make_game
from .strategy import FPStrategy, Move, SwitchingStrategy
from .urgent import (
    InstantEvaluator,
    attractor_strategy,
    iteration_bound,
    possible_cutpoints,
)

WAIT_SUFFIX = "@wait"


class NonSPTG(ValueError):
    """The game has guards or resets the sweep cannot handle directly."""


class InfiniteValue(ValueError):
    """An operation that needs finite values met an infinite one."""


class MissingTerminalValue(KeyError):
    """The waiting construction got no anchor value for some location."""


class BudgetExceeded(RuntimeError):
    """The sweep used more candidate evaluations than allowed."""


class EmptyGame(ValueError):
    """Pruning removed every non-final location."""

    def __init__(self, infinite: dict):
        super().__init__("every non-final location has infinite value")
        self.infinite = infinite


@dataclass
class PruneResult:
    game: Game
    infinite: dict
    transition_origin: tuple


@dataclass
class WindowTrace:
    start: Fraction
    slope_breaks: list = field(default_factory=list)
    rejection: Optional[tuple] = None


@dataclass
class SweepTrace:
    boundaries: list = field(default_factory=list)
    windows: list = field(default_factory=list)


@dataclass
class Solution:
    game: Game
    values: dict
    max_strategy: FPStrategy
    min_strategy: SwitchingStrategy
    trace: SweepTrace
    infinite: dict


def make_urgent(g: Game) -> Game:
    """Copy of the game where no location may let time pass."""
    locs = tuple(
        l if l.is_final or l.urgent else dataclasses.replace(l, urgent=True)
        for l in g.locations
    )
    return make_game(locs, g.transitions, g.clock_bound)


def waiting(g: Game, r, anchor: dict) -> Game:
    """Game on [0, r] where waiting until r is priced by the anchor values.

    Every non-urgent non-final location gets a final clone whose cost is
    the waiting cost to r plus its anchor value, reachable by a fresh
    zero-weight transition.  Original transitions keep their order and
    indices; the clone edges are appended after all of them.
    """
    r = as_fraction(r)
    locs = []
    clone_edges = []
    for l in g.locations:
        locs.append(l)
        if l.is_final or l.urgent:
            continue
        if l.name not in anchor:
            raise MissingTerminalValue(l.name)
        v = anchor[l.name]
        if isinstance(v, float):
            raise InfiniteValue(f"{l.name}: anchor value must be finite, got {v}")
        clone = Location(
            l.name + WAIT_SUFFIX,
            FINAL,
            Fraction(0),
            False,
            Affine(-as_fraction(l.rate), r * as_fraction(l.rate) + as_fraction(v)),
        )
        locs.append(clone)
        clone_edges.append(
            Transition(l.name, Guard.closed(0, r), False, clone.name, 0)
        )
    trans = [
        dataclasses.replace(t, guard=Guard.closed(0, r)) for t in g.transitions
    ]
    return make_game(tuple(locs), tuple(trans) + tuple(clone_edges), r)


def prune_infinite(g: Game) -> PruneResult:
    """Splits off the locations whose value is +inf or -inf everywhere.

    Whether a location has infinite value does not depend on the clock, so
    one urgent solve at the right end decides it.  The returned game keeps
    only the finite part; transition_origin maps its transition indices
    back to the input game.
    """
    vv = InstantEvaluator(make_urgent(g)).value_vector(g.clock_bound)
    infinite = {n: v for n, v in vv.values.items() if isinstance(v, float)}
    while True:
        keep = {l.name for l in g.locations if l.name not in infinite}
        stranded = []
        for l in g.locations:
            if l.is_final or l.name in infinite:
                continue
            alive = [
                i
                for i in g.outgoing(l.name)
                if g.transitions[i].target in keep
            ]
            if not alive:
                stranded.append(l.name)
        if not stranded:
            break
        for n in stranded:
            infinite[n] = float("inf")
    locs = tuple(l for l in g.locations if l.name not in infinite)
    origin = tuple(
        i
        for i, t in enumerate(g.transitions)
        if t.source not in infinite and t.target not in infinite
    )
    trans = tuple(g.transitions[i] for i in origin)
    pruned = make_game(locs, trans, g.clock_bound)
    return PruneResult(pruned, infinite, origin)


def _slope_violations(g: Game, f_b: dict, x_a: dict, b, a) -> list:
    """Locations whose chord between the anchored and the candidate values
    is not achievable by waiting there (in file order)."""
    out = []
    for l in g.locations:
        if l.is_final or l.urgent:
            continue
        chord = (f_b[l.name] - x_a[l.name]) / (b - a)
        rate = as_fraction(l.rate)
        if l.owner == MIN:
            if chord < -rate:
                out.append(l.name)
        else:
            if chord > -rate:
                out.append(l.name)
    return out


def slope_test(g: Game, f_b: dict, x_a: dict, b, a) -> bool:
    return not _slope_violations(g, f_b, x_a, b, a)


def default_max_steps(g: Game) -> int:
    return 4 * len(g.locations) * iteration_bound(make_urgent(g))


def solve(g: Game, max_steps: Optional[int] = None) -> Solution:
    """Values and optimal strategies of a simple game on [0, 1]."""
    if g.clock_bound != 1 or not check_sptg(g, 1):
        raise NonSPTG("expected guards [0, 1] everywhere and no resets")
    pr = prune_infinite(g)
    core = pr.game
    if not core.nonfinal_locations:
        raise EmptyGame(pr.infinite)
    budget = default_max_steps(core) if max_steps is None else max_steps
    spent = 0

    end_ev = InstantEvaluator(make_urgent(core))
    end_vals, _, _ = end_ev.run(1)
    if any(isinstance(v, float) for v in end_vals):
        raise AssertionError("pruning must leave finite values only")
    names = [l.name for l in core.locations]
    fns = {n: CostFunction.point(1, v) for n, v in zip(names, end_vals)}

    trace = SweepTrace(boundaries=[Fraction(1)])
    r = Fraction(1)
    while r > 0:
        anchor = {n: evaluate(fns[n], r) for n in names}
        wg = make_urgent(waiting(core, r, anchor))
        ev = InstantEvaluator(wg)
        grid = possible_cutpoints(wg, r)
        win = WindowTrace(start=r)
        b = r
        f_b = anchor
        prev_chords = None
        rejected = False
        for a in reversed(grid[:-1]):
            spent += 1
            if spent > budget:
                raise BudgetExceeded(
                    f"sweep exceeded {budget} candidate evaluations"
                )
            vals_a, _, _ = ev.run(a)
            x_a = dict(zip(ev.names, vals_a))
            if any(isinstance(x_a[n], float) for n in names):
                raise AssertionError("window game produced an infinite value")
            bad = _slope_violations(core, f_b, x_a, b, a)
            if bad:
                if b == r:
                    raise AssertionError(
                        f"first candidate {format_value(a)} of the window at "
                        f"{format_value(r)} failed the slope test"
                    )
                win.rejection = (a, bad)
                trace.windows.append(win)
                trace.boundaries.append(b)
                r = b
                rejected = True
                break
            chords = {n: (f_b[n] - x_a[n]) / (b - a) for n in names}
            if prev_chords is not None:
                moved = [n for n in names if chords[n] != prev_chords[n]]
                if moved:
                    win.slope_breaks.append((b, moved))
            for n in names:
                seg = CostFunction.from_points([(a, x_a[n]), (b, f_b[n])])
                fns[n] = concat(fns[n], seg)
            prev_chords = chords
            b = a
            f_b = x_a
        if not rejected:
            trace.windows.append(win)
            trace.boundaries.append(Fraction(0))
            r = Fraction(0)

    values = {}
    for l in g.locations:
        if l.name in pr.infinite:
            values[l.name] = CostFunction.constant(0, 1, pr.infinite[l.name])
        elif l.is_final:
            values[l.name] = CostFunction.from_affine(0, 1, l.final_cost)
        else:
            values[l.name] = fns[l.name]

    max_fp, min_fp = _synthesize(core, fns, pr.transition_origin)
    sigma2 = {
        n: pr.transition_origin[i]
        for n, i in attractor_strategy(make_urgent(core)).items()
    }
    n_locs = len(core.locations)
    reach = (n_locs - 1) * core.max_transition_weight() + core.max_final_cost()
    lowest = min(min(f.vals) for f in fns.values())
    threshold = lowest - reach - core.max_rate()
    minstrat = SwitchingStrategy(min_fp, sigma2, as_fraction(threshold))
    return Solution(g, values, max_fp, minstrat, trace, pr.infinite)


def _synthesize(core: Game, fns: dict, origin: tuple) -> tuple:
    """Optimal finitely-positional strategies from the value functions.

    The clock interval is cut at every breakpoint of every value function
    into cells closed on the left; inside one cell each location either
    waits (its value slides along its own rate toward the cell's right
    end) or fires a transition that is tight there.  Tightness is read off
    an anchored urgent solve at the cell midpoint and extends to the whole
    closed cell because everything in sight is affine.  Waiting cells are
    merged into one row that waits until the run ends and then plays the
    move prescribed at the run end, which by the left-closed convention is
    the move of the cell starting there (or the no-time-left move at 1);
    every zero-delay step at a valuation therefore uses one cell's tight
    edges, and those never cycle.
    """
    breaks = sorted({x for f in fns.values() for x in f.xs})
    cells = list(zip(breaks, breaks[1:]))
    names = [l.name for l in core.locations if not l.is_final]
    WAIT = "wait"

    end_ev = InstantEvaluator(make_urgent(core))
    end_vals, end_ranks, _ = end_ev.run(1)
    end_moves = _tight_moves(
        core, dict(zip(end_ev.names, end_vals)), dict(zip(end_ev.names, end_ranks))
    )

    per_cell = []
    for lo, hi in cells:
        anchor = {n: evaluate(fns[n], hi) for n in fns}
        wg = make_urgent(waiting(core, hi, anchor))
        ev = InstantEvaluator(wg)
        mid = (lo + hi) / 2
        vals, ranks, _ = ev.run(mid)
        by_name = dict(zip(ev.names, vals))
        rank_of = dict(zip(ev.names, ranks))
        for n in names:
            if by_name[n] != evaluate(fns[n], mid):
                raise AssertionError(
                    f"cell [{format_value(lo)}, {format_value(hi)}): anchored value "
                    f"of {n} disagrees with the computed value function"
                )
        moves = {}
        for l in core.locations:
            if l.is_final:
                continue
            if not l.urgent:
                clone = l.name + WAIT_SUFFIX
                if by_name[clone] == by_name[l.name]:
                    moves[l.name] = WAIT
                    continue
            moves[l.name] = _tight_move_at(core, l, by_name, rank_of)
        per_cell.append(moves)

    max_rows, max_end = {}, {}
    min_rows, min_end = {}, {}
    for l in core.locations:
        if l.is_final:
            continue
        rows = []
        k = len(cells)
        i = 0
        while i < k:
            move = per_cell[i][l.name]
            if move == WAIT:
                j = i
                while j + 1 < k and per_cell[j + 1][l.name] == WAIT:
                    j += 1
                run_end = cells[j][1]
                after = (
                    end_moves[l.name]
                    if j + 1 == k
                    else per_cell[j + 1][l.name]
                )
                rows.append(
                    (cells[i][0], run_end, Move.wait_until(run_end, origin[after]))
                )
                i = j + 1
            else:
                rows.append((cells[i][0], cells[i][1], Move.now(origin[move])))
                i += 1
        merged = [rows[0]]
        for lo, hi, mv in rows[1:]:
            plo, phi, pmv = merged[-1]
            if mv == pmv:
                merged[-1] = (plo, hi, mv)
            else:
                merged.append((lo, hi, mv))
        target_rows = max_rows if l.owner == MAX else min_rows
        target_end = max_end if l.owner == MAX else min_end
        target_rows[l.name] = merged
        target_end[l.name] = Move.now(origin[end_moves[l.name]])
    return FPStrategy(max_rows, max_end), FPStrategy(min_rows, min_end)


def _tight_move_at(core: Game, l: Location, vals: dict, ranks: dict) -> int:
    """Index (in core) of the transition to fire at a location right now."""
    tight = [
        i
        for i in core.outgoing(l.name)
        if core.transitions[i].weight + vals[core.transitions[i].target]
        == vals[l.name]
    ]
    if l.owner == MAX:
        if not tight:
            raise AssertionError(f"{l.name}: no tight transition at a Max location")
        return tight[0]
    progressing = [
        i for i in tight if ranks[core.transitions[i].target] < ranks[l.name]
    ]
    if not progressing:
        raise AssertionError(f"{l.name}: no progressing tight transition")
    return progressing[0]


def _tight_moves(core: Game, vals: dict, ranks: dict) -> dict:
    return {
        l.name: _tight_move_at(core, l, vals, ranks)
        for l in core.locations
        if not l.is_final
    }
