"""Guarded one-clock games, reduced region by region to closed-guard games.

The solver in `solver` wants every guard to be the full clock range and no
resets.  A game with arbitrary interval guards and reset edges reduces to a
family of such games: cut the clock axis at every guard endpoint, copy each
location once per cut point and once per open interval between cuts, and
rewire the edges so plays of the original game correspond to plays through
the copies.  Strict guards disappear in the process (firing at a border of
a copy stands for firing arbitrarily close to it in the original game).

The copies form a directed graph.  As long as no cycle of that graph fires
a reset, its strongly connected components can be solved one at a time,
dependencies first: point copies are single-valuation games with no time
passage, interval copies become unit-interval closed-guard games after an
affine change of clock variable, and values already computed downstream
enter as terminal stubs.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactmath import Affine, CostFunction, concat, evaluate, format_value
from .model import (
    FINAL,
    MAX,
    MIN,
    Game,
    Guard,
    Location,
    Region,
    Transition,
    make_game,
    regions_of,
)
from .solver import EmptyGame, solve
from .urgent import solve_instant

INF = float("inf")
NEG_INF = float("-inf")

_FULL = Guard.closed(0, 1)


class ResetCycle(Exception):
    """Some cycle of the location/region graph fires a clock reset.

    Such games may need unboundedly many resets in optimal play, which this
    pipeline does not handle.  `witness` lists the locations of one
    offending cycle, first location repeated at the end.
    """

    def __init__(self, witness):
        self.witness = list(witness)
        super().__init__(" -> ".join(self.witness))


@dataclass(frozen=True)
class RegionTransition:
    """One edge between region copies.

    `source` and `target` are (location name, region index) pairs.  The
    guard is a closed interval or a point inside the source region's
    closure.  `origin` indexes the copied transition in the base game;
    border hops, which carry a location from one region into the next at
    zero cost, have origin None.
    """

    source: tuple
    guard: Guard
    reset: bool
    target: tuple
    weight: int
    origin: Optional[int]


@dataclass(frozen=True)
class RegionGame:
    base: Game
    regions: tuple
    locations: tuple
    transitions: tuple

    def outgoing_map(self) -> dict:
        out = {n: [] for n in self.locations}
        for i, t in enumerate(self.transitions):
            out[t.source].append(i)
        return out


def _restrict(gd: Guard, reg: Region) -> Optional[Guard]:
    """Guard of a copied edge within one region: closure of the overlap.

    A guard touching only the upper border of an open region collapses to
    that border point; firing there stands for firing ever closer to it.
    A guard touching only the lower border is dropped, those valuations
    lie in the past once the region has been entered.
    """
    if reg.is_point:
        return Guard.point(reg.lo) if gd.contains(reg.lo) else None
    above = isinstance(gd.hi, float) or gd.hi > reg.lo
    if gd.lo < reg.hi and above:
        lo = max(gd.lo, reg.lo)
        hi = reg.hi if isinstance(gd.hi, float) else min(gd.hi, reg.hi)
        return Guard.closed(lo, hi)
    if gd.contains(reg.hi):
        return Guard.point(reg.hi)
    return None


def build_region_game(g: Game, regions=None) -> RegionGame:
    """Copy every location into every clock region and rewire the edges.

    Copied edges keep their weight and follow the guard restriction rule of
    `_restrict`; a resetting edge always targets its location's copy in the
    {0} region.  Every non-final copy whose location may wait additionally
    gets a zero-weight hop into the neighbouring region above, available
    exactly at the border, so letting time cross a border is an explicit
    move of the copy graph.  Urgent locations get no hops: crossing a
    border needs time to pass.
    """
    regs = tuple(regions) if regions is not None else tuple(regions_of(g))
    assert regs and regs[0] == Region(0, 0), "regions must start at the zero point"
    nodes = tuple((l.name, i) for l in g.locations for i in range(len(regs)))
    edges = []
    for ti, t in enumerate(g.transitions):
        for i, reg in enumerate(regs):
            gd = _restrict(t.guard, reg)
            if gd is None:
                continue
            target = (t.target, 0) if t.reset else (t.target, i)
            edges.append(RegionTransition((t.source, i), gd, t.reset, target, t.weight, ti))
    for l in g.locations:
        if l.is_final or l.urgent:
            continue
        for i, reg in enumerate(regs):
            if i + 1 >= len(regs):
                continue
            border = reg.lo if reg.is_point else reg.hi
            edges.append(
                RegionTransition((l.name, i), Guard.point(border), False, (l.name, i + 1), 0, None)
            )
    return RegionGame(g, regs, nodes, tuple(edges))


@dataclass(frozen=True)
class ResetDAG:
    """Condensation of a region game into reset-free components.

    `components` lists the strongly connected components so that every edge
    leads into the same or an earlier component; solving them left to right
    therefore meets all dependencies.  `reset_edges` indexes the resetting
    transitions, all of which cross components once the check has passed.
    """

    rgame: RegionGame
    components: tuple
    node_component: dict
    reset_edges: tuple


def _tarjan(nodes, adj):
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(adj[root]))]
        while work:
            node, it = work[-1]
            pushed = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter
                    counter += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(adj[succ])))
                    pushed = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if pushed:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    m = stack.pop()
                    on_stack.discard(m)
                    comp.append(m)
                    if m == node:
                        break
                comps.append(tuple(comp))
    return comps


def _witness(rg: RegionGame, comp, bad: RegionTransition) -> list:
    """A location cycle through `bad`, shortest completion inside its component."""
    members = set(comp)
    adj = {}
    for t in rg.transitions:
        if t.source in members and t.target in members:
            adj.setdefault(t.source, []).append(t.target)
    prev = {bad.target: None}
    queue = [bad.target]
    while queue:
        cur = queue.pop(0)
        if cur == bad.source:
            break
        for nxt in adj.get(cur, ()):
            if nxt not in prev:
                prev[nxt] = cur
                queue.append(nxt)
    path = []
    cur = bad.source
    while cur is not None:
        path.append(cur)
        cur = prev.get(cur)
    path.reverse()
    names = [bad.source[0]] + [n[0] for n in path]
    collapsed = [names[0]]
    for nm in names[1:]:
        if nm != collapsed[-1]:
            collapsed.append(nm)
    if len(collapsed) == 1:
        return collapsed + collapsed
    # drop the closing repeat, rotate to the smallest name, close again
    ring = collapsed[:-1]
    k = ring.index(min(ring))
    ring = ring[k:] + ring[:k]
    return ring + [ring[0]]


def check_reset_acyclic(rg: RegionGame) -> ResetDAG:
    """Condense the region graph, refusing it when a cycle fires a reset."""
    adj = {n: [] for n in rg.locations}
    for t in rg.transitions:
        adj[t.source].append(t.target)
    comps = _tarjan(rg.locations, adj)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = ci
    for t in rg.transitions:
        if t.reset and comp_of[t.source] == comp_of[t.target]:
            raise ResetCycle(_witness(rg, comps[comp_of[t.source]], t))
    for t in rg.transitions:
        assert comp_of[t.target] <= comp_of[t.source]
    resets = tuple(i for i, t in enumerate(rg.transitions) if t.reset)
    return ResetDAG(rg, tuple(comps), comp_of, resets)


@dataclass(frozen=True)
class RegionSolution:
    """Exact values of a guarded game, organised by clock region.

    region_values[name][i] covers the closure of regions[i]: a CostFunction
    with the region's one-sided limits at its borders, or a bare float when
    the location's value is infinite throughout the region.  values[name]
    stitches the regions into maximal continuous segments over the full
    clock range; where two consecutive segments meet, the later one carries
    the value the game actually attains at the shared point.

    No strategies are produced on this path.  Near an open region border,
    optimal play may require moves ever closer to the border, which the
    finite strategy tables of `strategy` cannot express.
    """

    game: Game
    regions: tuple
    region_values: dict
    values: dict


def solving_regions(g: Game) -> tuple:
    """The partition the pipeline works over: guard-endpoint regions."""
    return tuple(regions_of(g))


class _SubGame:
    """Accumulates locations and edges for one closed-guard solver input."""

    def __init__(self):
        self.locations = []
        self.transitions = []
        self._stubs = {}
        self._trap = False
        self._drain = False
        self._counter = 0

    def add(self, loc: Location) -> None:
        self.locations.append(loc)

    def edge(self, src: str, tgt: str, weight: int) -> None:
        self.transitions.append(Transition(src, _FULL, False, tgt, weight))

    def trap(self) -> str:
        """A location worth plus infinity: its self loop never reaches a final."""
        if not self._trap:
            self.add(Location("@trap", MAX, 0, True, None))
            self.edge("@trap", "@trap", 0)
            self._trap = True
        return "@trap"

    def drain(self) -> str:
        """A location worth minus infinity: a free negative loop next to an exit."""
        if not self._drain:
            self.add(Location("@drain", MIN, 0, True, None))
            self.add(Location("@drain.out", FINAL, 0, False, Affine(0, 0)))
            self.edge("@drain", "@drain", -1)
            self.edge("@drain", "@drain.out", 0)
            self._drain = True
        return "@drain"

    def gadget(self, sign: float) -> str:
        return self.trap() if sign == INF else self.drain()

    def affine_stub(self, key, line: Affine) -> str:
        name = self._stubs.get(key)
        if name is None:
            name = f"@s{self._counter}"
            self._counter += 1
            self.add(Location(name, FINAL, 0, False, line))
            self._stubs[key] = name
        return name

    def value_stub(self, key, value) -> str:
        if isinstance(value, float):
            return self.gadget(value)
        return self.affine_stub(key, Affine(0, value))

    def game(self) -> Game:
        return make_game(self.locations, self.transitions, 1)


def _entry_value(nodeval: dict, rt: RegionTransition, x):
    """Value collected on entering rt's target at firing valuation x."""
    tv = nodeval[rt.target]
    if isinstance(tv, float):
        return tv
    return evaluate(tv, Fraction(0) if rt.reset else x)


def _solve_point_component(rg, comp, out_edges, nodeval, reg):
    m = reg.lo
    base = rg.base
    if len(comp) == 1 and base.location(comp[0][0]).is_final:
        phi = base.location(comp[0][0]).final_cost
        nodeval[comp[0]] = CostFunction.point(m, phi(m))
        return
    live = []
    stuck = set()
    for node in comp:
        assert not base.location(node[0]).is_final
        if out_edges[node]:
            live.append(node)
        else:
            # time stands still inside a point region, so a copy without
            # edges can never make progress again
            stuck.add(node)
            nodeval[node] = INF
    if not live:
        return
    members = set(live)
    sub = _SubGame()
    for node in live:
        loc = base.location(node[0])
        sub.add(Location(node[0], loc.owner, 0, True, None))
    for node in live:
        for j in out_edges[node]:
            rt = rg.transitions[j]
            assert rt.guard.contains(m)
            if rt.target in members:
                tgt = rt.target[0]
            elif rt.target in stuck:
                tgt = sub.trap()
            else:
                tgt = sub.value_stub((rt.target, rt.reset), _entry_value(nodeval, rt, m))
            sub.edge(node[0], tgt, rt.weight)
    vec = solve_instant(sub.game(), 1)
    for node in live:
        v = vec[node[0]]
        nodeval[node] = v if isinstance(v, float) else CostFunction.point(m, v)


def _border_values(rg, comp, out_edges, nodeval, b) -> dict:
    """Instant game at an open region's upper border.

    At the border no further time can pass inside the copy, so every
    member plays urgently; candidates are the interval edges evaluated at
    the border, the border-only edges, and, where the location may wait,
    the hop into the region above.
    """
    base = rg.base
    members = set(comp)
    sub = _SubGame()
    for node in comp:
        loc = base.location(node[0])
        sub.add(Location(node[0], loc.owner, 0, True, None))
    for node in comp:
        for j in out_edges[node]:
            rt = rg.transitions[j]
            if not rt.guard.contains(b):
                continue
            if rt.target in members:
                tgt = rt.target[0]
            else:
                tgt = sub.value_stub((rt.target, rt.reset), _entry_value(nodeval, rt, b))
            sub.edge(node[0], tgt, rt.weight)
    vec = solve_instant(sub.game(), 1)
    return {node: vec[node[0]] for node in comp}


def _solve_window(rg, comp, interior, nodeval, anchor, c, d, max_steps) -> dict:
    """One seam-free window [c, d] of an open region, as a unit-interval game.

    The change of variable x = c + t*(d-c) scales waiting rates by the
    window length and turns neighbour value functions into affine terminal
    costs.  Waiting past d is priced by a per-member terminal clone whose
    cost line starts at the member's already-known value at d and grows
    leftwards at the member's own rate, exactly what waiting would cost.
    """
    base = rg.base
    members = set(comp)
    length = d - c
    sub = _SubGame()
    dead = {}
    live = []
    for node in comp:
        loc = base.location(node[0])
        clone = None
        if not loc.urgent:
            av = anchor[node]
            if not isinstance(av, float):
                clone = av
            elif (av == INF) == (loc.owner == MAX):
                # the border favours this owner, who may simply wait it out
                clone = av
        if not interior[node] and clone is None:
            dead[node] = anchor[node] if not loc.urgent else INF
            continue
        live.append((node, clone))
    for node, _ in live:
        loc = base.location(node[0])
        sub.add(Location(node[0], loc.owner, loc.rate * length, loc.urgent, None))
    livenames = {node[0] for node, _ in live}
    for node, clone in live:
        name = node[0]
        for rt in interior[node]:
            if rt.target in members:
                if rt.target[0] in livenames:
                    tgt = rt.target[0]
                else:
                    tgt = sub.gadget(dead[rt.target])
            else:
                tv = nodeval[rt.target]
                if rt.reset:
                    v0 = tv if isinstance(tv, float) else evaluate(tv, 0)
                    tgt = sub.value_stub((rt.target, True), v0)
                elif isinstance(tv, float):
                    tgt = sub.gadget(tv)
                else:
                    vc, vd = evaluate(tv, c), evaluate(tv, d)
                    tgt = sub.affine_stub((rt.target, False), Affine(vd - vc, vc))
            sub.edge(name, tgt, rt.weight)
        if clone is not None:
            if isinstance(clone, float):
                sub.edge(name, sub.gadget(clone), 0)
            else:
                rate = base.location(name).rate * length
                stub = sub.affine_stub((node, "wait"), Affine(-rate, rate + clone))
                sub.edge(name, stub, 0)
    out = dict(dead)
    if not live:
        return out
    try:
        sol = solve(sub.game(), max_steps=max_steps)
    except EmptyGame as e:
        for node, _ in live:
            out[node] = e.infinite[node[0]]
        return out
    for node, _ in live:
        name = node[0]
        if name in sol.infinite:
            out[node] = sol.infinite[name]
        else:
            f = sol.values[name]
            pts = [(c + x * length, v) for x, v in zip(f.xs, f.vals)]
            out[node] = CostFunction.from_points(pts)
    return out


def _combine(parts, reg):
    """Join the right-to-left window results of one region closure."""
    if all(isinstance(p, float) for p in parts):
        assert len(set(parts)) == 1, (
            f"infinite value must cover all of ({format_value(reg.lo)},{format_value(reg.hi)})"
        )
        return parts[0]
    assert not any(isinstance(p, float) for p in parts), (
        "value switches between finite and infinite inside one region"
    )
    fn = parts[0]
    for p in parts[1:]:
        fn = concat(fn, p)
    return fn


def _solve_open_component(rg, comp, out_edges, nodeval, reg, max_steps):
    a, b = reg.lo, reg.hi
    base = rg.base
    if len(comp) == 1 and base.location(comp[0][0]).is_final:
        phi = base.location(comp[0][0]).final_cost
        nodeval[comp[0]] = CostFunction.from_affine(a, b, phi)
        return
    members = set(comp)
    interior = {}
    for node in comp:
        assert not base.location(node[0]).is_final
        full = []
        for j in out_edges[node]:
            rt = rg.transitions[j]
            if rt.guard.lo != rt.guard.hi:
                assert rt.guard.lo == a and rt.guard.hi == b
                full.append(rt)
        interior[node] = full
    anchor = _border_values(rg, comp, out_edges, nodeval, b)
    cuts = {a, b}
    for node in comp:
        for rt in interior[node]:
            if rt.target in members or rt.reset:
                continue
            tv = nodeval[rt.target]
            if not isinstance(tv, float):
                cuts.update(x for x in tv.xs if a < x < b)
    seams = sorted(cuts)
    pieces = {n: [] for n in comp}
    for k in range(len(seams) - 1, 0, -1):
        c, d = seams[k - 1], seams[k]
        wvals = _solve_window(rg, comp, interior, nodeval, anchor, c, d, max_steps)
        anchor = {}
        for n in comp:
            pieces[n].append(wvals[n])
            anchor[n] = wvals[n] if isinstance(wvals[n], float) else evaluate(wvals[n], c)
    for n in comp:
        nodeval[n] = _combine(pieces[n], reg)


def _stitch(regs, per) -> tuple:
    """Merge per-region values into maximal continuous segments."""
    segs = []
    cur = None
    for reg, piece in zip(regs, per):
        if isinstance(piece, float):
            if reg.is_point:
                pcf = CostFunction.point(reg.lo, piece)
            else:
                pcf = CostFunction.constant(reg.lo, reg.hi, piece)
        else:
            pcf = piece
        if cur is None:
            cur = pcf
        elif evaluate(cur, cur.hi) == evaluate(pcf, pcf.lo):
            cur = concat(pcf, cur)
        else:
            segs.append(cur)
            cur = pcf
    segs.append(cur)
    return tuple(segs)


def solve_reset_acyclic(g: Game, max_steps=None) -> RegionSolution:
    """Exact values of a guarded, reset-acyclic game over its whole clock range.

    Builds the region copy graph, refuses it when a cycle fires a reset,
    then solves the strongly connected components in dependency order:
    point copies as single-valuation games, interval copies as rescaled
    unit-interval games whose outside references enter as terminal stubs.
    `max_steps` caps each inner sweep separately, as in `solve`.
    """
    regs = solving_regions(g)
    rg = build_region_game(g, regs)
    dag = check_reset_acyclic(rg)
    out_edges = rg.outgoing_map()
    nodeval = {}
    for comp in dag.components:
        ridx = {n[1] for n in comp}
        assert len(ridx) == 1, "a reset-free component never spans regions"
        reg = regs[ridx.pop()]
        if reg.is_point:
            _solve_point_component(rg, comp, out_edges, nodeval, reg)
        else:
            _solve_open_component(rg, comp, out_edges, nodeval, reg, max_steps)
    region_values = {}
    values = {}
    for l in g.locations:
        per = tuple(nodeval[(l.name, i)] for i in range(len(regs)))
        region_values[l.name] = per
        values[l.name] = _stitch(regs, per)
    return RegionSolution(g, regs, region_values, values)
