"""From the primitive MST to a tokenized visual graph.

The passes run in order: negative charge detection, reconnection of
floating parallel lines, edge restructuring (add ring closures and
label contacts, prune floating objects), tokenization, bond labeling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from statistics import fmean, pstdev
from typing import Iterable

from .geometry import (EPS, Box, Point, Segment, angle_between, closest_distance, dist,
                       endpoint_distance, mean_endpoint_distance, perpendicular_offset,
                       projection_overlap)
from .ingest import CHAR, LINE, NEGATIVE, PLUS, POLYGON, POLYLINE, SOLID_WEDGE, Primitive
from .mst import PrimitiveGraph, distance, is_line_like
from .params import DEFAULT_PARAMS, ParserParams

SINGLE = "Single"
DOUBLE = "Double"
TRIPLE = "Triple"
HASHED = "HashedWedge"
SOLID = "SolidWedge"
WAVY = "Wavy"
BOND_LABELS = (SINGLE, DOUBLE, TRIPLE, SOLID, HASHED, WAVY)

OVERLAP_FRACTION = 0.3
NEAREST_NEIGHBORS = 5
LENGTH_SLACK = 0.05


class VisualWarning(UserWarning):
    pass


@dataclass
class VisualGraph(PrimitiveGraph):
    """Primitive graph after restructuring.

    ``reference`` keeps the tree edges the thresholds are derived from, so
    restructuring can be reapplied to its own output. ``bound`` maps a
    negative charge to the character it belongs to.
    """

    reference: dict[tuple[int, int], float] = field(default_factory=dict)
    bound: dict[int, int] = field(default_factory=dict)

    def copy(self) -> "VisualGraph":
        return VisualGraph(list(self.nodes), dict(self.edges), dict(self.reference), dict(self.bound))


def _as_visual(g: PrimitiveGraph) -> VisualGraph:
    if isinstance(g, VisualGraph):
        return g.copy()
    return VisualGraph(list(g.nodes), dict(g.edges), dict(g.edges), {})


def side_by_side(s1: Segment, s2: Segment, tolerance: float) -> bool:
    """Parallel, overlapping in projection and not collinear."""
    if angle_between(s1, s2) > tolerance:
        return False
    shorter = min(s1.length, s2.length)
    if projection_overlap(s1, s2) <= OVERLAP_FRACTION * shorter:
        return False
    return perpendicular_offset(s1, s2) > 0.05 * shorter


# -- negative charges ------------------------------------------------------

def detect_negative_charges(g: PrimitiveGraph, params: ParserParams = DEFAULT_PARAMS) -> VisualGraph:
    vg = _as_visual(g)
    nodes = vg.nodes
    lines = [p for p in nodes if p.kind == LINE]
    chars = [p for p in nodes if p.kind == CHAR]
    horizontal = Segment((0.0, 0.0), (1.0, 0.0))
    for p in lines:
        seg = p.geometry
        if angle_between(seg, horizontal) > params.angle_tolerance_degrees:
            continue
        others = [q.geometry.length for q in lines if q.id != p.id]
        # a minus sign never touches a bond line
        if any(endpoint_distance(seg, q.axis) <= max(p.line_width, q.line_width)
               for q in nodes if q.id != p.id and is_line_like(q)):
            continue
        if others and seg.length > params.neg_charge_length_tolerance * fmean(others):
            continue
        box = p.box
        cy = (seg.a[1] + seg.b[1]) / 2.0
        best = None
        for c in chars:
            cb = c.box
            if cb.height <= 0 or box.xmin < cb.xmax - 0.25 * cb.width:
                continue
            gap = box.xmin - cb.xmax
            if gap > cb.width:
                continue
            # height above the box bottom (page y grows downward)
            frac = (cb.ymax - cy) / cb.height
            if not params.neg_charge_y_position <= frac <= 1.5:
                continue
            key = (max(gap, 0.0), c.id)
            if best is None or key < best[0]:
                best = (key, c)
        if best is None:
            continue
        c = best[1]
        nodes[p.id] = Primitive(p.id, NEGATIVE, p.geometry, "-", p.line_width, p.source)
        for e in [e for e in vg.edges if p.id in e]:
            del vg.edges[e]
        vg.add(p.id, c.id, closest_distance(p.geometry, c.geometry))
        vg.reference = {e: d for e, d in vg.reference.items() if p.id not in e}
        vg.reference[(min(p.id, c.id), max(p.id, c.id))] = vg.edges[(min(p.id, c.id), max(p.id, c.id))]
        vg.bound[p.id] = c.id
    return vg


# -- floating parallel lines -----------------------------------------------

def reconnect_floating_parallels(g: PrimitiveGraph, params: ParserParams = DEFAULT_PARAMS) -> VisualGraph:
    vg = _as_visual(g)
    nodes = vg.nodes
    tol = params.angle_tolerance_degrees
    for p in nodes:
        if p.kind != LINE:
            continue
        nbrs = vg.neighbors(p.id)
        if len(nbrs) != 1:
            continue
        cur = nodes[nbrs[0]]
        if cur.kind == LINE and side_by_side(p.geometry, cur.geometry, tol):
            continue
        cur_score = (mean_endpoint_distance(p.geometry, cur.geometry) if cur.kind == LINE
                     else distance(p, cur))
        near = sorted((distance(p, q), q.id) for q in nodes if q.id != p.id)[:NEAREST_NEIGHBORS]
        best = None
        for _, qid in near:
            q = nodes[qid]
            if q.kind != LINE or qid == cur.id or not side_by_side(p.geometry, q.geometry, tol):
                continue
            score = mean_endpoint_distance(p.geometry, q.geometry)
            if best is None or (score, qid) < best:
                best = (score, qid)
        if best is not None and best[0] < cur_score:
            vg.remove(p.id, cur.id)
            vg.add(p.id, best[1], distance(p, nodes[best[1]]))
            vg.reference.pop((min(p.id, cur.id), max(p.id, cur.id)), None)
            vg.reference[(min(p.id, best[1]), max(p.id, best[1]))] = distance(p, nodes[best[1]])
    return vg


# -- restructuring ---------------------------------------------------------

def _pair_type(p: Primitive, q: Primitive, tol: float) -> str:
    if is_line_like(p) and is_line_like(q):
        if angle_between(p.axis, q.axis) <= tol:
            return "parallel"
        return "nonparallel"
    if (p.kind == CHAR and is_line_like(q)) or (q.kind == CHAR and is_line_like(p)):
        return "charline"
    return "other"


@dataclass(frozen=True)
class Thresholds:
    nonparallel: float | None
    charline: float | None
    parallel: float | None

    @property
    def reference(self) -> float | None:
        for v in (self.charline, self.parallel, self.nonparallel):
            if v is not None:
                return v
        return None


def reference_thresholds(vg: VisualGraph, params: ParserParams) -> Thresholds:
    tol = params.angle_tolerance_degrees
    by_type: dict[str, list[float]] = {"parallel": [], "nonparallel": [], "charline": [], "other": []}
    for (i, j), d in vg.reference.items():
        by_type[_pair_type(vg.nodes[i], vg.nodes[j], tol)].append(d)
    cl = by_type["charline"]
    z = params.char_line_z_tolerance
    if z is not None and len(cl) >= 2:
        mu, sigma = fmean(cl), pstdev(cl)
        if sigma > 0:
            cl = [d for d in cl if (d - mu) / sigma <= z]
    return Thresholds(max(by_type["nonparallel"], default=None), max(cl, default=None),
                      max(by_type["parallel"], default=None))


def restructure_edges(g: PrimitiveGraph, params: ParserParams = DEFAULT_PARAMS) -> VisualGraph:
    vg = _as_visual(g)
    nodes = vg.nodes
    tol = params.angle_tolerance_degrees
    th = reference_thresholds(vg, params)
    n = len(nodes)
    widths = [p.line_width for p in nodes if is_line_like(p)]
    floor = fmean(widths) if widths else 0.0

    alpha = params.close_nonparallel_alpha
    if alpha is not None and th.nonparallel is not None:
        limit = alpha * max(th.nonparallel, floor) + EPS
        for i in range(n):
            for j in range(i + 1, n):
                if (i, j) in vg.edges or _pair_type(nodes[i], nodes[j], tol) != "nonparallel":
                    continue
                d = distance(nodes[i], nodes[j])
                if d <= limit:
                    vg.edges[(i, j)] = d

    alpha = params.close_char_line_alpha
    if alpha is not None and th.charline is not None:
        limit = alpha * max(th.charline, floor) + EPS
        for i in range(n):
            for j in range(i + 1, n):
                if (i, j) in vg.edges or _pair_type(nodes[i], nodes[j], tol) != "charline":
                    continue
                d = distance(nodes[i], nodes[j])
                if d <= limit:
                    vg.edges[(i, j)] = d

    ref = th.reference
    if params.max_alpha_dist is not None and ref is not None:
        limit = params.max_alpha_dist * max(ref, floor) + EPS
        vg.edges = {e: d for e, d in vg.edges.items() if d <= limit}
    return vg


# -- tokens ----------------------------------------------------------------

NAME = "Name"
BOND = "Bond"
CHARGE = "Charge"
GRAPHIC = "Graphic"


@dataclass
class Token:
    """A merged group of primitives.

    Name tokens carry ``text``; bond tokens carry ``line_count``, ``label``
    and ``endpoints`` (start, end for wedges); charge tokens carry ``text``
    of ``+`` or ``-`` and the name token they belong to in ``owner``.
    """

    id: int
    kind: str
    prims: tuple[int, ...]
    box: Box
    text: str | None = None
    line_count: int = 0
    label: str | None = None
    endpoints: tuple[Point, Point] | None = None
    owner: int | None = None


@dataclass
class TokenGraph:
    tokens: list[Token]
    edges: set[tuple[int, int]]
    nodes: list[Primitive]
    warnings: list[str] = field(default_factory=list)

    def neighbors(self, t: int) -> list[int]:
        return sorted(b if a == t else a for a, b in self.edges if t in (a, b))


def _components(ids: Iterable[int], adj: dict[int, set[int]]) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for s in sorted(ids):
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        out.append(sorted(comp))
    return out


def tokenize(g: PrimitiveGraph, params: ParserParams = DEFAULT_PARAMS) -> TokenGraph:
    vg = g if isinstance(g, VisualGraph) else _as_visual(g)
    nodes = vg.nodes
    tol = params.angle_tolerance_degrees
    char_adj: dict[int, set[int]] = {}
    line_adj: dict[int, set[int]] = {}
    for i, j in vg.edges:
        p, q = nodes[i], nodes[j]
        if p.kind == CHAR and q.kind == CHAR:
            char_adj.setdefault(i, set()).add(j)
            char_adj.setdefault(j, set()).add(i)
        elif p.kind == LINE and q.kind == LINE and side_by_side(p.geometry, q.geometry, tol):
            line_adj.setdefault(i, set()).add(j)
            line_adj.setdefault(j, set()).add(i)
    # lines of a double or triple bond ending at a label may each attach
    # only to the label's character; side-by-side lines sharing one are joined
    for c in (p.id for p in nodes if p.kind == CHAR):
        attached = [q for q in vg.neighbors(c) if nodes[q].kind == LINE]
        for x, i in enumerate(attached):
            for j in attached[x + 1:]:
                if side_by_side(nodes[i].geometry, nodes[j].geometry, tol):
                    line_adj.setdefault(i, set()).add(j)
                    line_adj.setdefault(j, set()).add(i)

    tokens: list[Token] = []
    owner: dict[int, int] = {}

    def emit(kind, prims, **kw):
        t = Token(len(tokens), kind, tuple(prims),
                  _union_box(nodes[i].box for i in prims), **kw)
        tokens.append(t)
        for i in prims:
            owner[i] = t.id
        return t

    chars = [p.id for p in nodes if p.kind == CHAR]
    for comp in _components(chars, char_adj):
        ordered = sorted(comp, key=lambda i: (nodes[i].center[0], nodes[i].center[1], i))
        emit(NAME, ordered, text="".join(nodes[i].label for i in ordered))
    lines = [p.id for p in nodes if p.kind == LINE]
    for comp in _components(lines, line_adj):
        emit(BOND, comp, line_count=len(comp))
    for p in nodes:
        if p.kind == SOLID_WEDGE:
            emit(BOND, [p.id], line_count=1, label=SOLID)
    tg_warnings = []
    for p in nodes:
        if p.kind in (NEGATIVE, PLUS):
            emit(CHARGE, [p.id], text="-" if p.kind == NEGATIVE else "+")
        elif p.kind in (POLYLINE, POLYGON):
            emit(GRAPHIC, [p.id])
            tg_warnings.append(f"primitive {p.id} ({p.kind}) is not interpreted")

    names = [t for t in tokens if t.kind == NAME]
    for t in tokens:
        if t.kind != CHARGE:
            continue
        pid = t.prims[0]
        if pid in vg.bound:
            t.owner = owner[vg.bound[pid]]
        elif names:
            prim = nodes[pid]
            t.owner = min(names, key=lambda n: (min(closest_distance(prim.geometry, nodes[c].geometry)
                                                    for c in n.prims), n.id)).id

    edges: set[tuple[int, int]] = set()
    for i, j in vg.edges:
        a, b = owner[i], owner[j]
        if a != b:
            edges.add((min(a, b), max(a, b)))
    for t in tokens:
        if t.kind == CHARGE and t.owner is not None:
            edges.add((min(t.id, t.owner), max(t.id, t.owner)))
    for w in tg_warnings:
        warnings.warn(w, VisualWarning, stacklevel=2)
    return TokenGraph(tokens, edges, nodes, tg_warnings)


def _union_box(boxes: Iterable[Box]) -> Box:
    it = iter(boxes)
    b = next(it)
    for o in it:
        b = b.union(o)
    return b


# -- bond labels -----------------------------------------------------------

def _topological(segs: list[Segment]) -> list[Segment]:
    def key(s):
        return (min(s.a[1], s.b[1]), min(s.a[0], s.b[0]))
    return sorted(segs, key=key)


def _monotone(lengths: list[float]) -> bool:
    inc = all(b > a * (1 + LENGTH_SLACK) for a, b in zip(lengths, lengths[1:]))
    dec = all(a > b * (1 + LENGTH_SLACK) for a, b in zip(lengths, lengths[1:]))
    return inc or dec


def _aligned_endpoints(segs: list[Segment]) -> tuple[Point, Point]:
    """Average endpoints of the longest lines, paired along the first."""
    top = max(s.length for s in segs)
    longest = [s for s in segs if s.length >= top * (1 - LENGTH_SLACK)]
    ref = longest[0]
    ax, bx = [], []
    for s in longest:
        if dist(s.a, ref.a) + dist(s.b, ref.b) > dist(s.a, ref.b) + dist(s.b, ref.a):
            s = s.reversed()
        ax.append(s.a)
        bx.append(s.b)
    return (_mean(ax), _mean(bx))


def _mean(pts: list[Point]) -> Point:
    return (fmean(p[0] for p in pts), fmean(p[1] for p in pts))


def _hashed_endpoints(segs: list[Segment]) -> tuple[Point, Point]:
    """Short end to long end, extended by one hash spacing on each side so the
    ends land on the atoms rather than on the outermost hashes."""
    ordered = sorted(segs, key=lambda s: s.length)
    start, end = ordered[0].midpoint, ordered[-1].midpoint
    span = dist(start, end)
    if span <= EPS or len(segs) < 2:
        return (start, end)
    step = span / (len(segs) - 1)
    ux, uy = (end[0] - start[0]) / span, (end[1] - start[1]) / span
    return ((start[0] - ux * step, start[1] - uy * step), (end[0] + ux * step, end[1] + uy * step))


def label_bonds(tg: TokenGraph) -> TokenGraph:
    for t in tg.tokens:
        if t.kind != BOND:
            continue
        prims = [tg.nodes[i] for i in t.prims]
        if t.label == SOLID or prims[0].kind == SOLID_WEDGE:
            t.label = SOLID
            t.endpoints = (prims[0].axis.a, prims[0].axis.b)
            continue
        segs = [p.geometry for p in prims]
        n = len(segs)
        if n == 1:
            t.label = SINGLE
        elif n == 2:
            t.label = DOUBLE
        elif n == 3:
            lengths = [s.length for s in _topological(segs)]
            t.label = HASHED if _monotone(lengths) else TRIPLE
        else:
            t.label = HASHED
        t.endpoints = _hashed_endpoints(segs) if t.label == HASHED else _aligned_endpoints(segs)
    return tg


def parse_visual(prims: list[Primitive], params: ParserParams = DEFAULT_PARAMS) -> TokenGraph:
    from .mst import build_mst
    g = build_mst(prims, params)
    g = detect_negative_charges(g, params)
    g = reconnect_floating_parallels(g, params)
    g = restructure_edges(g, params)
    return label_bonds(tokenize(g, params))
