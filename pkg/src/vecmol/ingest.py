"""Reading drawing primitives and turning raw graphics into typed tokens.

Two input formats are supported: SymbolScraper-style JSON and a small
postfix instruction language modelled on PDF content streams::

    a b c d e f cm      concatenate an affine matrix onto the CTM
    x y m / x y l       move / line to
    x1 y1 x2 y2 x3 y3 c cubic Bezier from the current point
    x y w h re          rectangle (always a filled polygon)
    h                   close the current subpath
    w_ w                set line width
    S / f               stroke / fill the pending path
    q / Q               save / restore graphics state
    x y w h (g) ch      place a glyph with box (x, y)-(x+w, y+h)
    EG                  end of graphic object

``%`` starts a comment. A pending path is stroked at ``EG`` or end of input.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass
from typing import Any, Iterable, Sequence, Union

from .geometry import (EPS, Box, GeometryError, Point, Polygon, Polyline, Segment,
                       angle_between, check_point, dist, flatten_bezier, line_intersection,
                       midpoint, segment_param)
from .params import DEFAULT_PARAMS, ParserParams

LINE = "Line"
POLYLINE = "Polyline"
POLYGON = "Polygon"
CHAR = "Char"
SOLID_WEDGE = "SolidWedge"
PLUS = "PlusCharge"
NEGATIVE = "NegativeCharge"
KINDS = (LINE, POLYLINE, POLYGON, CHAR, SOLID_WEDGE, PLUS, NEGATIVE)


class IngestError(ValueError):
    pass


class InstructionError(IngestError):
    def __init__(self, lineno: int, op: str, msg: str):
        super().__init__(f"line {lineno}: {op}: {msg}")
        self.lineno = lineno
        self.op = op


class IngestWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Primitive:
    """One input token.

    ``geometry`` is a Segment (Line, NegativeCharge), Polyline, Polygon
    (Polygon, SolidWedge) or Box (Char, PlusCharge). A SolidWedge keeps its
    ``(short, long)`` sides in ``parts``; a PlusCharge keeps its two strokes.
    """

    id: int
    kind: str
    geometry: Any
    label: str | None = None
    line_width: float = 0.0
    source: str = "instructions"
    parts: tuple = ()

    @property
    def axis(self) -> Segment | None:
        """Direction segment for line-like primitives."""
        if self.kind in (LINE, NEGATIVE):
            return self.geometry
        if self.kind == SOLID_WEDGE:
            short, long = self.parts
            return Segment(short.midpoint, long.midpoint)
        return None

    @property
    def box(self) -> Box:
        g = self.geometry
        if isinstance(g, Box):
            return g
        if isinstance(g, Segment):
            return Box.around([g.a, g.b])
        if isinstance(g, Polyline):
            return Box.around(g.vertices)
        return Box.around(g.ring)

    @property
    def center(self) -> Point:
        return self.box.center


@dataclass(frozen=True)
class RawGraphic:
    """A painted subpath or a placed glyph, in page coordinates."""

    kind: str  # "path" or "char"
    pieces: tuple = ()  # ("l", (p, q)) or ("c", (p0, p1, p2, p3))
    closed: bool = False
    filled: bool = False
    line_width: float = 0.0
    label: str | None = None
    box: Box | None = None


# -- instruction streams ---------------------------------------------------

_ARITY = {"cm": 6, "m": 2, "l": 2, "c": 6, "re": 4, "h": 0, "w": 1, "S": 0, "f": 0,
          "q": 0, "Q": 0, "EG": 0}
_TOKEN = re.compile(r"\((?:\\.|[^\\)])*\)|[^\s()%]+|%.*")
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _mat_mul(m, n):
    a1, b1, c1, d1, e1, f1 = m
    a2, b2, c2, d2, e2, f2 = n
    return (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
            c1 * a2 + d1 * c2, c1 * b2 + d1 * d2,
            e1 * a2 + f1 * c2 + e2, e1 * b2 + f1 * d2 + f2)


def _apply(m, x, y) -> Point:
    a, b, c, d, e, f = m
    return (a * x + c * y + e, b * x + d * y + f)


class _Interpreter:
    def __init__(self):
        self.ctm = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
        self.width = 1.0
        self.stack: list[tuple] = []
        self.out: list[RawGraphic] = []
        self.subpaths: list[tuple[list, bool, bool]] = []  # (pieces, closed, is_rect)
        self.current: list = []
        self.start: Point | None = None
        self.point: Point | None = None

    def scaled_width(self) -> float:
        a, b, c, d, _, _ = self.ctm
        return self.width * math.sqrt(abs(a * d - b * c))

    def end_subpath(self, closed=False, rect=False):
        if self.current:
            self.subpaths.append((self.current, closed, rect))
        self.current = []

    def paint(self, filled: bool):
        self.end_subpath()
        w = self.scaled_width()
        for pieces, closed, rect in self.subpaths:
            fill = filled or rect
            self.out.append(RawGraphic("path", tuple(pieces), closed or fill, fill, w))
        self.subpaths = []
        self.start = self.point = None

    def run(self, lineno: int, op: str, args: list):
        if op == "ch":
            if len(args) != 5 or not isinstance(args[4], str) or \
                    not all(isinstance(a, float) for a in args[:4]):
                raise InstructionError(lineno, op, "expected 4 numbers and a (glyph) string")
            x, y, w, h, glyph = args
            if not glyph:
                raise InstructionError(lineno, op, "empty glyph")
            corners = [_apply(self.ctm, px, py) for px, py in
                       ((x, y), (x + w, y), (x + w, y + h), (x, y + h))]
            self.out.append(RawGraphic("char", label=glyph, box=Box.around(corners)))
            return
        if op not in _ARITY:
            raise InstructionError(lineno, op, "unknown operator")
        if len(args) != _ARITY[op] or any(isinstance(a, str) for a in args):
            raise InstructionError(lineno, op, f"expected {_ARITY[op]} numeric operands, got {len(args)}")
        if op == "cm":
            m = tuple(args)
            if abs(m[0] * m[3] - m[1] * m[2]) <= 1e-12:
                raise InstructionError(lineno, op, "singular context matrix")
            self.ctm = _mat_mul(m, self.ctm)
        elif op == "m":
            self.end_subpath()
            self.start = self.point = _apply(self.ctm, *args)
        elif op == "l":
            if self.point is None:
                raise InstructionError(lineno, op, "no current point")
            p = _apply(self.ctm, *args)
            self.current.append(("l", (self.point, p)))
            self.point = p
        elif op == "c":
            if self.point is None:
                raise InstructionError(lineno, op, "no current point")
            p1, p2, p3 = (_apply(self.ctm, args[i], args[i + 1]) for i in (0, 2, 4))
            self.current.append(("c", (self.point, p1, p2, p3)))
            self.point = p3
        elif op == "re":
            self.end_subpath()
            x, y, w, h = args
            pts = [_apply(self.ctm, px, py) for px, py in
                   ((x, y), (x + w, y), (x + w, y + h), (x, y + h))]
            self.current = [("l", (pts[i], pts[(i + 1) % 4])) for i in range(4)]
            self.end_subpath(closed=True, rect=True)
            self.start = self.point = pts[0]
        elif op == "h":
            if self.current and self.point != self.start:
                self.current.append(("l", (self.point, self.start)))
            self.end_subpath(closed=True)
            self.point = self.start
        elif op == "w":
            if args[0] < 0:
                raise InstructionError(lineno, op, "negative line width")
            self.width = args[0]
        elif op == "S":
            self.paint(filled=False)
        elif op == "f":
            self.paint(filled=True)
        elif op == "q":
            self.stack.append((self.ctm, self.width))
        elif op == "Q":
            if not self.stack:
                raise InstructionError(lineno, op, "restore without save")
            self.ctm, self.width = self.stack.pop()
        elif op == "EG":
            self.paint(filled=False)


def parse_instruction_stream(text: str) -> list[RawGraphic]:
    """Interpret an instruction stream into raw graphics in page coordinates."""
    interp = _Interpreter()
    operands: list = []
    last_line = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        for tok in _TOKEN.findall(line):
            if tok.startswith("%"):
                break
            last_line = lineno
            if tok.startswith("("):
                operands.append(re.sub(r"\\(.)", r"\1", tok[1:-1]))
            elif _NUMBER.match(tok):
                v = float(tok)
                if not math.isfinite(v):
                    raise InstructionError(lineno, tok, "non-finite number")
                operands.append(v)
            else:
                interp.run(lineno, tok, operands)
                operands = []
    if operands:
        raise InstructionError(last_line, "<end>", f"{len(operands)} operands without an operator")
    interp.paint(filled=False)
    return interp.out


# -- SymbolScraper JSON ----------------------------------------------------

def _points(obj: dict, oid) -> list[Point]:
    try:
        pts = [check_point((p["x"], p["y"])) for p in obj["points"]]
    except KeyError as e:
        raise IngestError(f"object {oid}: missing field {e.args[0]!r}") from None
    except (TypeError, GeometryError) as e:
        raise IngestError(f"object {oid}: bad points: {e}") from None
    return pts


def _warn(msg: str):
    warnings.warn(msg, IngestWarning, stacklevel=3)


def parse_symbolscraper_json(doc: Union[str, list]) -> list[Primitive]:
    """One Primitive per JSON object, ids in document order."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise IngestError(f"invalid JSON: {e}") from None
    if isinstance(doc, dict) and "objects" in doc:
        doc = doc["objects"]
    if not isinstance(doc, list):
        raise IngestError("expected a JSON array of objects")
    prims = []
    for idx, obj in enumerate(doc):
        if not isinstance(obj, dict):
            raise IngestError(f"object {idx}: not a JSON object")
        oid = obj.get("graphicObjectID", idx)
        kind = obj.get("typeFromPDF")
        if kind is None:
            raise IngestError(f"object {oid}: missing field 'typeFromPDF'")
        width = float(obj.get("lineWidth", 0.0))
        if kind == "line":
            pts = _points(obj, oid)
            if len(pts) != 2:
                raise IngestError(f"object {oid}: line needs 2 points, got {len(pts)}")
            seg = Segment(pts[0], pts[1])
            if seg.length <= EPS:
                raise IngestError(f"object {oid}: degenerate line")
            _check_recorded(obj, seg, width, oid)
            prims.append(Primitive(len(prims), LINE, seg, None, width, "json"))
        elif kind == "polyline":
            pts = _dedupe(_points(obj, oid))
            if len(pts) < 2:
                raise IngestError(f"object {oid}: degenerate polyline")
            prims.append(Primitive(len(prims), POLYLINE, Polyline(tuple(pts)), None, width, "json"))
        elif kind == "polygon":
            try:
                poly = Polygon.from_points(_dedupe(_points(obj, oid)), bool(obj.get("filled", True)))
            except (GeometryError, IndexError) as e:
                raise IngestError(f"object {oid}: {e}") from None
            prims.append(Primitive(len(prims), POLYGON, poly, None, width, "json"))
        elif kind == "char":
            label = obj.get("label")
            if not label:
                raise IngestError(f"object {oid}: missing field 'label'")
            if "bbox" in obj:
                try:
                    x0, y0, x1, y1 = (float(v) for v in obj["bbox"])
                except (TypeError, ValueError):
                    raise IngestError(f"object {oid}: bbox must be [xmin, ymin, xmax, ymax]") from None
                box = Box(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))
            else:
                box = Box.around(_points(obj, oid))
            prims.append(Primitive(len(prims), CHAR, box, str(label), width, "json"))
        else:
            raise IngestError(f"object {oid}: unknown typeFromPDF {kind!r}")
    return prims


def _check_recorded(obj: dict, seg: Segment, width: float, oid):
    # SymbolScraper reports stroke length without the end caps, so either
    # the full or the cap-trimmed length counts as agreement
    if "length" in obj:
        rec = float(obj["length"])
        ok = any(abs(rec - ref) <= 0.005 * max(ref, EPS)
                 for ref in (seg.length, seg.length - width) if ref > 0)
        if not ok:
            _warn(f"object {oid}: recorded length {rec} disagrees with points "
                  f"({seg.length}); using recomputed value")
    if "angle" in obj:
        rec = float(obj["angle"]) % 360.0
        diff = abs(rec - seg.angle)
        diff = min(diff, 360.0 - diff)
        if diff > 0.005 * max(seg.angle, 1.0):
            _warn(f"object {oid}: recorded angle {rec} disagrees with points "
                  f"({seg.angle}); using recomputed value")


def _dedupe(pts: Sequence[Point]) -> list[Point]:
    out: list[Point] = []
    for p in pts:
        if not out or dist(out[-1], p) > EPS:
            out.append(p)
    return out


def primitives_to_json(prims: Iterable[Primitive]) -> list[dict]:
    """Serialize base primitives back to SymbolScraper JSON objects."""
    out = []
    for p in prims:
        g = p.geometry
        if p.kind == LINE:
            out.append({"typeFromPDF": "line", "graphicObjectID": p.id, "length": g.length,
                        "angle": g.angle, "lineWidth": p.line_width,
                        "points": [{"x": g.a[0], "y": g.a[1]}, {"x": g.b[0], "y": g.b[1]}]})
        elif p.kind == POLYLINE:
            out.append({"typeFromPDF": "polyline", "graphicObjectID": p.id,
                        "lineWidth": p.line_width,
                        "points": [{"x": x, "y": y} for x, y in g.vertices]})
        elif p.kind == POLYGON:
            out.append({"typeFromPDF": "polygon", "graphicObjectID": p.id,
                        "lineWidth": p.line_width, "filled": g.filled,
                        "points": [{"x": x, "y": y} for x, y in g.vertices]})
        elif p.kind == CHAR:
            out.append({"typeFromPDF": "char", "graphicObjectID": p.id, "label": p.label,
                        "lineWidth": p.line_width,
                        "bbox": [g.xmin, g.ymin, g.xmax, g.ymax]})
        else:
            raise IngestError(f"primitive {p.id}: kind {p.kind} has no JSON form")
    return out


# -- normalization ---------------------------------------------------------

def _raw_to_base(raw: RawGraphic, params: ParserParams) -> list[tuple]:
    """(kind, geometry, label, width, parts) tuples for one raw graphic."""
    if raw.kind == "char":
        return [(CHAR, raw.box, raw.label, raw.line_width, ())]
    w = raw.line_width
    if any(op == "c" for op, _ in raw.pieces):
        pts: list[Point] = []
        for op, ctrl in raw.pieces:
            seg_pts = flatten_bezier(ctrl, params.bezier_flatness_pts).vertices if op == "c" else ctrl
            pts.extend(seg_pts if not pts else seg_pts[1:])
        pts = _dedupe(pts)
        if raw.closed and raw.filled and len(pts) >= 3:
            try:
                return [(POLYGON, Polygon.from_points(pts, True), None, w, ())]
            except GeometryError:
                pass
        if len(pts) < 2:
            return []
        return [(POLYLINE, Polyline(tuple(pts)), None, w, ())]
    segs = [Segment(*ctrl) for _, ctrl in raw.pieces]
    segs = [s for s in segs if s.length > EPS]
    if raw.closed:
        pts = _dedupe([s.a for s in segs])
        if len(pts) >= 2 and dist(pts[0], pts[-1]) <= EPS:
            pts.pop()
        if len(pts) >= 3:
            try:
                return [(POLYGON, Polygon.from_points(pts, raw.filled), None, w, ())]
            except GeometryError:
                pass
    return [(LINE, s, None, w, ()) for s in segs]


def _as_line(poly: Polygon, params: ParserParams) -> Segment | None:
    sides = poly.segments()
    if len(sides) < 4:
        return None
    order = sorted(range(len(sides)), key=lambda i: -sides[i].length)
    s1, s2 = sides[order[0]], sides[order[1]]
    if (s1.length + s2.length) <= params.rect2line_long_ratio * poly.perimeter:
        return None
    if angle_between(s1, s2) > params.rect2line_angle_tolerance:
        return None
    # orient s2 along s1 before pairing endpoints
    ux, uy = s1.b[0] - s1.a[0], s1.b[1] - s1.a[1]
    if (s2.b[0] - s2.a[0]) * ux + (s2.b[1] - s2.a[1]) * uy < 0:
        s2 = s2.reversed()
    axis = Segment(midpoint(s1.a, s2.a), midpoint(s1.b, s2.b))
    return axis if axis.length > EPS else None


def _as_wedge(poly: Polygon, params: ParserParams) -> tuple[Segment, Segment] | None:
    """(short side, long side) of a wedge polygon; the short side is
    degenerate at the apex of a triangle."""
    verts = poly.vertices
    sides = poly.segments()
    if len(verts) == 3:
        k = min(range(3), key=lambda i: (sides[i].length, i))
        apex = verts[(k + 2) % 3]
        return (Segment(apex, apex), sides[k])
    if len(verts) != 4:
        return None
    best = None
    for i, j in ((0, 2), (1, 3)):
        a, b = sides[i], sides[j]
        if angle_between(a, b) > params.angle_tolerance_degrees:
            continue
        short, long = (a, b) if a.length <= b.length else (b, a)
        ratio = short.length / long.length
        if best is None or ratio < best[0]:
            best = (ratio, short, long)
    if best is None or best[0] >= params.s_wedge_lengths_diff_ratio:
        return None
    return (best[1], best[2])


def _plus_pairs(prims: list[tuple], params: ParserParams) -> dict[int, int]:
    lines = [i for i, p in enumerate(prims) if p[0] == LINE]
    used: set[int] = set()
    pairs = {}
    for x, i in enumerate(lines):
        if i in used:
            continue
        for j in lines[x + 1:]:
            if j in used:
                continue
            s1, s2 = prims[i][1], prims[j][1]
            if angle_between(s1, s2) < 90.0 - params.angle_tolerance_degrees:
                continue
            p = line_intersection(s1, s2)
            if p is None:
                continue
            t1, t2 = segment_param(s1, p), segment_param(s2, p)
            if 0.25 - EPS <= t1 <= 0.75 + EPS and 0.25 - EPS <= t2 <= 0.75 + EPS:
                pairs[i] = j
                used.update((i, j))
                break
    return pairs


def normalize_primitives(raw: Iterable[Union[RawGraphic, Primitive]],
                         params: ParserParams = DEFAULT_PARAMS) -> list[Primitive]:
    """Type raw graphics: rectangles to lines, trapezoids to solid wedges,
    crossed perpendicular strokes to plus charges, curves to polylines.

    Accepts already-typed primitives, so the function is idempotent.
    """
    base: list[tuple] = []
    sources: list[str] = []
    for item in raw:
        if isinstance(item, Primitive):
            base.append((item.kind, item.geometry, item.label, item.line_width, item.parts))
            sources.append(item.source)
        else:
            for b in _raw_to_base(item, params):
                base.append(b)
                sources.append("instructions")

    typed: list[tuple] = []
    for kind, g, label, w, parts in base:
        if kind == POLYGON and g.filled:
            axis = _as_line(g, params)
            if axis is not None:
                width = 2.0 * polygon_half_width(g, axis)
                typed.append((LINE, axis, None, max(w, width), ()))
                continue
            sides = _as_wedge(g, params)
            if sides is not None:
                typed.append((SOLID_WEDGE, g, None, w, sides))
                continue
        typed.append((kind, g, label, w, parts))

    pairs = _plus_pairs(typed, params)
    partner = set(pairs.values())
    out: list[Primitive] = []
    for i, (kind, g, label, w, parts) in enumerate(typed):
        if i in partner:
            continue
        src = sources[i]
        if i in pairs:
            s1, s2 = g, typed[pairs[i]][1]
            box = Box.around([s1.a, s1.b, s2.a, s2.b])
            out.append(Primitive(len(out), PLUS, box, "+", w, src, (s1, s2)))
        else:
            out.append(Primitive(len(out), kind, g, label, w, src, parts))
    return out


def polygon_half_width(poly: Polygon, axis: Segment) -> float:
    ux, uy = axis.b[0] - axis.a[0], axis.b[1] - axis.a[1]
    n = math.hypot(ux, uy)
    return max(abs((p[0] - axis.a[0]) * uy - (p[1] - axis.a[1]) * ux) / n for p in poly.vertices)


def load_primitives(text: str, fmt: str, params: ParserParams = DEFAULT_PARAMS) -> list[Primitive]:
    """Read and normalize a document in ``json`` or ``instr`` format."""
    if fmt == "json":
        return normalize_primitives(parse_symbolscraper_json(text), params)
    if fmt == "instr":
        return normalize_primitives(parse_instruction_stream(text), params)
    raise IngestError(f"unknown input format {fmt!r}")
