"""Small exact 2D kernel used by every parsing stage.

Coordinates are PDF points (1/72 inch). Points are plain ``(x, y)`` tuples;
the shape classes below are immutable and hashable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

EPS = 1e-9

Point = tuple[float, float]


class GeometryError(ValueError):
    pass


def check_point(p: Sequence[float]) -> Point:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite coordinate {p!r}")
    return (x, y)


def dist(p: Point, q: Point) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def midpoint(p: Point, q: Point) -> Point:
    return ((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0)


def centroid(points: Iterable[Point]) -> Point:
    pts = list(points)
    return (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    @property
    def length(self) -> float:
        return dist(self.a, self.b)

    @property
    def angle(self) -> float:
        """Direction a->b in degrees, counter-clockwise from +x, in [0, 360)."""
        ang = math.degrees(math.atan2(self.b[1] - self.a[1], self.b[0] - self.a[0]))
        ang %= 360.0
        return 0.0 if ang >= 360.0 else ang

    @property
    def midpoint(self) -> Point:
        return midpoint(self.a, self.b)

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


@dataclass(frozen=True)
class Polyline:
    vertices: tuple[Point, ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise GeometryError("polyline needs at least 2 vertices")

    def segments(self) -> list[Segment]:
        v = self.vertices
        return [Segment(v[i], v[i + 1]) for i in range(len(v) - 1)]


@dataclass(frozen=True)
class Polygon:
    """Closed ring; ``ring[0] == ring[-1]``."""

    ring: tuple[Point, ...]
    filled: bool = True

    @classmethod
    def from_points(cls, points: Sequence[Point], filled: bool = True) -> "Polygon":
        pts = [check_point(p) for p in points]
        if pts[0] != pts[-1]:
            pts.append(pts[0])
        if len(pts) < 4:
            raise GeometryError("polygon needs at least 3 distinct vertices")
        poly = cls(tuple(pts), filled)
        if poly.perimeter <= EPS:
            raise GeometryError("degenerate polygon")
        return poly

    @property
    def vertices(self) -> tuple[Point, ...]:
        return self.ring[:-1]

    def segments(self) -> list[Segment]:
        r = self.ring
        return [Segment(r[i], r[i + 1]) for i in range(len(r) - 1)]

    @property
    def perimeter(self) -> float:
        return sum(s.length for s in self.segments())


@dataclass(frozen=True)
class Box:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @classmethod
    def around(cls, points: Iterable[Point]) -> "Box":
        pts = list(points)
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return cls(min(xs), min(ys), max(xs), max(ys))

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> Point:
        return ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)

    def corners(self) -> list[Point]:
        return [(self.xmin, self.ymin), (self.xmax, self.ymin),
                (self.xmax, self.ymax), (self.xmin, self.ymax)]

    def union(self, other: "Box") -> "Box":
        return Box(min(self.xmin, other.xmin), min(self.ymin, other.ymin),
                   max(self.xmax, other.xmax), max(self.ymax, other.ymax))

    def contains(self, p: Point) -> bool:
        return (self.xmin - EPS <= p[0] <= self.xmax + EPS
                and self.ymin - EPS <= p[1] <= self.ymax + EPS)

    def segments(self) -> list[Segment]:
        c = self.corners()
        return [Segment(c[i], c[(i + 1) % 4]) for i in range(4)]


Geometry = Union[tuple, Segment, Polyline, Polygon, Box]


# -- primitive predicates ---------------------------------------------------

def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    den = dx * dx + dy * dy
    if den <= 0.0:
        return dist(p, a)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den
    t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    return (min(a[0], b[0]) - EPS <= p[0] <= max(a[0], b[0]) + EPS
            and min(a[1], b[1]) - EPS <= p[1] <= max(a[1], b[1]) + EPS)


def segments_intersect(a1: Point, b1: Point, a2: Point, b2: Point) -> bool:
    d1 = _cross(a2, b2, a1)
    d2 = _cross(a2, b2, b1)
    d3 = _cross(a1, b1, a2)
    d4 = _cross(a1, b1, b2)
    if ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS)) and \
       ((d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS)):
        return True
    if abs(d1) <= EPS and _on_segment(a1, a2, b2):
        return True
    if abs(d2) <= EPS and _on_segment(b1, a2, b2):
        return True
    if abs(d3) <= EPS and _on_segment(a2, a1, b1):
        return True
    if abs(d4) <= EPS and _on_segment(b2, a1, b1):
        return True
    return False


def segment_distance(a1: Point, b1: Point, a2: Point, b2: Point) -> float:
    if segments_intersect(a1, b1, a2, b2):
        return 0.0
    return min(point_segment_distance(a1, a2, b2), point_segment_distance(b1, a2, b2),
               point_segment_distance(a2, a1, b1), point_segment_distance(b2, a1, b1))


def line_intersection(s1: Segment, s2: Segment) -> Point | None:
    """Intersection point of two segments' carrier lines, None when parallel."""
    x1, y1 = s1.a
    x2, y2 = s1.b
    x3, y3 = s2.a
    x4, y4 = s2.b
    den = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4)
    if abs(den) <= EPS:
        return None
    t = ((x1 - x3) * (y3 - y4) - (y1 - y3) * (x3 - x4)) / den
    return (x1 + t * (x2 - x1), y1 + t * (y2 - y1))


def segment_param(s: Segment, p: Point) -> float:
    """Parameter of the projection of ``p`` onto ``s`` (0 at a, 1 at b)."""
    dx, dy = s.b[0] - s.a[0], s.b[1] - s.a[1]
    return ((p[0] - s.a[0]) * dx + (p[1] - s.a[1]) * dy) / (dx * dx + dy * dy)


def point_in_ring(p: Point, ring: Sequence[Point]) -> bool:
    inside = False
    n = len(ring) - 1
    for i in range(n):
        a, b = ring[i], ring[i + 1]
        if point_segment_distance(p, a, b) <= EPS:
            return True
        if (a[1] > p[1]) != (b[1] > p[1]):
            x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if p[0] < x:
                inside = not inside
    return inside


# -- distances between arbitrary geometries --------------------------------

def _parts(g: Geometry) -> tuple[list[tuple[Point, Point]], list[Point], tuple | None]:
    """(segments, vertices, filled region ring or None)."""
    if isinstance(g, Segment):
        return [(g.a, g.b)], [g.a, g.b], None
    if isinstance(g, Polyline):
        v = g.vertices
        return [(v[i], v[i + 1]) for i in range(len(v) - 1)], list(v), None
    if isinstance(g, Polygon):
        r = g.ring
        segs = [(r[i], r[i + 1]) for i in range(len(r) - 1)]
        return segs, list(r[:-1]), (r if g.filled else None)
    if isinstance(g, Box):
        c = g.corners()
        ring = tuple(c + [c[0]])
        return [(ring[i], ring[i + 1]) for i in range(4)], c, ring
    if isinstance(g, tuple) and len(g) == 2:
        p = (float(g[0]), float(g[1]))
        return [(p, p)], [p], None
    raise TypeError(f"unsupported geometry {type(g).__name__}")


def box_distance(a: Box, b: Box) -> float:
    dx = max(0.0, b.xmin - a.xmax, a.xmin - b.xmax)
    dy = max(0.0, b.ymin - a.ymax, a.ymin - b.ymax)
    return math.hypot(dx, dy)


def closest_distance(g1: Geometry, g2: Geometry) -> float:
    """Minimum distance between any point of ``g1`` and any point of ``g2``.

    Filled polygons and boxes count as areas, so a geometry lying inside
    one is at distance 0.
    """
    if isinstance(g1, Box) and isinstance(g2, Box):
        return box_distance(g1, g2)
    s1, v1, r1 = _parts(g1)
    s2, v2, r2 = _parts(g2)
    if r1 is not None and any(point_in_ring(p, r1) for p in v2):
        return 0.0
    if r2 is not None and any(point_in_ring(p, r2) for p in v1):
        return 0.0
    best = math.inf
    for a1, b1 in s1:
        for a2, b2 in s2:
            d = segment_distance(a1, b1, a2, b2)
            if d < best:
                best = d
                if best == 0.0:
                    return 0.0
    return best


def endpoint_distance(l1: Segment, l2: Segment) -> float:
    return min(dist(l1.a, l2.a), dist(l1.a, l2.b), dist(l1.b, l2.a), dist(l1.b, l2.b))


def mean_endpoint_distance(l1: Segment, l2: Segment) -> float:
    """Average distance between matched endpoints, under the better matching."""
    straight = dist(l1.a, l2.a) + dist(l1.b, l2.b)
    crossed = dist(l1.a, l2.b) + dist(l1.b, l2.a)
    return min(straight, crossed) / 2.0


def angle_between(l1: Segment, l2: Segment) -> float:
    """Acute angle in degrees between the undirected carrier lines."""
    d = abs(l1.angle - l2.angle) % 180.0
    return min(d, 180.0 - d)


def is_parallel(l1: Segment, l2: Segment, tolerance: float) -> bool:
    return angle_between(l1, l2) <= tolerance


def projection_overlap(l1: Segment, l2: Segment) -> float:
    """Length of the overlap of both segments projected on ``l1``'s direction."""
    ux, uy = l1.b[0] - l1.a[0], l1.b[1] - l1.a[1]
    n = math.hypot(ux, uy)
    ux, uy = ux / n, uy / n

    def proj(p):
        return (p[0] - l1.a[0]) * ux + (p[1] - l1.a[1]) * uy

    lo1, hi1 = 0.0, n
    t1, t2 = sorted((proj(l2.a), proj(l2.b)))
    return max(0.0, min(hi1, t2) - max(lo1, t1))


def perpendicular_offset(l1: Segment, l2: Segment) -> float:
    """Distance from the midpoint of ``l2`` to the carrier line of ``l1``."""
    ux, uy = l1.b[0] - l1.a[0], l1.b[1] - l1.a[1]
    n = math.hypot(ux, uy)
    m = l2.midpoint
    return abs((m[0] - l1.a[0]) * uy - (m[1] - l1.a[1]) * ux) / n


# -- curves ----------------------------------------------------------------

def bezier_point(ctrl: Sequence[Point], t: float) -> Point:
    p0, p1, p2, p3 = ctrl
    mt = 1.0 - t
    a, b, c, d = mt * mt * mt, 3 * mt * mt * t, 3 * mt * t * t, t * t * t
    return (a * p0[0] + b * p1[0] + c * p2[0] + d * p3[0],
            a * p0[1] + b * p1[1] + c * p2[1] + d * p3[1])


def flatten_bezier(ctrl: Sequence[Point], flatness: float = 0.25,
                   max_depth: int = 16) -> Polyline:
    """Approximate a cubic Bezier by a polyline whose vertices lie on the curve.

    Subdivides at t=0.5 until both inner control points are within
    ``flatness`` of the chord; by the convex-hull property the curve then
    deviates from that chord by at most ``flatness``.
    """
    if flatness <= 0:
        raise GeometryError("flatness must be positive")
    ctrl = [check_point(p) for p in ctrl]
    out: list[Point] = [ctrl[0]]

    def rec(p0, p1, p2, p3, depth):
        flat = max(point_segment_distance(p1, p0, p3), point_segment_distance(p2, p0, p3))
        if flat <= flatness or depth >= max_depth:
            if p3 != out[-1]:
                out.append(p3)
            return
        p01, p12, p23 = midpoint(p0, p1), midpoint(p1, p2), midpoint(p2, p3)
        p012, p123 = midpoint(p01, p12), midpoint(p12, p23)
        mid = midpoint(p012, p123)
        rec(p0, p01, p012, mid, depth + 1)
        rec(mid, p123, p23, p3, depth + 1)

    rec(*ctrl, 0)
    if len(out) < 2:
        out.append(ctrl[3])
    return Polyline(tuple(out))


# -- areas, used for spatial overlap ---------------------------------------

def polygon_area(points: Sequence[Point]) -> float:
    n = len(points)
    s = 0.0
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def _ccw(points: list[Point]) -> list[Point]:
    s = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        s += x1 * y2 - x2 * y1
    return points if s >= 0 else points[::-1]


def convex_intersection_area(p: Sequence[Point], q: Sequence[Point]) -> float:
    """Area of the intersection of two convex polygons (open vertex lists)."""
    subject = _ccw(list(p))
    clip = _ccw(list(q))
    for i in range(len(clip)):
        if not subject:
            return 0.0
        a, b = clip[i], clip[(i + 1) % len(clip)]
        inp = subject
        subject = []
        for j in range(len(inp)):
            cur, prev = inp[j], inp[j - 1]
            cur_in = _cross(a, b, cur) >= -EPS
            prev_in = _cross(a, b, prev) >= -EPS
            if cur_in:
                if not prev_in:
                    x = line_intersection(Segment(prev, cur), Segment(a, b))
                    if x is not None:
                        subject.append(x)
                subject.append(cur)
            elif prev_in:
                x = line_intersection(Segment(prev, cur), Segment(a, b))
                if x is not None:
                    subject.append(x)
    return polygon_area(subject) if len(subject) >= 3 else 0.0


def disc_polygon(center: Point, radius: float, sides: int = 16) -> list[Point]:
    return [(center[0] + radius * math.cos(2 * math.pi * k / sides),
             center[1] + radius * math.sin(2 * math.pi * k / sides)) for k in range(sides)]


def rotate(p: Point, degrees: float, about: Point = (0.0, 0.0)) -> Point:
    r = math.radians(degrees)
    c, s = math.cos(r), math.sin(r)
    x, y = p[0] - about[0], p[1] - about[1]
    return (about[0] + c * x - s * y, about[1] + s * x + c * y)
