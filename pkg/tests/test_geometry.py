import math

import pytest
from hypothesis import given, strategies as st

from vecmol.geometry import (Box, GeometryError, Polygon, Polyline, Segment, angle_between, bezier_point,
                             check_point, closest_distance, convex_intersection_area, disc_polygon,
                             endpoint_distance, flatten_bezier, is_parallel, line_intersection,
                             mean_endpoint_distance, perpendicular_offset, point_segment_distance,
                             polygon_area, projection_overlap, rotate, segments_intersect)

coord = st.floats(-500, 500, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)


def test_segment_length_and_angle():
    s = Segment((0.0, 0.0), (3.0, 4.0))
    assert s.length == 5.0
    assert Segment((0, 0), (1, 0)).angle == 0.0
    assert Segment((0, 0), (0, -1)).angle == pytest.approx(270.0)
    assert Segment((0, 0), (1, -1)).angle == pytest.approx(315.0)


def test_check_point_rejects_non_finite():
    with pytest.raises(GeometryError):
        check_point((math.nan, 0.0))
    with pytest.raises(GeometryError):
        check_point((0.0, math.inf))


def test_polyline_needs_two_vertices():
    with pytest.raises(GeometryError):
        Polyline(((0.0, 0.0),))


def test_intersections():
    assert segments_intersect((0, 0), (2, 2), (0, 2), (2, 0))
    assert not segments_intersect((0, 0), (1, 0), (0, 1), (1, 1))
    assert segments_intersect((0, 0), (1, 0), (1, 0), (2, 5))  # touching
    p = line_intersection(Segment((0, 0), (2, 2)), Segment((0, 2), (2, 0)))
    assert p == pytest.approx((1.0, 1.0))
    assert line_intersection(Segment((0, 0), (1, 0)), Segment((0, 1), (1, 1))) is None


def test_closest_distance_cases():
    assert closest_distance(Segment((0, 0), (10, 0)), Segment((0, 3), (10, 3))) == pytest.approx(3.0)
    assert closest_distance(Box(0, 0, 2, 2), Box(5, 0, 6, 1)) == pytest.approx(3.0)
    assert closest_distance(Box(0, 0, 10, 10), (5.0, 5.0)) == 0.0  # filled area
    square = Polygon.from_points([(0, 0), (4, 0), (4, 4), (0, 4)], filled=False)
    assert closest_distance(square, (2.0, 2.0)) == pytest.approx(2.0)


def test_endpoint_measures():
    a, b = Segment((0, 0), (10, 0)), Segment((10, 2), (0, 2))
    assert endpoint_distance(a, b) == pytest.approx(2.0)
    assert mean_endpoint_distance(a, b) == pytest.approx(2.0)
    assert perpendicular_offset(a, b) == pytest.approx(2.0)
    assert projection_overlap(a, Segment((5, 1), (20, 1))) == pytest.approx(5.0)


def test_parallel_tolerance():
    a = Segment((0, 0), (10, 0))
    b = Segment((0, 1), (10, 1.3))
    assert angle_between(a, b) == pytest.approx(math.degrees(math.atan(0.03)))
    assert is_parallel(a, b, 3.0)
    assert not is_parallel(a, Segment((0, 0), (10, 10)), 3.0)
    assert angle_between(a, Segment((10, 0), (0, 0))) == pytest.approx(0.0)


def test_flatten_bezier_straight_and_curved():
    line = flatten_bezier(((0, 0), (1, 0), (2, 0), (3, 0)))
    assert line.vertices[0] == (0, 0) and line.vertices[-1] == (3, 0)
    arc = flatten_bezier(((0, 0), (0, 50), (50, 50), (50, 0)), 0.25)
    assert len(arc.vertices) > 4
    # every chord stays within the flatness of the true curve
    for k in range(len(arc.vertices) - 1):
        mid = ((arc.vertices[k][0] + arc.vertices[k + 1][0]) / 2, (arc.vertices[k][1] + arc.vertices[k + 1][1]) / 2)
        best = min(math.dist(mid, bezier_point(((0, 0), (0, 50), (50, 50), (50, 0)), t / 400)) for t in range(401))
        assert best <= 0.3


def test_areas():
    sq = [(0, 0), (2, 0), (2, 2), (0, 2)]
    assert polygon_area(sq) == pytest.approx(4.0)
    assert convex_intersection_area(sq, [(1, 1), (3, 1), (3, 3), (1, 3)]) == pytest.approx(1.0)
    assert convex_intersection_area(sq, [(5, 5), (6, 5), (6, 6)]) == 0.0
    assert polygon_area(disc_polygon((0, 0), 1.0, 64)) == pytest.approx(math.pi, rel=0.01)


@given(point, point, point, point)
def test_segment_distance_symmetric_and_zero_when_crossing(a, b, c, d):
    s1, s2 = Segment(a, b), Segment(c, d)
    d12 = closest_distance(s1, s2)
    assert d12 == pytest.approx(closest_distance(s2, s1), abs=1e-9)
    assert d12 >= 0
    if segments_intersect(a, b, c, d):
        assert d12 == pytest.approx(0.0, abs=1e-6)


@given(point, point, point)
def test_point_segment_distance_bounded_by_endpoints(p, a, b):
    d = point_segment_distance(p, a, b)
    assert d <= min(math.dist(p, a), math.dist(p, b)) + 1e-9


@given(point, st.floats(0, 360))
def test_rotation_preserves_distance(p, deg):
    q = rotate(p, deg)
    assert math.hypot(*q) == pytest.approx(math.hypot(*p), abs=1e-6)


@given(st.lists(point, min_size=2, max_size=6))
def test_box_around_contains_points(pts):
    b = Box.around(pts)
    assert all(b.contains(p) for p in pts)
