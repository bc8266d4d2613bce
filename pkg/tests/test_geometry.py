import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frechetbox.geometry import (
    NULL_INTERVAL,
    Curve,
    DegenerateInputError,
    EdgeInterval,
    NoPredecessorError,
    Segment,
    ball_segment_intersection,
    endpoint_order,
    intersection_table,
    point_segment_distance,
    predecessor_rank,
)
from oracles import brute_predecessor, scan_distance, scan_interval


def test_symmetric_intersection():
    assert ball_segment_intersection([0, 0], Segment([-2, 0], [2, 0]), 1.0) == (0.25, 0.75)


def test_ball_misses_line():
    assert ball_segment_intersection([0, 5], Segment([0, 0], [1, 0]), 1.0) is NULL_INTERVAL


def test_intersection_matches_parameter_scan():
    got = ball_segment_intersection([0.3, 0.1], Segment([0, 0], [1, 0]), 0.7)
    lo, hi = scan_interval([0.3, 0.1], [0, 0], [1, 0], 0.7)
    assert got.lo == pytest.approx(lo, abs=2e-6)
    assert got.hi == pytest.approx(hi, abs=2e-6)


def test_intersection_random_scans():
    rng = np.random.default_rng(11)
    for _ in range(25):
        c, p, q = rng.uniform(-1, 1, size=(3, 3))
        delta = rng.uniform(0.1, 1.5)
        got = ball_segment_intersection(c, Segment(p, q), delta)
        ref = scan_interval(c, p, q, delta, steps=200_000)
        if ref is None:
            # a miss can only disagree with a sampled hit by less than one step
            assert got.is_null or got.hi - got.lo < 1e-5
        else:
            assert got.lo == pytest.approx(ref[0], abs=1e-5)
            assert got.hi == pytest.approx(ref[1], abs=1e-5)


def test_clamping_flags_endpoints():
    iv = ball_segment_intersection([0, 0], Segment([0.5, 0], [3, 0]), 1.0)
    assert iv.lo == 0.0
    assert iv.hi == pytest.approx(0.2)
    iv = ball_segment_intersection([3, 0], Segment([0, 0], [3, 0]), 1.0)
    assert iv.hi == 1.0


def test_tangent_ball_is_a_single_point():
    iv = ball_segment_intersection([0.5, 1.0], Segment([0, 0], [1, 0]), 1.0)
    assert iv.lo == iv.hi == 0.5


def test_negative_delta_rejected():
    with pytest.raises(ValueError):
        ball_segment_intersection([0, 0], Segment([0, 0], [1, 0]), -1.0)


def test_zero_length_segment_rejected():
    with pytest.raises(DegenerateInputError):
        Segment([1, 1], [1, 1])


def test_curve_rejects_repeated_vertex():
    with pytest.raises(DegenerateInputError, match="vertices 1 and 2"):
        Curve([[0, 0], [1, 0], [1, 0]])


def test_curve_single_vertex_and_readonly():
    c = Curve([[1.0, 2.0]])
    assert len(c) == 1 and c.n_edges == 0 and c.dim == 2
    with pytest.raises(ValueError):
        c.vertices[0, 0] = 5.0


def test_table_matches_scalar():
    rng = np.random.default_rng(3)
    centers = rng.normal(size=(5, 2))
    pts = rng.normal(size=(4, 2))
    lo, hi = intersection_table(centers, pts[:-1], pts[1:], 0.8)
    for k in range(5):
        for e in range(3):
            iv = ball_segment_intersection(centers[k], Segment(pts[e], pts[e + 1]), 0.8)
            if iv.is_null:
                assert math.isnan(lo[k, e])
            else:
                assert (lo[k, e], hi[k, e]) == (iv.lo, iv.hi)


def test_point_on_segment_distance_zero():
    assert point_segment_distance([0.5, 0], Segment([0, 0], [1, 0])) == 0.0


def test_perpendicular_distance():
    assert point_segment_distance([0, 1], Segment([-1, 0], [1, 0])) == 1.0


def test_distance_to_endpoint():
    d = point_segment_distance([3, 4], Segment([0, 0], [1, 0]))
    assert d == pytest.approx(math.sqrt(20))
    assert d == pytest.approx(scan_distance([3, 4], [0, 0], [1, 0]), abs=1e-9)


coords = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
points = st.tuples(coords, coords)


@settings(max_examples=150, deadline=None)
@given(points, points, points, st.floats(0, 4), st.floats(0, 4))
def test_intersection_monotone_in_delta(c, p, q, d1, d2):
    if p == q:
        return
    d1, d2 = sorted((d1, d2))
    small = ball_segment_intersection(c, Segment(p, q), d1)
    big = ball_segment_intersection(c, Segment(p, q), d2)
    if not small.is_null:
        assert not big.is_null
        assert big.lo <= small.lo and small.hi <= big.hi


def test_predecessor_equal_to_s():
    pts = [EdgeInterval(0.0, 0.4), EdgeInterval(0.2, 0.6), EdgeInterval(0.3, 0.9)]
    # sorted: s0=0, s1=0.2, s2=0.3, e0=0.4, ...
    assert predecessor_rank(0.2, pts) == (2, True)


def test_predecessor_sits_before_equal_e():
    pts = [EdgeInterval(0.0, 0.2), EdgeInterval(0.2, 0.6)]
    # order: s0=0, s1=0.2, e0=0.2, e1=0.6; y=0.2 goes after s1, before e0
    assert predecessor_rank(0.2, pts) == (2, True)


def test_no_predecessor():
    with pytest.raises(NoPredecessorError):
        predecessor_rank(0.1, [EdgeInterval(0.3, 0.5), NULL_INTERVAL])


def test_all_null_gives_sentinel():
    assert predecessor_rank(0.5, [NULL_INTERVAL] * 3) == (7, False)


def test_predecessor_random_against_sort():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        pts = []
        for _ in range(3):
            if rng.random() < 0.2:
                pts.append(NULL_INTERVAL)
            else:
                a, b = sorted(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0, rng.random(), rng.random()], 2))
                pts.append(EdgeInterval(float(a), float(b)))
        y = float(rng.choice([0.0, 0.25, 0.5, 1.0, rng.random()]))
        ref = brute_predecessor(y, pts)
        if ref is None:
            with pytest.raises(NoPredecessorError):
                predecessor_rank(y, pts)
        else:
            assert predecessor_rank(y, pts) == ref


def test_endpoint_order_tie_break():
    pts = [EdgeInterval(0.5, 0.5), EdgeInterval(0.5, 1.0)]
    assert endpoint_order(pts) == [(0.5, 0, 0), (0.5, 0, 1), (0.5, 1, 0), (1.0, 1, 1)]


def test_predecessor_invariant_under_exact_rigid_motions():
    rng = np.random.default_rng(8)
    # quarter turns, reflections and integer shifts are exact in floating point
    mats = [np.array(m, float) for m in ([[0, -1], [1, 0]], [[-1, 0], [0, -1]], [[1, 0], [0, -1]])]
    for _ in range(300):
        centers = rng.integers(-3, 4, size=(3, 2)).astype(float)
        p, q = rng.integers(-3, 4, size=(2, 2)).astype(float)
        if np.array_equal(p, q):
            continue
        delta = float(rng.choice([1.0, 1.5, 2.0, 2.5]))
        y = float(rng.choice([0.0, 0.5, 1.0, rng.random()]))

        def rank(cs, a, b):
            pts = [ball_segment_intersection(c, Segment(a, b), delta) for c in cs]
            try:
                return predecessor_rank(y, pts)
            except NoPredecessorError:
                return None

        base = rank(centers, p, q)
        for mat in mats:
            shift = rng.integers(-5, 6, size=2).astype(float)
            moved = rank(centers @ mat.T + shift, p @ mat.T + shift, q @ mat.T + shift)
            assert moved == base
