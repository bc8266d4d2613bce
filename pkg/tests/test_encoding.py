import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frechetbox.encoding import (
    BlockSpec,
    BoxIO,
    InconsistentStateError,
    ReachCode,
    block_points,
    compute_signature,
    decode_start,
    encode_start,
    null_code,
    pack_box_io,
    packed_size,
    process_box,
    sentinel_for,
    signature_ranks,
    unpack_box_io,
)
from frechetbox.freespace import FreeSpace, naive_decide
from frechetbox.geometry import Curve, EdgeInterval, Segment
from oracles import brute_signature, check_random_cells, integer_curve, random_curve


def test_collinear_example_signature():
    tau = Curve([[1, 0], [3.5, 0], [6, 0], [6.5, 0], [5, 5]])
    sig = compute_signature(tau, BlockSpec(0, 4), Segment([0, 0], [10, 0]), 1.0)
    assert sig.ranks == (1, 2, 3, 4, 5, 7, 6, 8, 11, 11)
    assert sig.sentinel == 11


def test_all_miss_signature():
    tau = Curve([[0, 5], [1, 5], [2, 5]])
    sig = compute_signature(tau, BlockSpec(0, 2), Segment([0, 0], [2, 0]), 1.0)
    assert sig.ranks == (7,) * 6


@pytest.mark.parametrize("integer", [False, True])
def test_signature_matches_sorting(integer):
    rng = np.random.default_rng(3 + integer)
    for _ in range(300):
        w = int(rng.integers(1, 7))
        tau = integer_curve(rng, w + 1) if integer else random_curve(rng, w + 1, scale=0.5)
        p, q = (integer_curve(rng, 2) if integer else rng.uniform(-2, 2, size=(2, 2)))
        delta = float(rng.choice([1.0, 1.5, 2.0])) if integer else float(rng.uniform(0.2, 2))
        curve, block, edge = Curve(tau), BlockSpec(0, w), Segment(p, q)
        ref = brute_signature(block_points(curve, block, edge, delta))
        assert compute_signature(curve, block, edge, delta).ranks == ref


def test_signature_batch_shape():
    lo = np.array([[0.1, np.nan], [0.2, 0.5]])
    hi = np.array([[0.4, np.nan], [0.3, 0.9]])
    r = signature_ranks(lo, hi)
    assert r.shape == (2, 4) and r.dtype == np.int16
    assert r[1].tolist() == [5, 5, 1, 2]


def test_block_spec_validation():
    with pytest.raises(ValueError):
        BlockSpec(0, 0)
    with pytest.raises(ValueError):
        BlockSpec(-1, 2)
    assert sentinel_for(3) == 9 == BlockSpec(4, 3).sentinel


POINTS = [EdgeInterval(0.1, 0.5), EdgeInterval(0.3, 0.9), EdgeInterval(None, None), EdgeInterval(0.3, 0.4)]


def test_encode_null_and_equality():
    assert encode_start(None, POINTS) == null_code(3) == ReachCode(9, 0, 0)
    # sorted: 0.1s 0.3s 0.3s 0.4e 0.5e 0.9e
    assert encode_start(0.3, POINTS) == ReachCode(3, 1, 0)
    assert encode_start(0.45, POINTS) == ReachCode(4, 0, 0)
    assert encode_start(0.5, POINTS) == ReachCode(4, 0, 0)


def test_decode():
    assert decode_start(ReachCode(9, 0, 0), POINTS, None) is None
    assert decode_start(ReachCode(0, 0, 2), POINTS, None) == 0.3
    assert decode_start(ReachCode(2, 0, 0), POINTS, 0.25) == 0.25
    with pytest.raises(InconsistentStateError):
        decode_start(ReachCode(2, 0, 0), POINTS, None)


def test_encode_decode_round_trip():
    rng = np.random.default_rng(8)
    for _ in range(500):
        ell = float(rng.uniform(0.1, 1.0))
        code = encode_start(ell, POINTS)
        assert code.gamma == 0
        assert decode_start(code, POINTS, ell) == ell


@pytest.mark.parametrize("dim", [2, 3])
def test_cell_commutes_with_intervals(dim):
    bad, checked = check_random_cells(np.random.default_rng(30 + dim), 8000, dim)
    assert bad == 0 and checked == 8000


def test_all_null_box_stays_null():
    sig = (5,) * 4
    rsig = (7,) * 6
    box = BoxIO(tuple(null_code(1) for _ in range(2)), (null_code(2),))
    out = process_box(box, [sig, sig], [rsig])
    assert out == box


def test_single_cell_box():
    # both inputs live, both next balls present: outputs are the full balls
    col_sig = (1, 3, 2, 4)
    row_sig = (1, 2, 3, 4)
    out = process_box(BoxIO((ReachCode(1, 1, 0),), (ReachCode(1, 1, 0),)), [col_sig], [row_sig])
    assert out.col_codes == (ReachCode(0, 0, 2),)
    assert out.row_codes == (ReachCode(0, 0, 2),)


def test_signature_count_checked():
    with pytest.raises(ValueError):
        process_box(BoxIO((null_code(1),), (null_code(1),)), [], [(5, 5, 5, 5)])


def _box_check(tau, sigma, delta, a, aw, b, tw):
    """Run one box of the free space on codes and compare with the naive tables."""
    fs = FreeSpace(tau, sigma, delta)
    ref = naive_decide(tau, sigma, delta, debug=True)
    tc, sc = Curve(tau), Curve(sigma)
    rblock, cblock = BlockSpec(a, aw), BlockSpec(b, tw)
    col_pts = [block_points(tc, rblock, Segment(sc.vertices[j], sc.vertices[j + 1]), delta) for j in range(b, b + tw)]
    row_pts = [block_points(sc, cblock, Segment(tc.vertices[i], tc.vertices[i + 1]), delta) for i in range(a, a + aw)]
    col_sigs = [brute_signature(p) for p in col_pts]
    row_sigs = [brute_signature(p) for p in row_pts]
    cin = tuple(encode_start(ref.rows[a][j].lo, col_pts[j - b]) for j in range(b, b + tw))
    rin = tuple(encode_start(ref.cols[b][i].lo, row_pts[i - a]) for i in range(a, a + aw))
    out = process_box(BoxIO(cin, rin), col_sigs, row_sigs)
    for p, code in enumerate(out.col_codes):
        got = decode_start(code, col_pts[p], ref.rows[a][b + p].lo)
        assert got == ref.rows[a + aw][b + p].lo
    for o, code in enumerate(out.row_codes):
        got = decode_start(code, row_pts[o], ref.cols[b][a + o].lo)
        assert got == ref.cols[b + tw][a + o].lo
    assert fs.n == len(tau)


def test_box_matches_naive_subtable():
    rng = np.random.default_rng(21)
    for _ in range(40):
        base = random_curve(rng, 9)
        tau = base + rng.normal(scale=0.2, size=base.shape)
        sigma = base + rng.normal(scale=0.2, size=base.shape)
        delta = float(rng.uniform(0.3, 1.5))
        a, b = (int(x) for x in rng.integers(0, 3, size=2))
        _box_check(tau, sigma, delta, a, 4, b, 2)


def test_identical_signatures_give_identical_outputs():
    # a translated copy of the same geometry yields the same signatures and codes
    rng = np.random.default_rng(5)
    base = random_curve(rng, 6)
    tau = base + rng.normal(scale=0.2, size=base.shape)
    sigma = base + rng.normal(scale=0.2, size=base.shape)
    shift = np.array([17.0, -3.0])
    outs = []
    for t, s in ((tau, sigma), (tau + shift, sigma + shift)):
        tc, sc = Curve(t), Curve(s)
        col_sigs = [compute_signature(tc, BlockSpec(0, 3), Segment(s[j], s[j + 1]), 0.8).ranks for j in range(2)]
        row_sigs = [compute_signature(sc, BlockSpec(0, 2), Segment(t[i], t[i + 1]), 0.8).ranks for i in range(3)]
        box = BoxIO((ReachCode(1, 1, 0), null_code(3)), (ReachCode(1, 1, 0), null_code(2), null_code(2)))
        outs.append((col_sigs, row_sigs, process_box(box, col_sigs, row_sigs)))
    assert outs[0] == outs[1]


def _code(width):
    s = sentinel_for(width)
    return st.one_of(
        st.just(ReachCode(s, 0, 0)),
        st.builds(ReachCode, st.integers(1, s - 1), st.integers(0, 1), st.just(0)),
        st.builds(ReachCode, st.just(0), st.just(0), st.integers(1, width + 1)),
    )


@st.composite
def box_ios(draw):
    aw, tw = draw(st.integers(1, 40)), draw(st.integers(1, 40))
    cols = draw(st.lists(_code(aw), min_size=tw, max_size=tw))
    rows = draw(st.lists(_code(tw), min_size=aw, max_size=aw))
    return BoxIO(tuple(cols), tuple(rows))


@settings(max_examples=300, deadline=None)
@given(box_ios())
def test_pack_round_trip(box):
    bits = pack_box_io(box)
    assert len(bits) == packed_size(*box.widths)
    assert unpack_box_io(bits, box.widths) == box


def test_pack_injective():
    rng = np.random.default_rng(1)
    seen = {}
    for _ in range(3000):
        cols = tuple(ReachCode(int(rng.integers(0, 8)), int(rng.integers(0, 2)), int(rng.integers(0, 4))) for _ in range(2))
        rows = tuple(ReachCode(int(rng.integers(0, 8)), int(rng.integers(0, 2)), int(rng.integers(0, 4))) for _ in range(3))
        box = BoxIO(cols, rows)
        bits = pack_box_io(box)
        assert seen.setdefault(bits, box) == box


def test_unpack_length_mismatch():
    bits = pack_box_io(BoxIO((null_code(1),), (null_code(1),)))
    with pytest.raises(ValueError):
        unpack_box_io(bits + b"\x00", (1, 1))
