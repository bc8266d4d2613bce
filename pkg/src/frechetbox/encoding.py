"""Block signatures, reachability codes and whole-box code propagation.

A block is a run of ``W + 1`` consecutive vertices ``a .. a + W`` of one curve
(its ``W`` edges).  Against one edge of the other curve it has a *signature*:
the ranks of the ``2 (W + 1)`` ball/edge endpoints in the shared tie order.
Position ``2 t`` of a signature holds the rank of ``s`` for vertex ``a + t``
and position ``2 t + 1`` the rank of ``e``; ``2 (W + 1) + 1`` marks a miss.

A reachability interval is stored relative to a block as a :class:`ReachCode`
``(pi, beta, gamma)``:

* null interval: ``(sentinel, 0, 0)``;
* ``gamma >= 1``: the interval starts at ``s`` of vertex ``a + gamma - 1``
  (``pi`` and ``beta`` are zero);
* ``gamma == 0``: the interval starts at the block-entry start ``ell``,
  located by its predecessor rank ``pi`` (``beta`` flags equality).

Everything the box step needs is in the signatures, so box outputs can be
memoized on ``(signatures, input codes)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .geometry import Curve, EdgeInterval, Segment, intersect_batch, predecessor_rank

__all__ = [
    "BlockSpec",
    "Signature",
    "ReachCode",
    "BoxIO",
    "InconsistentStateError",
    "LAYOUT_VERSION",
    "sentinel_for",
    "null_code",
    "signature_ranks",
    "compute_signature",
    "block_points",
    "encode_start",
    "decode_start",
    "propagate_code_cell",
    "process_box",
    "pack_box_io",
    "unpack_box_io",
]

# bump whenever the packed bit layout changes; persisted memo tables check it
LAYOUT_VERSION = 1


class InconsistentStateError(ValueError):
    """A code refers to a carried start parameter that is missing."""


@dataclass(frozen=True)
class BlockSpec:
    """Vertices ``a .. a + width`` of a curve (edges ``a .. a + width - 1``)."""

    a: int
    width: int

    def __post_init__(self):
        if self.a < 0 or self.width < 1:
            raise ValueError(f"invalid block a={self.a} width={self.width}")

    @property
    def vertices(self) -> range:
        return range(self.a, self.a + self.width + 1)

    @property
    def edges(self) -> range:
        return range(self.a, self.a + self.width)

    @property
    def sentinel(self) -> int:
        return sentinel_for(self.width)


def sentinel_for(width: int) -> int:
    return 2 * (width + 1) + 1


class ReachCode(NamedTuple):
    pi: int
    beta: int
    gamma: int

    def is_null(self, width: int) -> bool:
        return self.pi == sentinel_for(width)


def null_code(width: int) -> ReachCode:
    return ReachCode(sentinel_for(width), 0, 0)


@dataclass(frozen=True)
class Signature:
    """Rank array of one block against one edge."""

    ranks: Tuple[int, ...]

    @property
    def width(self) -> int:
        return len(self.ranks) // 2 - 1

    @property
    def sentinel(self) -> int:
        return len(self.ranks) + 1

    def __len__(self) -> int:
        return len(self.ranks)

    def __getitem__(self, k):
        return self.ranks[k]


def signature_ranks(lo, hi) -> np.ndarray:
    """Signatures of many (block, edge) pairs at once.

    Parameters
    ----------
    lo, hi : ndarray, shape (W + 1, E)
        Ball/edge intersection endpoints of the block's vertices (rows) on
        ``E`` edges, NaN where empty.

    Returns
    -------
    ndarray of int16, shape (E, 2 (W + 1))
        Row ``e`` is the signature for edge ``e``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    k, n_edges = lo.shape
    size = 2 * k
    vals = np.empty((n_edges, size))
    vals[:, 0::2] = lo.T
    vals[:, 1::2] = hi.T
    null = np.isnan(vals)
    vals[null] = np.inf
    pos = np.arange(size)
    kind = np.broadcast_to(pos % 2, vals.shape)
    offset = np.broadcast_to(pos // 2, vals.shape)
    # lexsort keys go from least to most significant
    order = np.lexsort((offset, kind, vals), axis=-1)
    ranks = np.empty((n_edges, size), dtype=np.int16)
    np.put_along_axis(ranks, order, np.arange(1, size + 1, dtype=np.int16)[None, :], axis=-1)
    ranks[null] = size + 1
    return ranks


def block_points(curve: Curve, block: BlockSpec, edge: Segment, delta: float) -> list:
    """Intersections of the block's vertex balls with ``edge``, in vertex order."""
    centers = curve.vertices[block.a : block.a + block.width + 1]
    lo, hi = intersect_batch(centers, edge.start, edge.end, delta)
    return [EdgeInterval(None, None) if x != x else EdgeInterval(float(x), float(y)) for x, y in zip(lo, hi)]


def compute_signature(curve: Curve, block: BlockSpec, edge: Segment, delta: float) -> Signature:
    """Signature of ``block`` (vertices of ``curve``) against ``edge``.

    >>> c = Curve([[0, 0], [2, 0], [4, 0]])
    >>> compute_signature(c, BlockSpec(0, 2), Segment([0, 1], [4, 1]), 1.5).ranks
    (1, 3, 2, 5, 4, 6)
    """
    centers = curve.vertices[block.a : block.a + block.width + 1]
    lo, hi = intersect_batch(centers, edge.start, edge.end, delta)
    return Signature(tuple(int(r) for r in signature_ranks(lo[:, None], hi[:, None])[0]))


def encode_start(ell: Optional[float], points: Sequence[EdgeInterval]) -> ReachCode:
    """Code of a block-entry start parameter ``ell`` (``None`` for null).

    ``points`` are the block's ball/edge intersections in vertex order (see
    :func:`block_points`).
    """
    width = len(points) - 1
    if ell is None:
        return null_code(width)
    rank, equal = predecessor_rank(ell, points)
    return ReachCode(rank, int(equal), 0)


def decode_start(code: ReachCode, points: Sequence[EdgeInterval], carried_ell: Optional[float]) -> Optional[float]:
    """Start parameter encoded by ``code`` (``None`` for null)."""
    width = len(points) - 1
    if code.is_null(width):
        return None
    if code.gamma:
        return points[code.gamma - 1].lo
    if carried_ell is None:
        raise InconsistentStateError("gamma = 0 code without a carried start parameter")
    return carried_ell


def _next_code(code, other_live, sig, off, sentinel):
    """Code of the next interval on this edge, given the cell's two inputs.

    ``code`` runs along the edge being advanced; ``other_live`` says whether
    the cell's other input is non-null; ``off`` is the cell's offset in the
    block whose signature is ``sig``.
    """
    rs = sig[2 * off + 2]
    if other_live:
        # entered from the side: the whole next ball intersection is reachable
        return (sentinel, 0, 0) if rs == sentinel else (0, 0, off + 2)
    pi, _, gamma = code
    if pi == sentinel or rs == sentinel:
        return (sentinel, 0, 0)
    re = sig[2 * off + 3]
    if gamma:
        rl = sig[2 * gamma - 2]
        if rs < rl:
            return code if rl < re else (sentinel, 0, 0)
        return (0, 0, off + 2)
    if rs <= pi:
        return code if re > pi else (sentinel, 0, 0)
    return (0, 0, off + 2)


def propagate_code_cell(col_code, row_code, col_sig, row_sig, i_offset: int, j_offset: int):
    """Per-cell propagation on codes.

    Parameters
    ----------
    col_code : ReachCode
        ``R[i][j]`` relative to the row block (signature ``col_sig``).
    row_code : ReachCode
        ``R'[j][i]`` relative to the column block (signature ``row_sig``).
    i_offset, j_offset : int
        Offsets of the cell's row and column inside their blocks.

    Returns
    -------
    (ReachCode, ReachCode)
        Codes of ``R[i+1][j]`` and ``R'[j+1][i]``.
    """
    cs = len(col_sig) + 1
    rs = len(row_sig) + 1
    col_live = col_code[0] != cs
    row_live = row_code[0] != rs
    up = _next_code(col_code, row_live, col_sig, i_offset, cs)
    right = _next_code(row_code, col_live, row_sig, j_offset, rs)
    return ReachCode(*up), ReachCode(*right)


@dataclass(frozen=True)
class BoxIO:
    """Codes on the lower (``col_codes``) and left (``row_codes``) sides of a box.

    As an output the same fields describe the upper and right sides.
    """

    col_codes: Tuple[ReachCode, ...]
    row_codes: Tuple[ReachCode, ...]

    @property
    def widths(self) -> Tuple[int, int]:
        """``(alpha', theta')``: row-block width and column-block width."""
        return len(self.row_codes), len(self.col_codes)


def _run_box(cols, rows, col_sigs, row_sigs):
    # cols[p]: code of column p relative to the row block, rows[o] likewise
    alpha_w, theta_w = len(rows), len(cols)
    cs = 2 * (alpha_w + 1) + 1
    rsn = 2 * (theta_w + 1) + 1
    cols = list(cols)
    rows = list(rows)
    for o in range(alpha_w):
        left = rows[o]
        rsig = row_sigs[o]
        for p in range(theta_w):
            low = cols[p]
            low_live = low[0] != cs
            left_live = left[0] != rsn
            cols[p] = _next_code(low, left_live, col_sigs[p], o, cs)
            left = _next_code(left, low_live, rsig, p, rsn)
        rows[o] = left
    return cols, rows


def process_box(box_in: BoxIO, col_sigs, row_sigs) -> BoxIO:
    """Push the input codes through every cell of one box, row by row.

    ``col_sigs[p]`` is the row block's signature on column ``b + p`` and
    ``row_sigs[o]`` is the column block's signature on row ``a + o``.
    """
    if len(col_sigs) != len(box_in.col_codes) or len(row_sigs) != len(box_in.row_codes):
        raise ValueError("signature count does not match the box widths")
    cols, rows = _run_box(box_in.col_codes, box_in.row_codes, col_sigs, row_sigs)
    return BoxIO(tuple(ReachCode(*c) for c in cols), tuple(ReachCode(*r) for r in rows))


@lru_cache(maxsize=None)
def _field_bits(width: int) -> Tuple[int, int]:
    return sentinel_for(width).bit_length(), (width + 1).bit_length()


def pack_box_io(io: BoxIO) -> bytes:
    """Serialize a :class:`BoxIO` to bytes.

    Each code is packed as ``pi``, ``beta`` (1 bit), ``gamma`` in that order,
    fields little-endian.  ``pi`` takes the bit length of the sentinel and
    ``gamma`` the bit length of ``W + 1``, where ``W`` is the width of the
    block the code refers to.  Column codes come first, then row codes.
    """
    alpha_w, theta_w = io.widths
    return _pack(io.col_codes, io.row_codes, alpha_w, theta_w)


def _pack(cols, rows, alpha_w, theta_w) -> bytes:
    acc = 0
    shift = 0
    for codes, w in ((cols, alpha_w), (rows, theta_w)):
        pb, gb = _field_bits(w)
        for pi, beta, gamma in codes:
            acc |= (pi | (beta << pb) | (gamma << (pb + 1))) << shift
            shift += pb + 1 + gb
    return acc.to_bytes((shift + 7) // 8, "little")


def packed_size(alpha_w: int, theta_w: int) -> int:
    pa, ga = _field_bits(alpha_w)
    pt, gt = _field_bits(theta_w)
    return (theta_w * (pa + 1 + ga) + alpha_w * (pt + 1 + gt) + 7) // 8


@lru_cache(maxsize=1 << 16)
def _unpack(bits: bytes, alpha_w: int, theta_w: int):
    acc = int.from_bytes(bits, "little")
    out = []
    for count, w in ((theta_w, alpha_w), (alpha_w, theta_w)):
        pb, gb = _field_bits(w)
        pmask, gmask = (1 << pb) - 1, (1 << gb) - 1
        codes = []
        for _ in range(count):
            codes.append(ReachCode(acc & pmask, (acc >> pb) & 1, (acc >> (pb + 1)) & gmask))
            acc >>= pb + 1 + gb
        out.append(tuple(codes))
    return out[0], out[1]


def unpack_box_io(bits: bytes, widths: Tuple[int, int]) -> BoxIO:
    """Inverse of :func:`pack_box_io`; ``widths`` is ``(alpha', theta')``."""
    alpha_w, theta_w = widths
    if len(bits) != packed_size(alpha_w, theta_w):
        raise ValueError(
            f"packed box has {len(bits)} bytes, expected {packed_size(alpha_w, theta_w)} for widths {widths}"
        )
    cols, rows = _unpack(bytes(bits), alpha_w, theta_w)
    return BoxIO(cols, rows)
