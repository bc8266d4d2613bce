"""Blocked decision procedure with memoized box processing.

The reachability table is cut into boxes of ``alpha`` rows (edges of ``tau``)
by ``theta`` columns (edges of ``sigma``).  A box's output codes depend only
on its signatures and input codes, so outputs are cached in a
:class:`MemoTable` keyed by a digest of the signatures plus the packed input.

Between boxes the frontier is re-expressed relative to the next block: each
code is decoded to a start parameter and that parameter is located among the
next block's endpoints.  Codes entering a box therefore always have
``gamma == 0`` or are null, and every record carries its concrete start.
"""

from __future__ import annotations

from hashlib import blake2b
import math
import struct
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional

from .encoding import (
    LAYOUT_VERSION,
    BlockSpec,
    InconsistentStateError,
    ReachCode,
    _pack,
    _run_box,
    _unpack,
    sentinel_for,
    signature_ranks,
)
from .freespace import DecisionResult, FreeSpace, _degenerate_decide, init_frontiers, row_list
from .geometry import as_curve

__all__ = [
    "Partition",
    "MemoTable",
    "MemoVersionError",
    "FrontierRecord",
    "make_partition",
    "default_alpha",
    "recode_frontier",
    "boxed_decide",
    "memo_stats",
]

_MAGIC = b"FBMEMO\x00"


@lru_cache(maxsize=None)
def _width_bytes(aw: int, tw: int) -> bytes:
    return struct.pack("<HH", aw, tw)
_FILE_VERSION = 1


class MemoVersionError(ValueError):
    """A persisted memo table does not match the requested layout."""


def default_alpha(m: int) -> int:
    """``max(2, floor(log2 m / log2 log2 m))``."""
    lm = math.log2(m) if m > 1 else 0.0
    llm = math.log2(lm) if lm > 1 else 0.0
    if llm <= 1.0:
        return 2
    return max(2, int(lm / llm))


def _tile(n_vertices: int, width: int) -> List[BlockSpec]:
    edges = n_vertices - 1
    return [BlockSpec(a, min(width, edges - a)) for a in range(0, edges, width)]


@dataclass(frozen=True)
class Partition:
    alpha: int
    theta: int
    row_blocks: tuple
    col_blocks: tuple

    @property
    def n_boxes(self) -> int:
        return len(self.row_blocks) * len(self.col_blocks)


def make_partition(n: int, m: int, alpha: Optional[int] = None, theta: Optional[int] = None) -> Partition:
    """Split ``n - 1`` row edges into blocks of ``alpha`` and ``m - 1`` column edges into blocks of ``theta``.

    Consecutive blocks share one vertex; the last block of each side may be
    narrower.

    >>> p = make_partition(10, 10, alpha=3, theta=2)
    >>> [(b.a, b.width) for b in p.col_blocks]
    [(0, 2), (2, 2), (4, 2), (6, 2), (8, 1)]
    """
    if n < 2 or m < 2:
        raise ValueError("both curves need at least one edge")
    if alpha is None:
        alpha = default_alpha(m)
    if theta is None:
        theta = max(1, int(math.isqrt(alpha)))
    if alpha < 1 or theta < 1:
        raise ValueError("alpha and theta must be at least 1")
    return Partition(alpha, theta, tuple(_tile(n, alpha)), tuple(_tile(m, theta)))


class MemoTable:
    """Box output cache: key bytes to packed output bytes.

    Inserts use ``dict.setdefault`` so a lost race between two writers keeps
    the first value (both are equal anyway); counters are guarded by a lock.
    """

    def __init__(self, alpha: Optional[int] = None, theta: Optional[int] = None):
        self.alpha = alpha
        self.theta = theta
        self._table: dict = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.verified = 0
        # digest -> signature bytes, filled only in debug mode
        self.sig_audit: dict = {}

    def __len__(self) -> int:
        return len(self._table)

    def __contains__(self, key) -> bool:
        return key in self._table

    def get(self, key: bytes) -> Optional[bytes]:
        val = self._table.get(key)
        with self._lock:
            if val is None:
                self.misses += 1
            else:
                self.hits += 1
        return val

    def record(self, hits: int, misses: int) -> None:
        """Add lookups performed directly on the underlying dict to the counters."""
        with self._lock:
            self.hits += hits
            self.misses += misses

    def put(self, key: bytes, value: bytes) -> bytes:
        return self._table.setdefault(key, value)

    def items(self):
        return self._table.items()

    def bind(self, alpha: int, theta: int) -> None:
        if self.alpha is None and self.theta is None:
            self.alpha, self.theta = alpha, theta

    def save(self, path) -> None:
        """Write the table as a versioned binary file."""
        if self.alpha is None or self.theta is None:
            raise ValueError("memo table is not bound to an (alpha, theta) pair")
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<HHIIQ", _FILE_VERSION, LAYOUT_VERSION, self.alpha, self.theta, len(self._table)))
            for key, val in sorted(self._table.items()):
                fh.write(struct.pack("<H", len(key)))
                fh.write(key)
                fh.write(struct.pack("<H", len(val)))
                fh.write(val)

    @classmethod
    def load(cls, path, alpha: Optional[int] = None, theta: Optional[int] = None) -> "MemoTable":
        """Read a table written by :meth:`save`.

        Raises :class:`MemoVersionError` if the file format, code layout or
        (when given) ``alpha``/``theta`` differ.
        """
        with open(path, "rb") as fh:
            data = fh.read()
        if not data.startswith(_MAGIC):
            raise MemoVersionError(f"{path}: not a memo table file")
        off = len(_MAGIC)
        fver, lver, a, t, count = struct.unpack_from("<HHIIQ", data, off)
        off += struct.calcsize("<HHIIQ")
        if fver != _FILE_VERSION or lver != LAYOUT_VERSION:
            raise MemoVersionError(
                f"{path}: file version {fver}/layout {lver}, expected {_FILE_VERSION}/{LAYOUT_VERSION}"
            )
        if (alpha is not None and alpha != a) or (theta is not None and theta != t):
            raise MemoVersionError(f"{path}: built for alpha={a}, theta={t}")
        memo = cls(a, t)
        for _ in range(count):
            (kl,) = struct.unpack_from("<H", data, off)
            key = data[off + 2 : off + 2 + kl]
            off += 2 + kl
            (vl,) = struct.unpack_from("<H", data, off)
            memo._table[key] = data[off + 2 : off + 2 + vl]
            off += 2 + vl
        if off != len(data):
            raise MemoVersionError(f"{path}: trailing or truncated data")
        return memo


def memo_stats(memo: MemoTable) -> tuple:
    """``(entries, hits, misses)``."""
    return len(memo), memo.hits, memo.misses


@dataclass
class FrontierRecord:
    """One frontier entry: a code and, for ``gamma == 0`` codes, the start it stands for."""

    code: ReachCode
    carried_ell: Optional[float] = None


def _rank(ell, s_vals, e_vals):
    # predecessor rank and equality flag under the shared tie order
    pi = 0
    beta = 0
    for s, e in zip(s_vals, e_vals):
        if s is None:
            continue
        if s <= ell:
            pi += 1
            if s == ell:
                beta = 1
        if e < ell:
            pi += 1
    return pi, beta


def _decode(code, s_vals, carried, sentinel):
    pi, _, gamma = code
    if pi == sentinel:
        return None
    if gamma:
        return s_vals[gamma - 1]
    if carried is None:
        raise InconsistentStateError("gamma = 0 code without a carried start parameter")
    return carried


def recode_frontier(records, old_points, new_points):
    """Re-express frontier codes relative to a new block.

    Parameters
    ----------
    records : list of FrontierRecord
        Codes relative to the old block, one per edge.
    old_points, new_points : list of list of EdgeInterval
        For each edge, the old and new block's ball intersections in vertex
        order.

    Returns
    -------
    list of FrontierRecord
        ``gamma == 0`` codes relative to the new block (or null), each
        carrying its decoded start parameter.
    """
    out = []
    for rec, old, new in zip(records, old_points, new_points):
        ell = _decode(rec.code, [p.lo for p in old], rec.carried_ell, sentinel_for(len(old) - 1))
        out.append(_encode_record(ell, [p.lo for p in new], [p.hi for p in new]))
    return out


_NULL_RECORDS: dict = {}


def _null_record(width: int) -> FrontierRecord:
    rec = _NULL_RECORDS.get(width)
    if rec is None:
        rec = _NULL_RECORDS[width] = FrontierRecord(ReachCode(sentinel_for(width), 0, 0), None)
    return rec


def _encode_record(ell, s_vals, e_vals) -> FrontierRecord:
    if ell is None:
        return _null_record(len(s_vals) - 1)
    pi, beta = _rank(ell, s_vals, e_vals)
    if pi == 0:
        # the block-entry start always lies in the first vertex's ball
        raise InconsistentStateError(f"start parameter {ell!r} precedes every block endpoint")
    return FrontierRecord(ReachCode(pi, beta, 0), ell)


@dataclass
class _Stats:
    boxes: int = 0
    lookups: int = 0
    hits: int = 0
    misses: int = 0
    verified: int = 0
    keys: list = field(default_factory=list)


def boxed_decide(
    tau,
    sigma,
    delta: float,
    partition: Optional[Partition] = None,
    memo: Optional[MemoTable] = None,
    *,
    alpha: Optional[int] = None,
    theta: Optional[int] = None,
    debug: bool = False,
    record_keys: bool = False,
) -> DecisionResult:
    """Decide ``d_F(tau, sigma) <= delta`` box by box with memoized box outputs.

    Parameters
    ----------
    partition : Partition, optional
        Defaults to :func:`make_partition` with ``alpha`` and ``theta``.
    memo : MemoTable, optional
        Shared cache; a fresh one is used when omitted.
    debug : bool
        Recompute every memo hit and compare bit-exactly, and audit digest
        collisions.

    Returns
    -------
    DecisionResult
        ``stats`` holds ``boxes``, ``lookups``, ``hits``, ``misses`` (and
        ``verified`` in debug mode).
    """
    tau, sigma = as_curve(tau), as_curve(sigma)
    if len(tau) == 1 or len(sigma) == 1:
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        return DecisionResult(_degenerate_decide(tau, sigma, float(delta)), stats={"boxes": 0, "lookups": 0})
    fs = FreeSpace(tau, sigma, delta)
    n, m = fs.n, fs.m
    if partition is None:
        partition = make_partition(n, m, alpha, theta)
    elif partition.row_blocks[-1].a + partition.row_blocks[-1].width != n - 1 or (
        partition.col_blocks[-1].a + partition.col_blocks[-1].width != m - 1
    ):
        raise ValueError("partition does not match the curve sizes")
    if memo is None:
        memo = MemoTable(partition.alpha, partition.theta)
    memo.bind(partition.alpha, partition.theta)
    stats = _Stats()

    rblocks, cblocks = partition.row_blocks, partition.col_blocks
    front = init_frontiers(tau, sigma, delta, fs)

    # row signatures: for each column block, one signature per tau edge; keys
    # are built from byte slices of the serialized tables
    row_sig, row_sig_bytes = [], []
    for cb in cblocks:
        vs = slice(cb.a, cb.a + cb.width + 1)
        ranks = signature_ranks(fs.sp[vs], fs.ep[vs])
        row_sig.append(ranks)
        row_sig_bytes.append(ranks.tobytes())

    spT, epT = fs.sp.T, fs.ep.T

    # horizontal frontier: R[a_k][j] for every column j, relative to row block k,
    # kept as parallel lists of codes and carried start parameters
    s_cache: dict = {}
    e_cache: dict = {}

    def s_row(i):
        r = s_cache.get(i)
        if r is None:
            r = s_cache[i] = row_list(fs.s[i])
        return r

    def e_row(i):
        r = e_cache.get(i)
        if r is None:
            r = e_cache[i] = row_list(fs.e[i])
        return r

    rb0 = rblocks[0]
    s_blk = [s_row(i) for i in rb0.vertices]
    e_blk = [e_row(i) for i in rb0.vertices]
    col_codes, col_ells = [], []
    for j, iv in enumerate(front.row_intervals):
        rec = _encode_record(iv.lo, [r[j] for r in s_blk], [r[j] for r in e_blk])
        col_codes.append(rec.code)
        col_ells.append(rec.carried_ell)
    pack_cache: dict = {}
    table_get = memo._table.get
    n_boxes = n_hits = n_misses = 0

    for k, rb in enumerate(rblocks):
        a, aw = rb.a, rb.width
        csent = sentinel_for(aw)
        vs = slice(a, a + aw + 1)
        col_sig = signature_ranks(fs.s[vs], fs.e[vs])
        col_sig_bytes = col_sig.tobytes()
        cstride = col_sig.shape[1] * col_sig.itemsize
        s_blk = [s_row(i) for i in rb.vertices]
        # rows below this block are never needed again
        for i in [i for i in s_cache if i < a]:
            del s_cache[i]
            e_cache.pop(i, None)
        # ball intersections of sigma's vertices on each tau edge in this block
        sp_rows = [row_list(spT[i]) for i in rb.edges]
        ep_rows = [row_list(epT[i]) for i in rb.edges]

        # vertical frontier: R'[b_0][i] for i in this row block, relative to column block 0
        cb0 = cblocks[0]
        row_codes, row_ells = [], []
        for o in range(aw):
            rec = _encode_record(
                front.col_intervals[a + o].lo,
                sp_rows[o][cb0.a : cb0.a + cb0.width + 1],
                ep_rows[o][cb0.a : cb0.a + cb0.width + 1],
            )
            row_codes.append(rec.code)
            row_ells.append(rec.carried_ell)

        for l, cb in enumerate(cblocks):
            b, tw = cb.a, cb.width
            rsent = sentinel_for(tw)
            cin = tuple(col_codes[b : b + tw])
            rin = tuple(row_codes)
            rstride = row_sig[l].shape[1] * row_sig[l].itemsize
            sig_bytes = (col_sig_bytes[b * cstride : (b + tw) * cstride]
                         + row_sig_bytes[l][a * rstride : (a + aw) * rstride])
            digest = blake2b(sig_bytes, digest_size=16).digest()
            packed_in = pack_cache.get((cin, rin))
            if packed_in is None:
                packed_in = pack_cache[(cin, rin)] = _pack(cin, rin, aw, tw)
            key = digest + _width_bytes(aw, tw) + packed_in
            n_boxes += 1
            if record_keys:
                stats.keys.append(key)
            if debug:
                prev = memo.sig_audit.setdefault(digest, sig_bytes)
                if prev != sig_bytes:
                    raise RuntimeError("signature digest collision")
            out = table_get(key)
            if out is None:
                n_misses += 1
                cols, rows = _run_box(cin, rin, col_sig[b : b + tw].tolist(), row_sig[l][a : a + aw].tolist())
                out = memo.put(key, _pack(cols, rows, aw, tw))
            else:
                n_hits += 1
                if debug:
                    cols, rows = _run_box(cin, rin, col_sig[b : b + tw].tolist(), row_sig[l][a : a + aw].tolist())
                    if _pack(cols, rows, aw, tw) != out:
                        raise RuntimeError(f"memo hit mismatch at box ({k}, {l})")
                    memo.verified += 1
                    stats.verified += 1
            cols, rows = _unpack(out, aw, tw)

            # new horizontal frontier, still relative to row block k; a gamma = 0
            # output keeps the start this column entered the block with
            col_codes[b : b + tw] = cols
            for p in range(tw):
                code = cols[p]
                if code[0] == csent or code[2]:
                    col_ells[b + p] = None

            # vertical frontier moves to the next column block
            if l + 1 < len(cblocks):
                nb = cblocks[l + 1]
                nsl = slice(nb.a, nb.a + nb.width + 1)
                null_next = _null_record(nb.width).code
                for o in range(aw):
                    code = rows[o]
                    if code[0] == rsent:
                        row_codes[o] = null_next
                        row_ells[o] = None
                        continue
                    ell = _decode(code, sp_rows[o][b : b + tw + 1], row_ells[o], rsent)
                    rec = _encode_record(ell, sp_rows[o][nsl], ep_rows[o][nsl])
                    row_codes[o] = rec.code
                    row_ells[o] = rec.carried_ell

        # horizontal frontier moves up to the next row block
        if k + 1 < len(rblocks):
            nb = rblocks[k + 1]
            s_new = [s_row(i) for i in nb.vertices]
            e_new = [e_row(i) for i in nb.vertices]
            null_next = _null_record(nb.width).code
            for j in range(m - 1):
                code = col_codes[j]
                if code[0] == csent:
                    col_codes[j] = null_next
                    col_ells[j] = None
                    continue
                ell = _decode(code, [r[j] for r in s_blk], col_ells[j], csent)
                rec = _encode_record(ell, [r[j] for r in s_new], [r[j] for r in e_new])
                col_codes[j] = rec.code
                col_ells[j] = rec.carried_ell

    # R[n-1][m-2] relative to the last row block
    rb = rblocks[-1]
    ell = _decode(col_codes[m - 2], row_list(fs.s[rb.a : rb.a + rb.width + 1, m - 2]), col_ells[m - 2],
                  sentinel_for(rb.width))
    reachable = ell is not None and fs.e[n - 1, m - 2] == 1.0
    memo.record(n_hits, n_misses)
    out_stats = {"boxes": n_boxes, "lookups": n_boxes, "hits": n_hits, "misses": n_misses}
    if debug:
        out_stats["verified"] = stats.verified
    if record_keys:
        out_stats["keys"] = stats.keys
    return DecisionResult(bool(reachable), stats=out_stats)
