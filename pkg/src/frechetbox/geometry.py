"""Points, segments, curves and ball-segment intersections.

Every intersection endpoint is reported as a parameter in ``[0, 1]`` along the
oriented edge it lies on.  A single vectorized kernel computes them; the scalar
helpers call into the same kernel so that every code path in the package sees
bit-identical parameters for the same (center, edge, delta) triple.

Indices are 0-based throughout: vertex ``i`` of a curve with ``n`` vertices is
``vertices[i]`` and edge ``i`` joins vertices ``i`` and ``i + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    "DegenerateInputError",
    "NoPredecessorError",
    "Curve",
    "Segment",
    "EdgeInterval",
    "NULL_INTERVAL",
    "as_curve",
    "intersect_batch",
    "intersection_table",
    "ball_segment_intersection",
    "point_segment_distance",
    "endpoint_order",
    "predecessor_rank",
]

S_KIND = 0
E_KIND = 1


class DegenerateInputError(ValueError):
    """Raised for zero-length edges or otherwise unusable geometry."""


class NoPredecessorError(ValueError):
    """Raised when a query parameter lies in front of every block endpoint."""


class EdgeInterval(NamedTuple):
    """Closed parameter interval on an oriented edge, or null (both ``None``)."""

    lo: Optional[float]
    hi: Optional[float]

    @property
    def is_null(self) -> bool:
        return self.lo is None

    def contains(self, t: float) -> bool:
        return self.lo is not None and self.lo <= t <= self.hi


NULL_INTERVAL = EdgeInterval(None, None)


@dataclass(frozen=True)
class Segment:
    """Oriented segment ``start -> end`` with positive length."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        start = np.asarray(self.start, dtype=float)
        end = np.asarray(self.end, dtype=float)
        if start.shape != end.shape or start.ndim != 1:
            raise DegenerateInputError("segment endpoints must be 1-d points of equal dimension")
        if np.array_equal(start, end):
            raise DegenerateInputError("zero-length segment")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    def point_at(self, t: float) -> np.ndarray:
        return self.start + t * (self.end - self.start)


class Curve:
    """Polygonal curve given by an ``(n, d)`` array of vertices.

    Consecutive vertices must differ; a single vertex is a valid (edgeless)
    curve.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim == 1:
            v = v.reshape(1, -1) if v.size else v.reshape(0, 1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DegenerateInputError("a curve needs at least one vertex of dimension >= 1")
        if not np.all(np.isfinite(v)):
            raise DegenerateInputError("curve coordinates must be finite")
        repeats = np.flatnonzero(np.all(v[1:] == v[:-1], axis=1))
        if repeats.size:
            k = int(repeats[0])
            raise DegenerateInputError(
                f"vertices {k} and {k + 1} coincide (zero-length edge)"
            )
        v.setflags(write=False)
        self.vertices = v

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __repr__(self) -> str:
        return f"Curve(n={len(self)}, dim={self.dim})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Curve) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self):
        return hash(self.vertices.tobytes())

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_edges(self) -> int:
        return len(self) - 1

    def edge(self, i: int) -> Segment:
        return Segment(self.vertices[i], self.vertices[i + 1])


def as_curve(obj) -> Curve:
    return obj if isinstance(obj, Curve) else Curve(obj)


def _dot(a, b):
    # explicit coordinate loop so the summation order never depends on array layout
    acc = a[..., 0] * b[..., 0]
    for k in range(1, a.shape[-1]):
        acc = acc + a[..., k] * b[..., k]
    return acc


def _cross_norm2(u, w):
    """Squared norm of the wedge product, i.e. |u|^2 |w|^2 - <u, w>^2 without cancellation."""
    d = u.shape[-1]
    acc = np.zeros(np.broadcast_shapes(u.shape, w.shape)[:-1])
    for k in range(d):
        for l in range(k + 1, d):
            m = u[..., k] * w[..., l] - u[..., l] * w[..., k]
            acc = acc + m * m
    return acc


def intersect_batch(centers, starts, ends, delta):
    """Elementwise ball/edge intersection over broadcast batches.

    ``centers``, ``starts`` and ``ends`` have shape ``(..., d)`` and broadcast
    against each other; the result has the broadcast batch shape.  Returns
    ``(lo, hi)`` parameter arrays with NaN marking an empty intersection.
    ``lo == 0`` exactly when the edge start lies in the ball and ``hi == 1``
    exactly when the edge end does.
    """
    centers = np.asarray(centers, dtype=float)
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    delta = np.asarray(delta, dtype=float)
    d2 = delta * delta

    u = ends - starts
    w = centers - starts
    a = _dot(u, u)
    b = _dot(u, w)
    ww = _dot(w, w)
    ve = centers - ends
    ee = _dot(ve, ve)
    perp = _cross_norm2(u, w)
    disc = a * d2 - perp

    start_in = ww <= d2
    end_in = ee <= d2
    sq = np.sqrt(np.maximum(disc, 0.0))
    # stable quadratic: the larger-magnitude root first, the other via Vieta
    q = b + np.copysign(sq, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q / a
        r2 = np.where(q != 0.0, (ww - d2) / q, r1)
    t_lo = np.minimum(r1, r2)
    t_hi = np.maximum(r1, r2)

    lo = np.where(start_in, 0.0, np.clip(t_lo, 0.0, 1.0))
    hi = np.where(end_in, 1.0, np.clip(t_hi, 0.0, 1.0))
    hit = start_in | end_in | ((disc >= 0.0) & (t_hi >= 0.0) & (t_lo <= 1.0))
    hit &= lo <= hi
    lo = np.where(hit, lo, np.nan)
    hi = np.where(hit, hi, np.nan)
    return lo, hi


def intersection_table(centers, starts, ends, delta):
    """Intersect every ball with every oriented edge.

    Parameters
    ----------
    centers : array_like, shape (K, d)
    starts, ends : array_like, shape (E, d)
        Edge ``e`` runs from ``starts[e]`` to ``ends[e]``.
    delta : float
        Common ball radius.

    Returns
    -------
    lo, hi : ndarray, shape (K, E)
        Start and end parameters of ``B(centers[k], delta) ∩ edge e``; NaN
        where the intersection is empty.
    """
    centers = np.asarray(centers, dtype=float)
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    return intersect_batch(centers[:, None, :], starts[None, :, :], ends[None, :, :], delta)


def ball_segment_intersection(center, seg: Segment, delta: float) -> EdgeInterval:
    """Parameter range of ``seg`` within distance ``delta`` of ``center``.

    >>> ball_segment_intersection([0, 0], Segment([-2, 0], [2, 0]), 1.0)
    EdgeInterval(lo=0.25, hi=0.75)
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if not isinstance(seg, Segment):
        seg = Segment(*seg)
    lo, hi = intersect_batch(np.asarray(center, dtype=float), seg.start, seg.end, delta)
    if math.isnan(lo):
        return NULL_INTERVAL
    return EdgeInterval(float(lo), float(hi))


def point_segment_distance(p, seg: Segment) -> float:
    """Euclidean distance from ``p`` to the closed segment."""
    if not isinstance(seg, Segment):
        seg = Segment(*seg)
    p = np.asarray(p, dtype=float)
    u = seg.end - seg.start
    t = float(np.dot(p - seg.start, u) / np.dot(u, u))
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - seg.point_at(t)))


def endpoint_order(points: Sequence[EdgeInterval]) -> list:
    """Sorted ``(value, kind, vertex_offset)`` keys of the non-null endpoints.

    Ties on the parameter are broken by kind (``s`` before ``e``) and then by
    the smaller vertex offset.  This order is used wherever ranks are formed.
    """
    keys = []
    for k, iv in enumerate(points):
        if iv.lo is None:
            continue
        keys.append((iv.lo, S_KIND, k))
        keys.append((iv.hi, E_KIND, k))
    keys.sort()
    return keys


def predecessor_rank(y: float, points: Sequence[EdgeInterval]) -> tuple:
    """Locate ``y`` among the sorted endpoints of a block on one edge.

    The query is slotted after every ``s`` endpoint equal to it and before
    every ``e`` endpoint equal to it, so the predecessor is the last endpoint
    ``p`` with ``p.s <= y`` or ``p.e < y``.  With this convention a rank
    comparison against any endpoint reproduces the exact parameter comparison
    used by the interval propagation.

    Returns
    -------
    (rank, is_equal)
        1-based rank of the predecessor in :func:`endpoint_order` and whether
        its parameter equals ``y``.  If every point is null the rank is the
        null sentinel ``2 * len(points) + 1``.

    Raises
    ------
    NoPredecessorError
        If ``y`` lies strictly in front of every non-null endpoint.
    """
    rank = 0
    equal = False
    any_hit = False
    for iv in points:
        if iv.lo is None:
            continue
        any_hit = True
        if iv.lo <= y:
            rank += 1
            if iv.lo == y:
                equal = True
        if iv.hi < y:
            rank += 1
    if not any_hit:
        return 2 * len(points) + 1, False
    if rank == 0:
        raise NoPredecessorError(f"parameter {y!r} precedes every endpoint of the block")
    return rank, equal
