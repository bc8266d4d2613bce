"""Square-root-free predicates that determine signatures and predecessor ranks.

Each predicate is available in two independent forms:

* ``poly``: sign tests on low-degree polynomials in the coordinates, with no
  square roots and no division.
* ``direct``: the geometric definition, evaluated through
  :func:`frechetbox.geometry.intersect_batch`.

Kernels are vectorized: points are arrays of shape ``(..., d)`` and results are
boolean arrays of the broadcast batch shape.  :func:`predicate` is the scalar
front end that indexes into two curves.

Predicate ids and their meaning (``s'_{j,i}``, ``e'_{j,i}`` are the endpoints of
``B(w_j) ∩ v_i v_{i+1}``; ``s_{i,j}``, ``e_{i,j}`` those of ``B(v_i) ∩ w_j w_{j+1}``)::

    1  (i, j)       d(w_j, v_i v_{i+1}) <= delta
    2  (i, j)       d(v_i, w_j w_{j+1}) <= delta
    3  (i, j, j2)   s'_{j,i} <= s'_{j2,i}      both non-null
    4  (i, i2, j)   s_{i,j}  <= s_{i2,j}       both non-null
    5  (i, j, j2)   e'_{j,i} <= e'_{j2,i}      both non-null
    6  (i, i2, j)   e_{i,j}  <= e_{i2,j}       both non-null
    7  (i, j, j2)   s'_{j,i} <= e'_{j2,i}      both non-null
    8  (i, i2, j)   s_{i,j}  <= e_{i2,j}       both non-null
    9  (i, j)       same as 2
    10 (i, j, y)    s_{i,j} non-null and y <= s_{i,j}
    11 (i, j, y)    e_{i,j} non-null and y <= e_{i,j}
    12 (i, j, y)    s_{i,j} non-null and y == s_{i,j}
    13 (i, j, y)    e_{i,j} non-null and y == e_{i,j}

Comparisons ``<=`` are along the oriented edge.
"""

from __future__ import annotations

import numpy as np

from .geometry import _dot, as_curve, intersect_batch

__all__ = [
    "meets_edge",
    "order_predicate",
    "locate_predicate",
    "order_margin",
    "locate_margin",
    "meet_margin",
    "predicate",
]

ORDER_KINDS = ("ss", "ee", "se")
LOCATE_KINDS = ("y<=s", "y<=e", "y==s", "y==e")


def _arr(x):
    return np.asarray(x, dtype=float)


def _perp_scaled(c, p, q):
    """d(c, aff(pq))^2 * |p - q|^2, expanded around q."""
    cq = c - q
    pq = p - q
    return _dot(cq, cq) * _dot(pq, pq) - _dot(cq, pq) ** 2


def _sum_ge(a2, b2, c2):
    """sqrt(a2) + sqrt(b2) >= sqrt(c2) for nonnegative inputs, root-free."""
    g = c2 - a2 - b2
    return (g <= 0) | (4.0 * a2 * b2 - g * g >= 0)


def _sum_gt(a2, b2, c2):
    """sqrt(a2) + sqrt(b2) > sqrt(c2) for nonnegative inputs, root-free."""
    g = c2 - a2 - b2
    return (g < 0) | (4.0 * a2 * b2 - g * g > 0)


# ---------------------------------------------------------------- polynomial forms


def _meets_edge_poly(c, p, q, delta):
    d2 = delta * delta
    u = q - p
    l2 = _dot(u, u)
    f1 = _perp_scaled(c, p, q) - d2 * l2
    f2 = _dot(c - p, u)
    f3 = _dot(c - q, p - q)
    f4 = _dot(c - p, c - p) - d2
    f5 = _dot(c - q, c - q) - d2
    inside = (f2 >= 0) & (f3 >= 0)
    return (f1 <= 0) & (inside | ((f2 < 0) & (f4 <= 0)) | ((f3 < 0) & (f5 <= 0)))


def _order_poly(kind, c, c2, p, q, delta):
    d2 = delta * delta
    u = q - p
    l2 = _dot(u, u)
    # both scaled by |u|^2: squared half-chords of the two balls on aff(pq)
    h1 = d2 * l2 - _perp_scaled(c, p, q)
    h2 = d2 * l2 - _perp_scaled(c2, p, q)
    f31 = _dot(c2 - c, u)
    z1 = f31 * f31
    ahead = f31 >= 0  # projection of c is not behind that of c2

    c_at_p = _dot(c - p, c - p) - d2 <= 0
    c2_at_p = _dot(c2 - p, c2 - p) - d2 <= 0
    c_at_q = _dot(c - q, c - q) - d2 <= 0
    c2_at_q = _dot(c2 - q, c2 - q) - d2 <= 0

    if kind == "ss":
        tilde = np.where(ahead, _sum_ge(z1, h1, h2), ~_sum_gt(z1, h2, h1))
        res = np.where(c_at_p, True, np.where(c2_at_p, False, tilde))
    elif kind == "ee":
        tilde = np.where(ahead, _sum_ge(z1, h2, h1), ~_sum_gt(z1, h1, h2))
        res = np.where(c2_at_q, True, np.where(c_at_q, False, tilde))
    elif kind == "se":
        tilde = np.where(ahead, True, _sum_ge(h1, h2, z1))
        res = np.where(c_at_p | c2_at_q, True, tilde)
    else:
        raise ValueError(f"unknown order kind {kind!r}")
    both = _meets_edge_poly(c, p, q, delta) & _meets_edge_poly(c2, p, q, delta)
    return both & res


def _locate_poly(kind, c, y, p, q, delta):
    d2 = delta * delta
    u = q - p
    f1 = _dot(c - y, u)
    f2 = _dot(c - p, u)
    f3 = _dot(c - q, p - q)
    f4 = _dot(y - p, u)
    f5 = _dot(c - y, c - y) - d2
    g1 = _dot(q - y, u)
    proj_on_edge = (f2 >= 0) & (f3 >= 0)
    hit = _meets_edge_poly(c, p, q, delta)

    if kind == "y<=s":
        behind = np.where(proj_on_edge, False, f4 <= 0)
        ahead = (f5 >= 0) | (f4 == 0)
        res = np.where(f1 < 0, behind, ahead)
    elif kind == "y==s":
        behind = np.where(proj_on_edge, False, f4 == 0)
        ahead = (f5 == 0) | ((f4 == 0) & (f5 <= 0))
        res = np.where(f1 < 0, behind, ahead)
    elif kind == "y<=e":
        ahead = np.where(proj_on_edge, True, g1 >= 0)
        res = np.where(f1 >= 0, ahead, f5 <= 0)
    elif kind == "y==e":
        res = ((g1 == 0) & (f5 <= 0)) | ((f1 <= 0) & (f5 == 0))
    else:
        raise ValueError(f"unknown locate kind {kind!r}")
    return hit & res


# ---------------------------------------------------------------- direct forms


def _seg_distance(c, p, q):
    u = q - p
    t = np.clip(_dot(c - p, u) / _dot(u, u), 0.0, 1.0)
    foot = p + t[..., None] * u
    diff = c - foot
    return np.sqrt(_dot(diff, diff))


def _meets_edge_direct(c, p, q, delta):
    return _seg_distance(c, p, q) <= delta


def _order_direct(kind, c, c2, p, q, delta):
    lo1, hi1 = intersect_batch(c, p, q, delta)
    lo2, hi2 = intersect_batch(c2, p, q, delta)
    both = ~np.isnan(lo1) & ~np.isnan(lo2)
    with np.errstate(invalid="ignore"):
        if kind == "ss":
            res = lo1 <= lo2
        elif kind == "ee":
            res = hi1 <= hi2
        elif kind == "se":
            res = lo1 <= hi2
        else:
            raise ValueError(f"unknown order kind {kind!r}")
    return both & res


def _locate_direct(kind, c, t, p, q, delta):
    lo, hi = intersect_batch(c, p, q, delta)
    with np.errstate(invalid="ignore"):
        if kind == "y<=s":
            res = t <= lo
        elif kind == "y<=e":
            res = t <= hi
        elif kind == "y==s":
            res = t == lo
        elif kind == "y==e":
            res = t == hi
        else:
            raise ValueError(f"unknown locate kind {kind!r}")
    return ~np.isnan(lo) & res


# ---------------------------------------------------------------- public kernels


def _point_on_edge(t, p, q):
    t = _arr(t)
    y = p + t[..., None] * (q - p)
    # p + (q - p) need not round to q
    return np.where((t == 1.0)[..., None], q, y)


def meets_edge(c, p, q, delta, method="poly"):
    """Whether ``B(c, delta)`` meets the oriented edge ``pq`` (P1/P2/P9)."""
    c, p, q = _arr(c), _arr(p), _arr(q)
    if method == "poly":
        return _meets_edge_poly(c, p, q, delta)
    if method == "direct":
        return _meets_edge_direct(c, p, q, delta)
    raise ValueError(f"unknown method {method!r}")


def order_predicate(kind, c, c2, p, q, delta, method="poly"):
    """Compare endpoints of ``B(c) ∩ pq`` and ``B(c2) ∩ pq`` along ``pq``.

    ``kind`` selects the compared pair: ``"ss"`` (start <= start, P3/P4),
    ``"ee"`` (end <= end, P5/P6) or ``"se"`` (start of ``c`` <= end of ``c2``,
    P7/P8).  False whenever either intersection is empty.
    """
    c, c2, p, q = _arr(c), _arr(c2), _arr(p), _arr(q)
    if method == "poly":
        return _order_poly(kind, c, c2, p, q, delta)
    if method == "direct":
        return _order_direct(kind, c, c2, p, q, delta)
    raise ValueError(f"unknown method {method!r}")


def locate_predicate(kind, c, t, p, q, delta, method="poly"):
    """Position of the edge point at parameter ``t`` relative to ``B(c) ∩ pq``.

    ``kind`` is one of ``"y<=s"`` (P10), ``"y<=e"`` (P11), ``"y==s"`` (P12),
    ``"y==e"`` (P13).  The polynomial form only sees the coordinates of the
    query point, never its parameter.
    """
    c, p, q = _arr(c), _arr(p), _arr(q)
    if method == "poly":
        return _locate_poly(kind, c, _point_on_edge(t, p, q), p, q, delta)
    if method == "direct":
        return _locate_direct(kind, c, _arr(t), p, q, delta)
    raise ValueError(f"unknown method {method!r}")


def meet_margin(c, p, q, delta):
    return np.abs(_seg_distance(c, p, q) - delta)


def order_margin(kind, c, c2, p, q, delta):
    """Distance (in length units) of an order configuration from a sign flip."""
    c, c2, p, q = _arr(c), _arr(c2), _arr(p), _arr(q)
    length = np.sqrt(_dot(q - p, q - p))
    lo1, hi1 = intersect_batch(c, p, q, delta)
    lo2, hi2 = intersect_batch(c2, p, q, delta)
    x1 = lo1 if kind in ("ss", "se") else hi1
    x2 = lo2 if kind == "ss" else hi2
    gap = np.abs(x1 - x2) * length
    gap = np.where(np.isnan(gap), np.inf, gap)
    # endpoints clamped onto the same edge vertex tie exactly in both forms
    end = p if kind == "ss" else q
    d1 = np.sqrt(_dot(c - end, c - end)) - delta
    d2 = np.sqrt(_dot(c2 - end, c2 - end)) - delta
    if kind == "se":
        dp = np.sqrt(_dot(c - p, c - p)) - delta
        gap = np.where((dp < 0) | (d2 < 0), np.minimum(np.abs(dp), np.abs(d2)), gap)
    else:
        gap = np.where((d1 < 0) & (d2 < 0), np.minimum(-d1, -d2), gap)
    return np.minimum(np.minimum(meet_margin(c, p, q, delta), meet_margin(c2, p, q, delta)), gap)


def locate_margin(kind, c, t, p, q, delta):
    """Distance (in length units) of a locate configuration from a sign flip.

    Queries sitting exactly on an edge endpoint are compared structurally, so
    their margin is the distance of that endpoint from the ball boundary.
    """
    c, p, q = _arr(c), _arr(p), _arr(q)
    t = _arr(t)
    length = np.sqrt(_dot(q - p, q - p))
    lo, hi = intersect_batch(c, p, q, delta)
    x = lo if kind in ("y<=s", "y==s") else hi
    gap = np.abs(t - x) * length
    gap = np.where(np.isnan(gap), np.inf, gap)
    dp = np.abs(np.sqrt(_dot(c - p, c - p)) - delta)
    dq = np.abs(np.sqrt(_dot(c - q, c - q)) - delta)
    if kind == "y<=s":
        gap = np.where(t == 0.0, np.inf, gap)
    elif kind == "y==s":
        gap = np.where(t == 0.0, dp, gap)
    elif kind in ("y<=e", "y==e"):
        gap = np.where(t == 1.0, dq, gap)
    return np.minimum(meet_margin(c, p, q, delta), gap)


_ORDER_IDS = {3: ("ss", "tau"), 4: ("ss", "sigma"), 5: ("ee", "tau"),
              6: ("ee", "sigma"), 7: ("se", "tau"), 8: ("se", "sigma")}
_LOCATE_IDS = {10: "y<=s", 11: "y<=e", 12: "y==s", 13: "y==e"}


def predicate(pid, tau, sigma, delta, *indices, y=None, method="poly"):
    """Evaluate predicate ``pid`` (1..13) on curves ``tau`` and ``sigma``.

    Index conventions follow the module docstring; for ``pid`` 10-13 pass the
    query as a parameter ``y`` on edge ``j`` of ``sigma``.
    """
    tau, sigma = as_curve(tau), as_curve(sigma)
    v, w = tau.vertices, sigma.vertices
    if pid == 1:
        i, j = indices
        return bool(meets_edge(w[j], v[i], v[i + 1], delta, method))
    if pid in (2, 9):
        i, j = indices
        return bool(meets_edge(v[i], w[j], w[j + 1], delta, method))
    if pid in _ORDER_IDS:
        kind, edge_curve = _ORDER_IDS[pid]
        if edge_curve == "tau":
            i, j, j2 = indices
            args = (w[j], w[j2], v[i], v[i + 1])
        else:
            i, i2, j = indices
            args = (v[i], v[i2], w[j], w[j + 1])
        return bool(order_predicate(kind, *args, delta, method))
    if pid in _LOCATE_IDS:
        if y is None:
            raise ValueError(f"predicate {pid} needs a query parameter y")
        i, j = indices
        return bool(locate_predicate(_LOCATE_IDS[pid], v[i], y, w[j], w[j + 1], delta, method))
    raise ValueError(f"unknown predicate id {pid!r}")
