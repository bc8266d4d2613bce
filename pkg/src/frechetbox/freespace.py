"""Reachability-interval dynamic program over the free-space diagram.

Cell ``(i, j)`` pairs edge ``i`` of ``tau`` with edge ``j`` of ``sigma``.  Its
lower side carries ``R[i][j]``, the reachable part of ``sigma``'s edge ``j``
for vertex ``v_i``; its left side carries ``R'[j][i]``, the reachable part of
``tau``'s edge ``i`` for vertex ``w_j``.  A non-null reachability interval
always ends where the vertex ball leaves the edge, so only the start parameter
is propagated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .geometry import NULL_INTERVAL, Curve, EdgeInterval, as_curve, intersection_table

__all__ = [
    "FreeSpace",
    "Frontier",
    "DecisionResult",
    "init_frontiers",
    "propagate_cell",
    "naive_decide",
    "row_list",
]


def row_list(arr) -> list:
    """One table row as Python floats with ``None`` for empty intersections."""
    return [None if x != x else x for x in arr.tolist()]


class FreeSpace:
    """All ball/edge intersections of one ``(tau, sigma, delta)`` instance.

    Attributes
    ----------
    s, e : ndarray, shape (n, m - 1)
        ``s[i, j]``, ``e[i, j]``: endpoints of ``B(v_i) ∩ w_j w_{j+1}``.
    sp, ep : ndarray, shape (m, n - 1)
        ``sp[j, i]``, ``ep[j, i]``: endpoints of ``B(w_j) ∩ v_i v_{i+1}``.

    NaN marks an empty intersection.
    """

    def __init__(self, tau, sigma, delta: float):
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        self.tau = as_curve(tau)
        self.sigma = as_curve(sigma)
        if self.tau.dim != self.sigma.dim:
            raise ValueError("curves live in different dimensions")
        self.delta = float(delta)
        v, w = self.tau.vertices, self.sigma.vertices
        self.s, self.e = intersection_table(v, w[:-1], w[1:], delta)
        self.sp, self.ep = intersection_table(w, v[:-1], v[1:], delta)

    @property
    def n(self) -> int:
        return len(self.tau)

    @property
    def m(self) -> int:
        return len(self.sigma)

    def ball(self, i: int, j: int) -> EdgeInterval:
        """``B(v_i) ∩ w_j w_{j+1}``."""
        lo = self.s[i, j]
        return NULL_INTERVAL if lo != lo else EdgeInterval(float(lo), float(self.e[i, j]))

    def ball_p(self, j: int, i: int) -> EdgeInterval:
        """``B(w_j) ∩ v_i v_{i+1}``."""
        lo = self.sp[j, i]
        return NULL_INTERVAL if lo != lo else EdgeInterval(float(lo), float(self.ep[j, i]))


@dataclass
class Frontier:
    """Initial reachability: ``R[0][j]`` for every ``j`` and ``R'[0][i]`` for every ``i``."""

    row_intervals: List[EdgeInterval]
    col_intervals: List[EdgeInterval]


@dataclass
class DecisionResult:
    """Outcome of a decision query.

    ``rows[i][j]`` and ``cols[j][i]`` hold every ``R[i][j]`` and ``R'[j][i]``
    when the decision ran in debug mode.
    """

    reachable: bool
    rows: Optional[list] = None
    cols: Optional[list] = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.reachable = bool(self.reachable)

    def __bool__(self) -> bool:
        return self.reachable


def _init_chain(balls: List[EdgeInterval]) -> List[EdgeInterval]:
    out = []
    alive = True
    for k, iv in enumerate(balls):
        # the first vertex must cover the whole curve prefix up to this edge
        alive = alive and iv.lo == 0.0 and (k == 0 or out[-1].hi == 1.0)
        out.append(EdgeInterval(0.0, iv.hi) if alive else NULL_INTERVAL)
    return out


def init_frontiers(tau, sigma, delta: float, space: Optional[FreeSpace] = None) -> Frontier:
    """Reachability intervals of ``v_0`` on ``sigma``'s edges and of ``w_0`` on ``tau``'s."""
    fs = space if space is not None else FreeSpace(tau, sigma, delta)
    rows = _init_chain([fs.ball(0, j) for j in range(fs.m - 1)])
    cols = _init_chain([fs.ball_p(0, i) for i in range(fs.n - 1)])
    return Frontier(rows, cols)


def _advance(ell, ball: EdgeInterval):
    """First point of ``ball`` not in front of ``ell``, or ``None``."""
    if ball.lo is None:
        return None
    if ball.lo <= ell:
        return ell if ell <= ball.hi else None
    return ball.lo


def propagate_cell(
    r_low: EdgeInterval,
    r_left: EdgeInterval,
    top_ball: EdgeInterval,
    right_ball: EdgeInterval,
) -> tuple:
    """Reachability on the upper and right sides of one cell.

    Parameters
    ----------
    r_low, r_left : EdgeInterval
        ``R[i][j]`` and ``R'[j][i]``.
    top_ball, right_ball : EdgeInterval
        ``B(v_{i+1}) ∩ w_j w_{j+1}`` and ``B(w_{j+1}) ∩ v_i v_{i+1}``.

    Returns
    -------
    (R[i+1][j], R'[j+1][i])
    """
    if not r_left.is_null:
        top = top_ball
    elif not r_low.is_null:
        ell = _advance(r_low.lo, top_ball)
        top = NULL_INTERVAL if ell is None else EdgeInterval(ell, top_ball.hi)
    else:
        top = NULL_INTERVAL
    if not r_low.is_null:
        right = right_ball
    elif not r_left.is_null:
        ell = _advance(r_left.lo, right_ball)
        right = NULL_INTERVAL if ell is None else EdgeInterval(ell, right_ball.hi)
    else:
        right = NULL_INTERVAL
    return top, right


def _degenerate_decide(tau: Curve, sigma: Curve, delta: float) -> bool:
    # a single vertex is matched against every point of the other curve
    a, b = (tau, sigma) if len(tau) == 1 else (sigma, tau)
    diff = b.vertices - a.vertices[0]
    return bool(np.all(np.sum(diff * diff, axis=1) <= delta * delta))


def naive_decide(tau, sigma, delta: float, debug: bool = False, space: Optional[FreeSpace] = None) -> DecisionResult:
    """Decide ``d_F(tau, sigma) <= delta`` with the quadratic reachability DP.

    In debug mode every ``R[i][j]`` and ``R'[j][i]`` is kept on the result;
    otherwise a single rolling row is used and the sweep stops as soon as
    nothing above the current row can be reached.
    """
    tau, sigma = as_curve(tau), as_curve(sigma)
    if len(tau) == 1 or len(sigma) == 1:
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        return DecisionResult(_degenerate_decide(tau, sigma, float(delta)))
    fs = space if space is not None else FreeSpace(tau, sigma, delta)
    if debug:
        return _decide_debug(fs)
    n, m = fs.n, fs.m
    spT, epT = fs.sp.T, fs.ep.T
    front = init_frontiers(tau, sigma, delta, fs)
    bottom = [iv.lo for iv in front.row_intervals]
    entry = [iv.lo for iv in front.col_intervals]
    last_entry = max((i for i, x in enumerate(entry) if x is not None), default=-1)

    for i in range(n - 1):
        if i > last_entry and all(x is None for x in bottom):
            return DecisionResult(False)
        s_next, e_next = row_list(fs.s[i + 1]), row_list(fs.e[i + 1])
        sp_row, ep_row = row_list(spT[i]), row_list(epT[i])
        left = entry[i]
        for j in range(m - 1):
            low = bottom[j]
            if left is not None:
                top = s_next[j]
            elif low is not None:
                s = s_next[j]
                if s is None:
                    top = None
                elif s <= low:
                    top = low if low <= e_next[j] else None
                else:
                    top = s
            else:
                top = None
            if low is not None:
                left = sp_row[j + 1]
            elif left is not None:
                s = sp_row[j + 1]
                if s is None:
                    left = None
                elif s <= left:
                    left = left if left <= ep_row[j + 1] else None
                else:
                    left = s
            bottom[j] = top
    return DecisionResult(bottom[m - 2] is not None and fs.e[n - 1, m - 2] == 1.0)


def _decide_debug(fs: FreeSpace) -> DecisionResult:
    n, m = fs.n, fs.m
    front = init_frontiers(fs.tau, fs.sigma, fs.delta, fs)
    rows = [front.row_intervals] + [[None] * (m - 1) for _ in range(n - 1)]
    cols = [front.col_intervals] + [[None] * (n - 1) for _ in range(m - 1)]
    for i in range(n - 1):
        for j in range(m - 1):
            top, right = propagate_cell(rows[i][j], cols[j][i], fs.ball(i + 1, j), fs.ball_p(j + 1, i))
            rows[i + 1][j] = top
            cols[j + 1][i] = right
    last = rows[n - 1][m - 2]
    return DecisionResult(last.contains(1.0), rows=rows, cols=cols)
