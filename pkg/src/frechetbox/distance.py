"""Fréchet distance from a decision procedure, and the discrete baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .freespace import naive_decide
from .geometry import as_curve

__all__ = [
    "CapExceededError",
    "DistanceResult",
    "discrete_frechet",
    "critical_values",
    "compute_exact",
    "compute_bisect",
    "DEFAULT_EPS",
    "DEFAULT_CAP",
]

DEFAULT_EPS = 1e-9
DEFAULT_CAP = 10**7
# candidates sit exactly on a tangency; a relative nudge absorbs rounding there
EXACT_SLACK = 1e-12


class CapExceededError(ValueError):
    """Critical-value enumeration would be too large; use bisection instead."""


@dataclass
class DistanceResult:
    """A computed distance and the decisions that bracket it.

    ``certificate`` maps ``"lower"`` to the largest value decided false (or
    ``None`` if no such value was tested) and ``"upper"`` to the returned
    value, which was decided true.  ``brackets`` lists every ``(lo, hi)``
    visited by bisection.
    """

    value: float
    mode: str
    certificate: dict
    decisions: int = 0
    brackets: list = field(default_factory=list)

    def __float__(self) -> float:
        return self.value


def discrete_frechet(tau, sigma) -> float:
    """Discrete Fréchet distance over vertex couplings.

    Evaluated one anti-diagonal at a time, since cell ``(i, j)`` depends only
    on cells with ``i + j`` one or two smaller.

    >>> discrete_frechet([[0, 0], [1, 0]], [[0, 1], [1, 1]])
    1.0
    """
    p = as_curve(tau).vertices
    q = as_curve(sigma).vertices
    n, m = len(p), len(q)
    inf = np.inf
    prev2 = np.full(n, inf)
    prev = np.full(n, inf)
    prev[0] = float(np.sqrt(np.sum((p[0] - q[0]) ** 2)))
    for k in range(1, n + m - 1):
        lo, hi = max(0, k - m + 1), min(k, n - 1)
        i = np.arange(lo, hi + 1)
        d = np.sqrt(np.sum((p[i] - q[k - i]) ** 2, axis=1))
        best = prev[i]  # (i, j - 1)
        im = i - 1
        ok = im >= 0
        down = np.where(ok, prev[np.maximum(im, 0)], inf)  # (i - 1, j)
        diag = np.where(ok, prev2[np.maximum(im, 0)], inf)  # (i - 1, j - 1)
        cur = np.full(n, inf)
        cur[i] = np.maximum(d, np.minimum(np.minimum(best, down), diag))
        prev2, prev = prev, cur
    return float(prev[n - 1])


def _vertex_edge_distances(pts, starts, ends):
    u = ends - starts
    w = pts[:, None, :] - starts[None, :, :]
    t = np.clip(np.sum(w * u[None], axis=2) / np.sum(u * u, axis=1)[None, :], 0.0, 1.0)
    foot = starts[None] + t[..., None] * u[None]
    return np.sqrt(np.sum((pts[:, None, :] - foot) ** 2, axis=2)).ravel()


def _bisector_values(pts, starts, ends):
    out = []
    k, l = np.triu_indices(len(pts), 1)
    vk, vl = pts[k], pts[l]
    diff = vk - vl
    for p, q in zip(starts, ends):
        u = q - p
        den = 2.0 * (diff @ u)
        num = np.sum((vk - p) ** 2, axis=1) - np.sum((vl - p) ** 2, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = num / den
        ok = (den != 0.0) & (t >= 0.0) & (t <= 1.0)
        if np.any(ok):
            x = p + t[ok, None] * u
            out.append(np.sqrt(np.sum((x - vk[ok]) ** 2, axis=1)))
    return np.concatenate(out) if out else np.empty(0)


def critical_values(tau, sigma, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Sorted, deduplicated candidate values for the Fréchet distance.

    Contains the two endpoint distances, every vertex-to-edge distance in both
    directions, and for every pair of vertices of one curve and every edge of
    the other, the distance from those vertices to the point of the edge
    equidistant from both (when that point lies on the edge).

    Raises
    ------
    CapExceededError
        If ``n * m * (n + m)`` exceeds ``cap``.
    """
    p = as_curve(tau).vertices
    q = as_curve(sigma).vertices
    n, m = len(p), len(q)
    if n * m * (n + m) > cap:
        raise CapExceededError(
            f"critical-value enumeration for n={n}, m={m} exceeds the cap {cap}; use bisection"
        )
    parts = [np.array([np.linalg.norm(p[0] - q[0]), np.linalg.norm(p[-1] - q[-1])])]
    if m > 1:
        parts.append(_vertex_edge_distances(p, q[:-1], q[1:]))
        parts.append(_bisector_values(p, q[:-1], q[1:]))
    if n > 1:
        parts.append(_vertex_edge_distances(q, p[:-1], p[1:]))
        parts.append(_bisector_values(q, p[:-1], p[1:]))
    return np.unique(np.concatenate(parts))


def _decide(decider, tau, sigma, delta) -> bool:
    return bool(decider(tau, sigma, delta))


def compute_exact(tau, sigma, decider: Optional[Callable] = None, cap: int = DEFAULT_CAP) -> DistanceResult:
    """Smallest critical value accepted by ``decider``, found by binary search.

    Each candidate ``c`` is tested at ``c * (1 + 1e-12)`` so that rounding at
    the tangency that defines ``c`` cannot reject it.
    """
    decider = decider or naive_decide
    tau, sigma = as_curve(tau), as_curve(sigma)
    cands = critical_values(tau, sigma, cap)
    calls = 0

    def ok(c):
        nonlocal calls
        calls += 1
        return _decide(decider, tau, sigma, c * (1.0 + EXACT_SLACK))

    lo, hi = 0, len(cands) - 1
    if not ok(cands[hi]):
        raise RuntimeError("decider rejected the largest critical value")
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    lower = float(cands[lo - 1]) if lo > 0 else None
    return DistanceResult(float(cands[lo]), "exact", {"lower": lower, "upper": float(cands[lo])}, calls)


def compute_bisect(tau, sigma, decider: Optional[Callable] = None, eps: float = DEFAULT_EPS) -> DistanceResult:
    """Bisection between the endpoint lower bound and the discrete upper bound.

    Returns the upper end of the final bracket, which is at most ``eps`` above
    the lower end.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    decider = decider or naive_decide
    tau, sigma = as_curve(tau), as_curve(sigma)
    p, q = tau.vertices, sigma.vertices
    lo = float(max(np.linalg.norm(p[0] - q[0]), np.linalg.norm(p[-1] - q[-1])))
    calls = 1
    if _decide(decider, tau, sigma, lo):
        return DistanceResult(lo, "bisection", {"lower": None, "upper": lo}, calls, [(lo, lo)])
    hi = discrete_frechet(tau, sigma)
    # the discrete value may sit one rounding step short of a vertex-to-vertex tangency
    for _ in range(8):
        calls += 1
        if _decide(decider, tau, sigma, hi):
            break
        hi = hi * (1.0 + EXACT_SLACK) + 1e-300
    else:
        raise RuntimeError("decider rejected the discrete Fréchet distance")
    brackets = [(lo, hi)]
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        calls += 1
        if _decide(decider, tau, sigma, mid):
            hi = mid
        else:
            lo = mid
        brackets.append((lo, hi))
    return DistanceResult(hi, "bisection", {"lower": lo, "upper": hi}, calls, brackets)
