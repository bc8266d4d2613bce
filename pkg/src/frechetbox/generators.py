"""Seeded curve generators for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .geometry import Curve, as_curve

__all__ = ["random_walk", "perturbed_copy", "zigzag"]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_walk(n: int, dim: int = 2, seed=None, step: float = 1.0) -> Curve:
    """Walk of ``n`` vertices starting at the origin with steps of length ``step``."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(seed)
    dirs = rng.normal(size=(n - 1, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = np.vstack([np.zeros((1, dim)), np.cumsum(step * dirs, axis=0)])
    return Curve(pts)


def perturbed_copy(curve, noise: float = 0.1, seed=None) -> Curve:
    """Copy of ``curve`` with i.i.d. Gaussian noise of scale ``noise`` on every coordinate."""
    v = as_curve(curve).vertices
    rng = _rng(seed)
    return Curve(v + rng.normal(scale=noise, size=v.shape))


def zigzag(n: int, amplitude: float = 1.0, period: float = 1.0, dim: int = 2) -> Curve:
    """Vertices alternating between ``+amplitude`` and ``-amplitude`` while advancing by ``period``.

    Many parallel, nearly equal edges make ball intersections crowd together,
    which stresses the tie handling.
    """
    if n < 1:
        raise ValueError("n must be positive")
    pts = np.zeros((n, dim))
    pts[:, 0] = period * np.arange(n)
    if dim > 1:
        pts[:, 1] = amplitude * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return Curve(pts)
