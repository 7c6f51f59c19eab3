"""Deterministic sample points on the slit tangent bundle.

Base points are drawn uniformly in the ball |x| <= radius (default 0.7,
inside the domain of the ball metrics), fiber vectors uniformly on the
unit sphere with a guard against numerically tiny |y|.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .jets import JetContext


def sample_points(
    n: int, count: int, seed: int = 0, radius: float = 0.7
) -> list[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(seed)
    out: list[tuple[np.ndarray, np.ndarray]] = []
    while len(out) < count:
        x = rng.uniform(-1.0, 1.0, size=n)
        if np.linalg.norm(x) > 1.0:
            continue
        x = x * radius
        y = rng.normal(size=n)
        norm = np.linalg.norm(y)
        if norm < 1e-3:
            continue
        out.append((x, y / norm))
    return out


def sample_contexts(
    n: int, count: int, seed: int = 0, radius: float = 0.7, order: int = 7
) -> list[JetContext]:
    return [
        JetContext.at(x, y, order=order) for x, y in sample_points(n, count, seed, radius)
    ]


def contexts_at(points: Sequence[tuple[np.ndarray, np.ndarray]], order: int) -> list[JetContext]:
    return [JetContext.at(x, y, order=order) for x, y in points]
