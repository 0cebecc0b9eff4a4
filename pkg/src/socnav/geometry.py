"""Planar geometry kernel shared by scene generation, simulation, and checks.

Scalar routines use plain floats so single-point queries stay cheap and
bit-deterministic; the grid variants take numpy arrays for rasterization.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

Point = tuple[float, float]


def dist(ax: float, ay: float, bx: float, by: float) -> float:
    return math.hypot(bx - ax, by - ay)


def point_in_polygon(x: float, y: float, vertices: Sequence[Point]) -> bool:
    """Even-odd test; points exactly on the boundary are not guaranteed inside."""
    inside = False
    x1, y1 = vertices[-1]
    for x2, y2 in vertices:
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
        x1, y1 = x2, y2
    return inside


def segment_distance(px: float, py: float, ax: float, ay: float,
                     bx: float, by: float) -> float:
    """Distance from point (px, py) to the closed segment a-b."""
    qx, qy = closest_point_on_segment(px, py, ax, ay, bx, by)
    return math.hypot(px - qx, py - qy)


def closest_point_on_segment(px: float, py: float, ax: float, ay: float,
                             bx: float, by: float) -> Point:
    dx, dy = bx - ax, by - ay
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return (ax, ay)
    t = ((px - ax) * dx + (py - ay) * dy) / length_sq
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return (ax + t * dx, ay + t * dy)


def polygon_boundary_distance(x: float, y: float, vertices: Sequence[Point]) -> float:
    """Distance from a point to the polygon outline (sides, not interior)."""
    best = math.inf
    x1, y1 = vertices[-1]
    for x2, y2 in vertices:
        d = segment_distance(x, y, x1, y1, x2, y2)
        if d < best:
            best = d
        x1, y1 = x2, y2
    return best


def closest_point_on_polygon(x: float, y: float, vertices: Sequence[Point]) -> Point:
    best = math.inf
    best_point = vertices[0]
    x1, y1 = vertices[-1]
    for x2, y2 in vertices:
        qx, qy = closest_point_on_segment(x, y, x1, y1, x2, y2)
        d = math.hypot(x - qx, y - qy)
        if d < best:
            best = d
            best_point = (qx, qy)
        x1, y1 = x2, y2
    return best_point


def signed_area(vertices: Sequence[Point]) -> float:
    """Shoelace area; positive for counterclockwise vertex order."""
    total = 0.0
    x1, y1 = vertices[-1]
    for x2, y2 in vertices:
        total += x1 * y2 - x2 * y1
        x1, y1 = x2, y2
    return 0.5 * total


def is_convex(vertices: Sequence[Point], tol: float = 1e-12) -> bool:
    """Convexity in either winding direction; degenerate (zero-area) fails."""
    n = len(vertices)
    if n < 3 or signed_area(vertices) == 0.0:
        return False
    sign = 1.0 if signed_area(vertices) > 0.0 else -1.0
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        cx, cy = vertices[(i + 2) % n]
        cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
        if sign * cross < -tol:
            return False
    return True


def polygon_mask(px: np.ndarray, py: np.ndarray,
                 vertices: Sequence[Point]) -> np.ndarray:
    """Vectorized even-odd test over a grid of query points."""
    inside = np.zeros(px.shape, dtype=bool)
    x1, y1 = vertices[-1]
    for x2, y2 in vertices:
        crosses = (y1 > py) != (y2 > py)
        denom = y2 - y1
        safe = denom if denom != 0.0 else 1.0
        xi = x1 + (py - y1) * (x2 - x1) / safe
        inside ^= crosses & (px < xi)
        x1, y1 = x2, y2
    return inside
