"""Planar geometry helpers for loop analysis.

Loops are closed polylines given as coordinate arrays whose last node
repeats the first.  Everything here treats them as plain polygons; the
physical axes (sample size, variance, stimulus) are the callers' business.
"""

from __future__ import annotations

import numpy as np
import shapely

from .errors import InvalidStateError


def shoelace_area(x: np.ndarray, y: np.ndarray) -> float:
    """Signed area of a closed polyline; positive means counterclockwise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Counterclockwise convex hull by the monotone-chain sweep.

    Returns the hull vertices without a closing repeat.  Collinear points
    are dropped, so the result can have fewer vertices than the input.
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] < 3:
        raise InvalidStateError("convex hull needs at least 3 distinct points")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(seq):
        chain: list[np.ndarray] = []
        for p in seq:
            while len(chain) >= 2:
                o, a = chain[-2], chain[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) > 0:
                    break
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:
        raise InvalidStateError("input points are collinear")
    return hull


def is_simple_loop(x: np.ndarray, y: np.ndarray) -> bool:
    """True when the closed polyline has no self-intersection.

    A loop that degenerates to a single point counts as simple.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scale = max(np.ptp(x), np.ptp(y))
    if scale == 0.0:
        return True
    coords = np.column_stack([x, y])
    return bool(shapely.LineString(coords).is_simple)


def _point_in_triangle(p, a, b, c, eps):
    d1 = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    d2 = (c[0] - b[0]) * (p[1] - b[1]) - (c[1] - b[1]) * (p[0] - b[0])
    d3 = (a[0] - c[0]) * (p[1] - c[1]) - (a[1] - c[1]) * (p[0] - c[0])
    return d1 > eps and d2 > eps and d3 > eps


def ear_clip(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Triangulate a simple polygon by ear clipping.

    Accepts the closed polyline (last node equal to the first) in either
    orientation and returns a triangle stack of shape (n - 2, 3, 2) that
    partitions the interior.  Collinear vertices are pruned first; they
    carry no area.
    """
    x = np.asarray(x, dtype=float)[:-1]
    y = np.asarray(y, dtype=float)[:-1]
    if shoelace_area(np.append(x, x[0]), np.append(y, y[0])) < 0:
        x, y = x[::-1], y[::-1]
    pts = np.column_stack([x, y])
    scale = max(np.ptp(x), np.ptp(y), 1e-300)
    eps = 1e-12 * scale * scale

    idx = list(range(len(pts)))
    # prune exact duplicates and collinear runs
    changed = True
    while changed and len(idx) > 3:
        changed = False
        for k in range(len(idx)):
            a = pts[idx[k - 1]]
            b = pts[idx[k]]
            c = pts[idx[(k + 1) % len(idx)]]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if abs(cross) <= eps:
                del idx[k]
                changed = True
                break

    if len(idx) < 3:
        raise InvalidStateError("polygon has no area to triangulate")

    tris: list[np.ndarray] = []
    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 4 * len(pts) * len(pts):
            raise InvalidStateError("ear clipping failed; is the loop simple?")
        clipped = False
        for k in range(len(idx)):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = pts[i0], pts[i1], pts[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= eps:
                continue
            blocked = any(
                _point_in_triangle(pts[j], a, b, c, -eps)
                for j in idx if j not in (i0, i1, i2)
            )
            if not blocked:
                tris.append(np.stack([a, b, c]))
                del idx[k]
                clipped = True
                break
        if not clipped:
            raise InvalidStateError("ear clipping failed; is the loop simple?")
    tris.append(np.stack([pts[idx[0]], pts[idx[1]], pts[idx[2]]]))
    return np.stack(tris)
