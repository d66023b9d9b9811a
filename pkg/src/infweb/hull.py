"""Small 2-D convex hull toolkit with exact orientation predicates."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def orient(a, b, c) -> int:
    """Sign of the turn a -> b -> c, evaluated exactly on the float inputs."""
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def convex_hull(points) -> np.ndarray:
    """Counterclockwise hull vertices (Andrew's monotone chain)."""
    pts = sorted({(float(x), float(y)) for x, y in np.asarray(points, float).reshape(-1, 2)})
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def _point_segment(p, a, b) -> float:
    ab = b - a
    den = float(ab @ ab)
    t = 0.0 if den == 0 else min(1.0, max(0.0, float((p - a) @ ab) / den))
    return float(np.hypot(*(p - a - t * ab)))


def distance_to_hull(points, x=(0.0, 0.0)) -> float:
    """Euclidean distance from ``x`` to the convex hull of ``points``."""
    H = convex_hull(points)
    x = np.asarray(x, float)
    if len(H) == 1:
        return float(np.hypot(*(H[0] - x)))
    if len(H) == 2:
        return _point_segment(x, H[0], H[1])
    n = len(H)
    if all(orient(H[i], H[(i + 1) % n], x) >= 0 for i in range(n)):
        return 0.0
    return min(_point_segment(x, H[i], H[(i + 1) % n]) for i in range(n))


def affine_dim(points, tol: float = 1e-9) -> int:
    P = np.asarray(points, float).reshape(-1, 2)
    if len(P) == 0:
        return -1
    s = np.linalg.svd(P - P[0], compute_uv=False) if len(P) > 1 else np.zeros(1)
    return int(np.sum(s > tol))


def contains_origin(points, tol: float = 1e-9) -> bool:
    """True iff the origin lies in conv(points), up to ``tol`` in distance.

    The interior test is exact; ``tol`` only absorbs rounding in inputs that
    should sit exactly on a hull edge (e.g. two antipodal unit vectors).
    """
    return distance_to_hull(points) <= tol


def barycentric(p, tri) -> np.ndarray:
    A = np.vstack([np.asarray(tri, float).T, np.ones(3)])
    return np.linalg.solve(A, np.array([p[0], p[1], 1.0]))
