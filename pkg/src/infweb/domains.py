"""Exact planar domains: polygons, disks and stadiums.

All domain objects are frozen dataclasses. Besides the scalar queries used by
:mod:`infweb.distgeo`, each exposes vectorized helpers (``contains``,
``boundary_distance``, ``ray_exit``) that the grid solver relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import DegenerateBoundary

TOL = 1e-12


class Point(NamedTuple):
    x: float
    y: float


def as_point(p) -> Point:
    x, y = (float(c) for c in p)
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ValueError(f"non-finite point {p!r}")
    return Point(x, y)


def _pts(points) -> np.ndarray:
    return np.atleast_2d(np.asarray(points, dtype=float))


def segment_distance(points, a, b) -> np.ndarray:
    """Euclidean distance from each point to the closed segment ``[a, b]``."""
    P = _pts(points)
    a = np.asarray(a, float)
    ab = np.asarray(b, float) - a
    t = np.clip(((P - a) @ ab) / (ab @ ab), 0.0, 1.0)
    diff = P - a - t[:, None] * ab
    return np.hypot(diff[:, 0], diff[:, 1])


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = _cross(p2 - p1, q1 - p1)
    d2 = _cross(p2 - p1, q2 - p1)
    d3 = _cross(q2 - q1, p1 - q1)
    d4 = _cross(q2 - q1, p2 - q1)
    if ((d1 > TOL and d2 < -TOL) or (d1 < -TOL and d2 > TOL)) and (
        (d3 > TOL and d4 < -TOL) or (d3 < -TOL and d4 > TOL)
    ):
        return True
    # touching / collinear overlap counts as a self-intersection
    for d, s, e, p in ((d1, p1, p2, q1), (d2, p1, p2, q2), (d3, q1, q2, p1), (d4, q1, q2, p2)):
        if abs(d) <= TOL and segment_distance(p, s, e)[0] <= TOL:
            return True
    return False


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with counterclockwise vertex loop."""

    vertices: tuple[Point, ...]
    label: str = "polygon"
    convex: bool = field(init=False)

    kind = "polygon"

    def __post_init__(self):
        V = self.array
        E = np.roll(V, -1, axis=0) - V
        turns = _cross(E, np.roll(E, -1, axis=0))
        object.__setattr__(self, "convex", bool(np.all(turns >= -TOL)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        V = self.array
        return V, np.roll(V, -1, axis=0)

    def area(self) -> float:
        V = self.array
        return 0.5 * float(np.sum(_cross(V, np.roll(V, -1, axis=0))))

    @property
    def bbox(self):
        V = self.array
        return (V[:, 0].min(), V[:, 0].max()), (V[:, 1].min(), V[:, 1].max())

    def boundary_distance(self, points) -> np.ndarray:
        P = _pts(points)
        A, B = self.edges()
        return np.min(
            np.stack([segment_distance(P, a, b) for a, b in zip(A, B)], axis=1), axis=1
        )

    def contains(self, points) -> np.ndarray:
        P = _pts(points)
        A, B = self.edges()
        inside = np.zeros(len(P), dtype=bool)
        x, y = P[:, 0], P[:, 1]
        for a, b in zip(A, B):
            crosses = (a[1] > y) != (b[1] > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xi = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            inside ^= crosses & (x < xi)
        return inside & (self.boundary_distance(P) > 0.0)

    def ray_exit(self, points, directions) -> np.ndarray:
        """Distance along each unit ``direction`` to the first boundary hit."""
        P = _pts(points)
        D = _pts(directions)
        best = np.full(len(P), np.inf)
        A, B = self.edges()
        for a, b in zip(A, B):
            e = b - a
            den = _cross(D, np.broadcast_to(e, D.shape))
            with np.errstate(divide="ignore", invalid="ignore"):
                t = _cross(a - P, np.broadcast_to(e, P.shape)) / den
                s = _cross(a - P, D) / den
            hit = (np.abs(den) > 1e-300) & (t > 0) & (s >= -TOL) & (s <= 1 + TOL)
            best = np.where(hit & (t < best), t, best)
        return best


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float
    label: str = "disk"

    kind = "disk"
    convex = True

    @property
    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cx + r), (cy - r, cy + r)

    def _rel(self, points):
        return _pts(points) - np.asarray(self.center)

    def boundary_distance(self, points) -> np.ndarray:
        Q = self._rel(points)
        return np.abs(self.radius - np.hypot(Q[:, 0], Q[:, 1]))

    def contains(self, points) -> np.ndarray:
        Q = self._rel(points)
        return Q[:, 0] ** 2 + Q[:, 1] ** 2 < self.radius**2

    def ray_exit(self, points, directions) -> np.ndarray:
        Q = self._rel(points)
        D = _pts(directions)
        pe = np.sum(Q * D, axis=1)
        disc = pe**2 - np.sum(Q * Q, axis=1) + self.radius**2
        return -pe + np.sqrt(np.maximum(disc, 0.0))


@dataclass(frozen=True)
class Stadium:
    """Open tubular neighbourhood of radius ``r`` around the segment ``[a, b]``."""

    a: Point
    b: Point
    r: float
    label: str = "stadium"

    kind = "stadium"
    convex = True

    @property
    def bbox(self):
        xs = (self.a.x, self.b.x)
        ys = (self.a.y, self.b.y)
        return (min(xs) - self.r, max(xs) + self.r), (min(ys) - self.r, max(ys) + self.r)

    def axis_distance(self, points) -> np.ndarray:
        return segment_distance(points, self.a, self.b)

    def boundary_distance(self, points) -> np.ndarray:
        return np.abs(self.r - self.axis_distance(points))

    def contains(self, points) -> np.ndarray:
        return self.axis_distance(points) < self.r

    def ray_exit(self, points, directions) -> np.ndarray:
        P = _pts(points)
        D = _pts(directions)
        a = np.asarray(self.a)
        ab = np.asarray(self.b) - a
        length = np.hypot(*ab)
        u = ab / length
        n = np.array([-u[1], u[0]])
        best = np.full(len(P), -np.inf)
        for c in (a, np.asarray(self.b)):
            Q = P - c
            pe = np.sum(Q * D, axis=1)
            disc = pe**2 - np.sum(Q * Q, axis=1) + self.r**2
            hi = -pe + np.sqrt(np.maximum(disc, 0.0))
            best = np.where(disc >= 0, np.maximum(best, hi), best)
        # slab intersection with the rectangle around the axis
        lo_t = np.full(len(P), -np.inf)
        hi_t = np.full(len(P), np.inf)
        for axis, lo, hi in ((u, 0.0, length), (n, -self.r, self.r)):
            p = (P - a) @ axis
            dd = D @ axis
            with np.errstate(divide="ignore", invalid="ignore"):
                t1 = (lo - p) / dd
                t2 = (hi - p) / dd
            flat = np.abs(dd) < 1e-300
            inside = (p >= lo) & (p <= hi)
            t_enter = np.where(flat, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
            t_leave = np.where(flat, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
            lo_t = np.maximum(lo_t, t_enter)
            hi_t = np.minimum(hi_t, t_leave)
        rect = lo_t <= hi_t
        return np.where(rect, np.maximum(best, hi_t), best)


Domain = Union[Polygon, Disk, Stadium]


def make_polygon(vertices: Sequence, label: str = "polygon") -> Polygon:
    """Validate a vertex loop and return it as a counterclockwise polygon.

    Raises:
        DegenerateBoundary: fewer than three vertices, repeated vertices,
            all vertices collinear, or a self-intersecting loop.
    """
    pts = [as_point(v) for v in vertices]
    if len(pts) < 3:
        raise DegenerateBoundary(f"polygon needs at least 3 vertices, got {len(pts)}")
    V = np.array(pts)
    for i in range(len(V)):
        for j in range(i + 1, len(V)):
            if np.hypot(*(V[i] - V[j])) < TOL:
                raise DegenerateBoundary(f"repeated vertex {pts[i]}")
    area2 = float(np.sum(_cross(V, np.roll(V, -1, axis=0))))
    scale = max(1.0, float(np.abs(V).max()))
    if abs(area2) <= TOL * scale**2:
        raise DegenerateBoundary("polygon vertices are collinear")
    n = len(V)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(V[i], V[(i + 1) % n], V[j], V[(j + 1) % n]):
                raise DegenerateBoundary(f"edges {i} and {j} intersect")
    if area2 < 0:
        pts = [pts[0]] + pts[:0:-1]
    return Polygon(tuple(pts), label=label)


def make_disk(center, radius: float, label: str = "disk") -> Disk:
    if not radius > 0:
        raise DegenerateBoundary(f"disk radius must be positive, got {radius}")
    return Disk(as_point(center), float(radius), label)


def make_stadium(a, b, r: float, label: str = "stadium") -> Stadium:
    a, b = as_point(a), as_point(b)
    if not r > 0:
        raise DegenerateBoundary(f"stadium radius must be positive, got {r}")
    if np.hypot(a.x - b.x, a.y - b.y) < TOL:
        raise DegenerateBoundary("stadium axis endpoints coincide")
    return Stadium(a, b, float(r), label)


def contains(domain: Domain, x) -> bool:
    """True iff ``x`` lies in the open set."""
    return bool(domain.contains(as_point(x))[0])
