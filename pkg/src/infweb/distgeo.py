"""Distance to the boundary and the geometry of its singularities.

For a point ``x`` of the closed domain this module computes the distance
``d(x)``, the full set of nearest boundary points, the reachable gradients
``(x - q) / d(x)`` and the superdifferential (their convex hull). On top of
that it extracts point clouds for the cut locus (closure of the singular set)
and the high ridge (where ``d`` attains the inradius) and compares them.

Convex polygons are handled exactly through their straight skeleton, which
coincides with the medial axis for convex shapes. Disks and stadiums have
closed forms. Non-convex polygons fall back to grid scans and every object
produced for them is flagged ``exact=False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from . import hull
from .domains import Disk, Domain, Point, Polygon, Stadium, as_point, segment_distance
from .errors import OutsideDomain

ANGLE_TOL = 1e-6
PROJ_TOL = 1e-10
ON_BOUNDARY = 1e-12


@dataclass(frozen=True)
class Arc:
    """Circular arc ``center + radius * (cos s, sin s)`` for ``s`` in ``[start, stop]``.

    Used to encode projection sets (and gradient sets) that are continua.
    """

    center: Point
    radius: float
    start: float
    stop: float

    @property
    def span(self) -> float:
        return self.stop - self.start

    @property
    def full(self) -> bool:
        return self.span >= 2 * math.pi - 1e-12

    def sample(self, n: int) -> np.ndarray:
        s = np.linspace(self.start, self.stop, n, endpoint=not self.full)
        return np.asarray(self.center) + self.radius * np.column_stack([np.cos(s), np.sin(s)])


PointSet = Union[tuple[Point, ...], Arc]


@dataclass(frozen=True)
class DistanceEval:
    point: Point
    value: float
    projections: PointSet
    grads: PointSet

    @property
    def is_singular(self) -> bool:
        if self.value <= 0:
            return False
        return isinstance(self.grads, Arc) or len(self.grads) >= 2

    @property
    def gradient(self) -> np.ndarray | None:
        """The gradient of ``d`` at a regular point, ``None`` otherwise."""
        if self.is_singular or self.value <= 0:
            return None
        return np.asarray(self.grads[0])


@dataclass(frozen=True)
class Superdifferential:
    extremals: PointSet
    hull_contains_zero: bool
    dim: int

    def contains(self, p, tol: float = 1e-12) -> bool:
        p = np.asarray(p, float)
        if isinstance(self.extremals, Arc):
            if self.extremals.full:
                return float(np.hypot(*p)) <= 1 + tol
            ring = self.extremals.sample(721)
            return hull.distance_to_hull(np.vstack([ring]), p) <= 1e-6
        return hull.distance_to_hull(np.asarray(self.extremals), p) <= tol


@dataclass
class GateReport:
    rho: float
    cut_points: np.ndarray
    high_points: np.ndarray
    hausdorff: float
    verdict: bool
    sampling_step: float
    exact: bool = True
    symmetric: bool = True


def _canonical(vectors) -> tuple[Point, ...]:
    """Deduplicate unit vectors within ANGLE_TOL and order them by (y, x)."""
    kept: list[np.ndarray] = []
    for v in vectors:
        v = np.asarray(v, float)
        if all(abs(math.atan2(_cross2(v, w), float(v @ w))) > ANGLE_TOL for w in kept):
            kept.append(v)
    kept.sort(key=lambda v: (round(v[1], 9), round(v[0], 9)))
    return tuple(Point(float(v[0]), float(v[1])) for v in kept)


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _check_closure(domain: Domain, x: Point) -> float:
    if not (domain.contains(x)[0] or domain.boundary_distance(x)[0] <= ON_BOUNDARY):
        raise OutsideDomain(f"{tuple(x)} is outside {domain.label}")
    return float(domain.boundary_distance(x)[0])


def _polygon_projections(poly: Polygon, x: np.ndarray):
    A, B = poly.edges()
    feet = []
    for a, b in zip(A, B):
        ab = b - a
        t = min(1.0, max(0.0, float((x - a) @ ab) / float(ab @ ab)))
        q = a + t * ab
        feet.append((float(np.hypot(*(x - q))), q))
    value = min(f[0] for f in feet)
    proj: list[np.ndarray] = []
    for dist, q in feet:
        if dist - value <= PROJ_TOL and all(np.hypot(*(q - p)) > PROJ_TOL for p in proj):
            proj.append(q)
    return value, proj


def distance(domain: Domain, x) -> DistanceEval:
    """Distance to the boundary with its projection set and reachable gradients.

    Raises:
        OutsideDomain: if ``x`` is not in the closed domain.
    """
    x = as_point(x)
    _check_closure(domain, x)
    xa = np.asarray(x)
    if isinstance(domain, Disk):
        c = np.asarray(domain.center)
        s = float(np.hypot(*(xa - c)))
        value = max(domain.radius - s, 0.0)
        if s < ON_BOUNDARY:
            return DistanceEval(
                x, value, Arc(domain.center, domain.radius, 0.0, 2 * math.pi),
                Arc(Point(0.0, 0.0), 1.0, 0.0, 2 * math.pi),
            )
        proj = [c + domain.radius * (xa - c) / s]
    elif isinstance(domain, Stadium):
        a, b = np.asarray(domain.a), np.asarray(domain.b)
        ab = b - a
        length = float(np.hypot(*ab))
        u = ab / length
        n = np.array([-u[1], u[0]])
        t = float((xa - a) @ u)
        foot = a + min(length, max(0.0, t)) * u
        s = float(np.hypot(*(xa - foot)))
        value = max(domain.r - s, 0.0)
        if s >= ON_BOUNDARY:
            proj = [foot + domain.r * (xa - foot) / s]
        elif ON_BOUNDARY < t < length - ON_BOUNDARY:
            proj = [foot + domain.r * n, foot - domain.r * n]
            grads = [-n, n]
            return DistanceEval(x, value, tuple(Point(*q) for q in proj), _canonical(grads))
        else:
            # on an axis endpoint: nearest points fill the outer half of the cap
            theta_n = math.atan2(n[1], n[0])
            start = theta_n if t <= ON_BOUNDARY else theta_n + math.pi
            end = domain.a if t <= ON_BOUNDARY else domain.b
            return DistanceEval(
                x, value, Arc(end, domain.r, start, start + math.pi),
                Arc(Point(0.0, 0.0), 1.0, start + math.pi, start + 2 * math.pi),
            )
    else:
        value, proj = _polygon_projections(domain, xa)
    projections = tuple(Point(float(q[0]), float(q[1])) for q in proj)
    if value <= 0:
        return DistanceEval(x, 0.0, projections, ())
    grads = _canonical([(xa - q) / np.hypot(*(xa - q)) for q in proj])
    return DistanceEval(x, value, projections, grads)


def distance_values(domain: Domain, points) -> np.ndarray:
    """Vectorized ``d(x)`` (no projection sets); zero outside the domain."""
    P = np.atleast_2d(np.asarray(points, float))
    d = domain.boundary_distance(P)
    return np.where(domain.contains(P), d, 0.0)


def superdifferential(domain: Domain, x) -> Superdifferential:
    ev = distance(domain, x)
    if ev.value <= 0:
        raise OutsideDomain(f"{tuple(ev.point)} is on the boundary; d = 0")
    g = ev.grads
    if isinstance(g, Arc):
        return Superdifferential(g, g.span >= math.pi - 1e-12, 2)
    return Superdifferential(g, hull.contains_origin(np.asarray(g)), hull.affine_dim(g))


# ---------------------------------------------------------------------------
# straight skeleton of a convex polygon


@dataclass(frozen=True)
class Skeleton:
    segments: tuple[tuple[np.ndarray, np.ndarray], ...]
    rho: float
    high: np.ndarray  # one point, or the two ends of a segment


def _offset_vertex(lines, p, q, t):
    (n1, c1), (n2, c2) = lines[p], lines[q]
    M = np.array([n1, n2])
    return np.linalg.solve(M, np.array([c1 + t, c2 + t]))


def convex_skeleton(poly: Polygon) -> Skeleton:
    """Medial axis of a convex polygon by shrinking its edges at unit speed."""
    if not poly.convex:
        raise ValueError("convex_skeleton needs a convex polygon")
    A, B = poly.edges()
    lines = []
    for a, b in zip(A, B):
        e = (b - a) / np.hypot(*(b - a))
        nrm = np.array([-e[1], e[0]])
        if lines and abs(_cross2(lines[-1][0], nrm)) < 1e-14 and lines[-1][0] @ nrm > 0:
            continue  # collinear continuation of the previous edge
        lines.append((nrm, float(nrm @ a)))
    if len(lines) > 3 and abs(_cross2(lines[0][0], lines[-1][0])) < 1e-14 and lines[0][0] @ lines[-1][0] > 0:
        lines.pop()
    scale = max(1.0, float(np.abs(poly.array).max()))
    active = list(range(len(lines)))
    t_now = 0.0
    segments = []
    while True:
        k = len(active)
        verts = [_offset_vertex(lines, active[j - 1], active[j], t_now) for j in range(k)]
        probe = [_offset_vertex(lines, active[j - 1], active[j], t_now + 1.0) for j in range(k)]
        times = []
        for j in range(k):
            nrm = lines[active[j]][0]
            e = np.array([nrm[1], -nrm[0]])
            l0 = float((verts[(j + 1) % k] - verts[j]) @ e)
            rate = float((probe[(j + 1) % k] - verts[(j + 1) % k]) @ e - (probe[j] - verts[j]) @ e)
            times.append(t_now - l0 / rate if rate < 0 else math.inf)
        t_star = min(times)
        collapsing = {j for j in range(k) if times[j] <= t_star + 1e-12 * scale}
        ends = [_offset_vertex(lines, active[j - 1], active[j], t_star) for j in range(k)]
        for v0, v1 in zip(verts, ends):
            if np.hypot(*(v1 - v0)) > 0:
                segments.append((v0, v1))
        remaining = [active[j] for j in range(k) if j not in collapsing]
        done = len(remaining) < 3
        if not done:
            rv = np.array([_offset_vertex(lines, remaining[j - 1], remaining[j], t_star)
                           for j in range(len(remaining))])
            area2 = abs(float(np.sum(rv[:, 0] * np.roll(rv[:, 1], -1) - rv[:, 1] * np.roll(rv[:, 0], -1))))
            done = area2 <= 1e-20 * scale**2
        if done:
            uniq: list[np.ndarray] = []
            for v in ends:
                if all(np.hypot(*(v - w)) > 1e-9 * scale for w in uniq):
                    uniq.append(v)
            H = np.array(uniq)
            if len(H) > 2:  # collinear leftovers: keep the extreme pair
                dmat = np.hypot(*(H[:, None, :] - H[None, :, :]).transpose(2, 0, 1))
                i, j = np.unravel_index(np.argmax(dmat), dmat.shape)
                H = H[[i, j]]
            if len(H) == 2:
                segments.append((H[0], H[1]))
            return Skeleton(tuple(segments), t_star, H)
        active = remaining
        t_now = t_star


def _sample_segment(a, b, step, include_start=True) -> np.ndarray:
    n = max(1, math.ceil(float(np.hypot(*(b - a))) / step))
    s = np.linspace(0.0, 1.0, n + 1)
    if not include_start:
        s = s[1:]
    return a + s[:, None] * (b - a)


def _dedup(P: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    if len(P) == 0:
        return P.reshape(0, 2)
    key = np.round(P / max(tol, 1e-15)).astype(np.int64) if tol > 0 else P
    _, idx = np.unique(key, axis=0, return_index=True)
    Q = P[np.sort(idx)]
    order = np.lexsort((Q[:, 1], Q[:, 0]))
    return Q[order]


def _grid_scan(domain: Polygon, step: float):
    (x0, x1), (y0, y1) = domain.bbox
    xs = np.arange(x0, x1 + step, step)
    ys = np.arange(y0, y1 + step, step)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    return P[domain.contains(P)]


def inradius(domain: Domain) -> tuple[float, Point]:
    """Inradius ``max d`` and a point attaining it."""
    if isinstance(domain, Disk):
        return domain.radius, domain.center
    if isinstance(domain, Stadium):
        mid = Point((domain.a.x + domain.b.x) / 2, (domain.a.y + domain.b.y) / 2)
        return domain.r, mid
    if domain.convex:
        sk = convex_skeleton(domain)
        w = sk.high.mean(axis=0)
        return float(sk.rho), Point(float(w[0]), float(w[1]))
    # non-convex: coarse scan then local polish
    (x0, x1), (y0, y1) = domain.bbox
    step = max(x1 - x0, y1 - y0) / 200
    P = _grid_scan(domain, step)
    d = domain.boundary_distance(P)
    best = P[np.argmax(d)]
    res = minimize(lambda z: -domain.boundary_distance(z)[0], best, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    z = res.x if domain.contains(res.x)[0] and -res.fun >= d.max() else best
    return float(domain.boundary_distance(z)[0]), Point(float(z[0]), float(z[1]))


def _polygon_is_singular_scan(domain: Polygon, P: np.ndarray, step: float) -> np.ndarray:
    A, B = domain.edges()
    dists, feet = [], []
    for a, b in zip(A, B):
        ab = b - a
        t = np.clip(((P - a) @ ab) / (ab @ ab), 0, 1)
        q = a + t[:, None] * ab
        feet.append(q)
        dists.append(np.hypot(*(P - q).T))
    D = np.stack(dists, 1)
    F = np.stack(feet, 1)
    dmin = D.min(1)
    near = D <= dmin[:, None] + step
    out = np.zeros(len(P), bool)
    for i in np.nonzero(near.sum(1) >= 2)[0]:
        Q = F[i][near[i]]
        spread = np.hypot(*(Q[:, None, :] - Q[None, :, :]).transpose(2, 0, 1)).max()
        out[i] = spread > 2 * step
    return out


def singular_set(domain: Domain, step: float) -> np.ndarray:
    """Point cloud sampling the singular set at spacing at most ``step``."""
    if step <= 0:
        raise ValueError("step must be positive")
    if isinstance(domain, Disk):
        return np.array([domain.center], dtype=float)
    if isinstance(domain, Stadium):
        return _sample_segment(np.asarray(domain.a), np.asarray(domain.b), step)
    if not domain.convex:
        P = _grid_scan(domain, step)
        return _dedup(P[_polygon_is_singular_scan(domain, P, step)])
    sk = convex_skeleton(domain)
    clouds = [_sample_segment(a, b, step) for a, b in sk.segments]
    P = _dedup(np.vstack(clouds))
    keep = np.array([
        domain.contains(p)[0] and len(distance(domain, p).grads) >= 2 for p in P
    ])
    return P[keep]


def high_ridge(domain: Domain, step: float) -> np.ndarray:
    """Point cloud sampling the set where ``d`` equals the inradius."""
    if isinstance(domain, Disk):
        return np.array([domain.center], dtype=float)
    if isinstance(domain, Stadium):
        return _sample_segment(np.asarray(domain.a), np.asarray(domain.b), step)
    if not domain.convex:
        rho, w = inradius(domain)
        P = _grid_scan(domain, step)
        d = domain.boundary_distance(P)
        return _dedup(np.vstack([P[d >= rho - step], [w]]))
    sk = convex_skeleton(domain)
    if len(sk.high) == 1:
        return sk.high.copy()
    return _sample_segment(sk.high[0], sk.high[1], step)


def hausdorff(P: np.ndarray, Q: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point clouds."""
    P = np.atleast_2d(P)
    Q = np.atleast_2d(Q)
    d_pq, _ = cKDTree(Q).query(P)
    d_qp, _ = cKDTree(P).query(Q)
    return float(max(d_pq.max(), d_qp.max()))


def gate(domain: Domain, step: float) -> GateReport:
    """Compare the sampled cut locus with the sampled high ridge."""
    rho, _ = inradius(domain)
    cut = singular_set(domain, step)
    high = high_ridge(domain, step)
    hd = hausdorff(cut, high)
    exact = not (isinstance(domain, Polygon) and not domain.convex)
    return GateReport(rho, cut, high, hd, hd <= 2 * step, step, exact=exact)


def segment_oracle_distance(domain: Polygon, points) -> np.ndarray:
    """Min over edges of point-to-segment distance (independent check)."""
    A, B = domain.edges()
    return np.min(np.stack([segment_distance(points, a, b) for a, b in zip(A, B)], 1), 1)
