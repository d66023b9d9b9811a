"""Distance estimate at singular points and its sampled verification.

At a singular point ``x0`` with ``p`` in the superdifferential of the distance
function (and ``|p| < 1``), the distance satisfies

    d(x) <= d(x0) + <p, x - x0> - K |<zeta, x - x0>| + |x - x0|^2 / (2 (d(x0) + R))

where ``p`` is written as a convex combination of reachable gradients,
``K`` is the distance from the origin to the relative boundary of the hull of
the shifted gradients and ``zeta`` is a unit vector from that hull.
``R = 0`` in general, ``R`` is the reach when the complement has positive
reach, and for convex domains the quadratic term disappears.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import hull
from .distgeo import Arc, distance, distance_values
from .domains import Domain, Point
from .errors import InvalidReach, NotInSuperdifferential, NotSingular

VARIANTS = ("generic", "positive_reach", "convex")
MEMBER_TOL = 1e-12


@dataclass(frozen=True)
class EstimateCertificate:
    x0: Point
    p: np.ndarray
    extremals: tuple[Point, ...]
    lambdas: tuple[float, ...]
    K: float
    zeta: np.ndarray
    reach: float
    variant: str
    d0: float

    def as_dict(self) -> dict:
        return {
            "x0": list(self.x0),
            "p": [float(c) for c in self.p],
            "extremals": [list(e) for e in self.extremals],
            "lambdas": list(self.lambdas),
            "K": self.K,
            "zeta": [float(c) for c in self.zeta],
            "variant": self.variant,
            "R": self.reach,
            "d0": self.d0,
        }


@dataclass
class MarginReport:
    min_margin: float
    argmin: Point
    n: int
    seed: int
    points: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)

    @property
    def margin(self) -> np.ndarray:
        return self.bound - self.d


def _facet_distance(Z: np.ndarray) -> float:
    """Distance from 0 to the relative boundary of conv(Z), 0 inside its span."""
    if len(Z) == 2:
        return float(min(np.hypot(*Z[0]), np.hypot(*Z[1])))
    dists = []
    for i in range(3):
        a, b = Z[i], Z[(i + 1) % 3]
        e = b - a
        dists.append(abs(float(a[0] * e[1] - a[1] * e[0])) / float(np.hypot(*e)))
    return float(min(dists))


def _decompose(E: np.ndarray, p: np.ndarray, idx) -> np.ndarray | None:
    """Positive convex weights of ``p`` over ``E[idx]``, or None."""
    P = E[list(idx)]
    if len(idx) == 2:
        seg = P[1] - P[0]
        L2 = float(seg @ seg)
        if L2 == 0:
            return None
        t = float((p - P[0]) @ seg) / L2
        off = p - P[0] - t * seg
        if np.hypot(*off) > 1e-12 or not (1e-12 < t < 1 - 1e-12):
            return None
        return np.array([1 - t, t])
    if abs(hull.orient(P[0], P[1], P[2])) == 0:
        return None
    try:
        lam = hull.barycentric(p, P)
    except np.linalg.LinAlgError:
        return None
    if np.all(lam > 1e-12):
        return lam
    return None


def _arc_candidates(arc: Arc, p: np.ndarray) -> list[np.ndarray]:
    """Finite set of gradients spanning ``p`` inside an arc continuum."""
    def on_arc(v):
        s = (math.atan2(v[1], v[0]) - arc.start) % (2 * math.pi)
        return arc.full or s <= arc.span + 1e-12

    out: list[np.ndarray] = []
    r = float(np.hypot(*p))
    if r < 1e-15:
        for v in (np.array([1.0, 0.0]), np.array([-1.0, 0.0])):
            if on_arc(v):
                out.append(v)
    else:
        # the diameter through p keeps every shifted gradient transversal to p
        u = p / r
        for v in (u, -u):
            if on_arc(v):
                out.append(v)
    if not arc.full:
        for s in (arc.start, arc.stop):
            out.append(np.array([math.cos(s), math.sin(s)]))
    return out


def _check_extremals(grads, given) -> np.ndarray:
    E = np.array(given, dtype=float).reshape(-1, 2)
    if np.any(np.abs(np.hypot(E[:, 0], E[:, 1]) - 1) > 1e-12):
        raise NotInSuperdifferential("extremals must be unit vectors")
    for v in E:
        if isinstance(grads, Arc):
            s = (math.atan2(v[1], v[0]) - grads.start) % (2 * math.pi)
            ok = grads.full or s <= grads.span + 1e-9
        else:
            ok = any(np.hypot(*(v - np.asarray(g))) <= 1e-9 for g in grads)
        if not ok:
            raise NotInSuperdifferential(f"{tuple(v)} is not a reachable gradient")
    return E


def certificate(
    domain: Domain,
    x0,
    p,
    variant: str = "generic",
    reach: float | None = None,
    extremals=None,
) -> EstimateCertificate:
    """Build the strongest deterministic certificate at ``x0`` for ``p``.

    Args:
        domain: the domain.
        x0: a singular point.
        p: an element of the superdifferential at ``x0`` with ``|p| < 1``.
        variant: ``generic``, ``positive_reach`` or ``convex``.
        reach: reach ``R > 0`` of the complement (``positive_reach`` only).
        extremals: optional reachable gradients to decompose ``p`` over, kept
            in the given order. Needed only to pick a finite subset of a
            continuum (such as the whole circle at a disk centre).

    Raises:
        NotSingular: ``x0`` has a single reachable gradient.
        NotInSuperdifferential: ``p`` is outside the hull or ``|p| >= 1``.
        InvalidReach: bad reach, or ``convex`` on a non-convex domain.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "positive_reach":
        if reach is None or not (reach > 0 and math.isfinite(reach)):
            raise InvalidReach("positive_reach needs a finite reach R > 0")
        R = float(reach)
    elif variant == "convex":
        if not domain.convex:
            raise InvalidReach("convex variant requires a convex domain")
        R = math.inf
    else:
        R = 0.0
    ev = distance(domain, x0)
    if not ev.is_singular:
        raise NotSingular(f"{tuple(ev.point)} is a regular point")
    p = np.asarray(p, dtype=float).reshape(2)
    if not float(np.hypot(*p)) < 1:
        raise NotInSuperdifferential("|p| must be strictly below 1")

    if extremals is not None:
        E = _check_extremals(ev.grads, extremals)
    elif isinstance(ev.grads, Arc):
        E = np.array(_arc_candidates(ev.grads, p))
    else:
        E = np.array(ev.grads, dtype=float)
    if isinstance(ev.grads, Arc):
        # sampled chords lie inside the arc hull within about 1e-6
        ring = ev.grads.sample(2001) - np.asarray(ev.grads.center)
        inside = hull.distance_to_hull(ring, p) <= 1e-6
    else:
        inside = hull.distance_to_hull(E, p) <= MEMBER_TOL
    if not inside:
        raise NotInSuperdifferential(f"{tuple(p)} is outside the superdifferential")

    p_nonzero = float(np.hypot(*p)) > 1e-15
    best = None
    for k in (2, 3):
        for idx in itertools.combinations(range(len(E)), k):
            lam = _decompose(E, p, idx)
            if lam is None:
                continue
            Z = E[list(idx)] - p
            K = _facet_distance(Z)
            # the first extremal whose shift is transversal to p gives zeta
            order = list(range(k))
            if p_nonzero:
                trans = [j for j in range(k) if abs(float(Z[j] @ p)) > 1e-12]
                if trans:
                    order = [trans[0]] + [j for j in range(k) if j != trans[0]]
            transversal = (not p_nonzero) or abs(float(Z[order[0]] @ p)) > 1e-12
            key = (transversal, K, [-i for i in idx])
            if best is None or key > best[0]:
                best = (key, [idx[j] for j in order], lam[order], Z[order])
    if best is None:
        raise NotInSuperdifferential("p has no strictly positive decomposition over the extremals")
    _, chosen, lam, Z = best
    zeta = Z[0] / np.hypot(*Z[0])
    return EstimateCertificate(
        x0=ev.point,
        p=p,
        extremals=tuple(Point(float(E[i, 0]), float(E[i, 1])) for i in chosen),
        lambdas=tuple(float(v) for v in lam),
        K=float(best[0][1]),
        zeta=zeta,
        reach=R,
        variant=variant,
        d0=float(ev.value),
    )


def bound_value(cert: EstimateCertificate, d0: float, x) -> np.ndarray | float:
    """Right-hand side of the estimate at ``x`` (one point or an ``(n, 2)`` array)."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    D = np.atleast_2d(X) - np.asarray(cert.x0)
    val = d0 + D @ cert.p - cert.K * np.abs(D @ cert.zeta)
    if cert.variant != "convex":
        R = cert.reach if cert.variant == "positive_reach" else 0.0
        val = val + np.sum(D * D, axis=1) / (2 * (d0 + R))
    return float(val[0]) if single else val


def sample_domain(domain: Domain, n: int, seed: int, region=None) -> np.ndarray:
    """``n`` scrambled-Halton points inside the domain (and inside ``region``)."""
    (x0, x1), (y0, y1) = domain.bbox
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    out = np.empty((0, 2))
    while len(out) < n:
        U = sampler.random(max(2 * (n - len(out)), 64))
        P = np.column_stack([x0 + (x1 - x0) * U[:, 0], y0 + (y1 - y0) * U[:, 1]])
        keep = domain.contains(P)
        if region is not None:
            keep &= region(P)
        out = np.vstack([out, P[keep]])
    return out[:n]


def verify_certificate(
    domain: Domain, cert: EstimateCertificate, n_samples: int = 10_000, seed: int = 42, region=None
) -> MarginReport:
    """Sample the margin ``bound - d`` over the domain and report its minimum."""
    P = sample_domain(domain, n_samples, seed, region)
    d = distance_values(domain, P)
    b = bound_value(cert, cert.d0, P)
    m = b - d
    order = np.lexsort((P[:, 1], P[:, 0], m))
    i = int(order[0])
    return MarginReport(float(m[i]), Point(float(P[i, 0]), float(P[i, 1])), len(P), seed, P, d, b)
