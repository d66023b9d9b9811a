import math

import numpy as np
import pytest
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from infweb import hull
from infweb.distgeo import (
    Arc,
    convex_skeleton,
    distance,
    distance_values,
    gate,
    hausdorff,
    high_ridge,
    inradius,
    segment_oracle_distance,
    singular_set,
    superdifferential,
)
from infweb.domains import make_polygon
from infweb.errors import OutsideDomain

S2 = math.sqrt(2)
S3 = math.sqrt(3)


def _same_set(a, b, tol=1e-12):
    A, B = np.asarray(a, float), np.asarray(b, float)
    return A.shape == B.shape and cdist(A, B).min(axis=1).max() <= tol and cdist(B, A).min(axis=1).max() <= tol


def test_square_origin(square):
    ev = distance(square, (0, 0))
    assert ev.value == pytest.approx(1.0, abs=1e-12)
    assert _same_set(ev.projections, [(1 / S2, 1 / S2), (-1 / S2, 1 / S2)])
    assert _same_set(ev.grads, [(-1 / S2, -1 / S2), (1 / S2, -1 / S2)])
    assert ev.is_singular


def test_triangle_origin(triangle):
    ev = distance(triangle, (0, 0))
    assert ev.value == pytest.approx(S3 / 3, abs=1e-12)
    assert _same_set(ev.grads, [(0, -1), (S3 / 2, 0.5), (-S3 / 2, 0.5)])
    assert ev.is_singular


def test_disk_regular_point(disk):
    ev = distance(disk, (0.5, 0))
    assert ev.value == pytest.approx(0.5)
    assert _same_set(ev.projections, [(1, 0)])
    assert _same_set(ev.grads, [(-1, 0)])
    assert not ev.is_singular
    assert np.allclose(ev.gradient, [-1, 0])


def test_disk_centre_is_a_continuum(disk):
    ev = distance(disk, (0, 0))
    assert isinstance(ev.projections, Arc) and ev.projections.full
    assert isinstance(ev.grads, Arc) and ev.grads.full
    assert ev.is_singular
    sd = superdifferential(disk, (0, 0))
    assert sd.hull_contains_zero and sd.dim == 2


def test_stadium_endpoint_half_circle(stadium):
    ev = distance(stadium, (1, 0))
    assert isinstance(ev.grads, Arc)
    assert ev.grads.span == pytest.approx(math.pi)
    # gradients point back along the axis
    mid = ev.grads.start + math.pi / 2
    assert np.allclose([math.cos(mid), math.sin(mid)], [-1, 0], atol=1e-12)


def test_triangle_closed_form(triangle):
    x1, x2 = 0.2, 0.1
    exact = S3 / 3 + min(-(S3 / 2) * abs(x1) + x2 / 2, -x2)
    assert distance(triangle, (x1, x2)).value == pytest.approx(exact, abs=1e-12)


def test_outside_rejected(disk, square):
    with pytest.raises(OutsideDomain):
        distance(disk, (2, 0))
    with pytest.raises(OutsideDomain):
        distance(square, (0, 5))


def test_boundary_point_allowed(disk):
    assert distance(disk, (1, 0)).value == 0.0


def test_projection_invariants(corpus):
    rng = np.random.default_rng(3)
    for dom in corpus.values():
        (x0, x1), (y0, y1) = dom.bbox
        P = np.column_stack([rng.uniform(x0, x1, 300), rng.uniform(y0, y1, 300)])
        for x in P[dom.contains(P)]:
            ev = distance(dom, x)
            if isinstance(ev.projections, Arc):
                continue
            for q in ev.projections:
                assert abs(math.hypot(x[0] - q[0], x[1] - q[1]) - ev.value) <= 1e-10
                assert dom.boundary_distance(q)[0] <= 1e-10
            grads = [((x[0] - q[0]) / ev.value, (x[1] - q[1]) / ev.value) for q in ev.projections]
            assert _same_set(ev.grads, grads, 1e-9)


def test_superdifferential_examples(triangle, square, disk):
    sd = superdifferential(triangle, (0, 0))
    assert sd.hull_contains_zero and sd.dim == 2
    sd = superdifferential(square, (0, 0))
    assert not sd.hull_contains_zero and sd.dim == 1
    sd = superdifferential(disk, (0.3, 0.1))
    assert len(sd.extremals) == 1 and sd.dim == 0


def test_eikonal_at_regular_points(corpus):
    rng = np.random.default_rng(5)
    for dom in corpus.values():
        (x0, x1), (y0, y1) = dom.bbox
        P = np.column_stack([rng.uniform(x0, x1, 200), rng.uniform(y0, y1, 200)])
        for x in P[dom.contains(P)]:
            ev = distance(dom, x)
            if ev.is_singular:
                continue
            g = ev.gradient
            assert abs(np.hypot(*g) - 1) < 1e-12
            eps = 1e-6
            fd = [
                (distance_values(dom, x + eps * e)[0] - distance_values(dom, x - eps * e)[0]) / (2 * eps)
                for e in np.eye(2)
            ]
            assert np.allclose(fd, g, atol=1e-5)


def _lp_inradius(poly):
    # maximize r subject to n_i . x + r <= c_i for every edge
    A, B = poly.edges()
    rows, rhs = [], []
    for a, b in zip(A, B):
        e = (b - a) / np.hypot(*(b - a))
        n = np.array([e[1], -e[0]])  # outward for a counterclockwise loop
        rows.append([n[0], n[1], 1.0])
        rhs.append(float(n @ a))
    res = linprog([0, 0, -1], A_ub=rows, b_ub=rhs, bounds=[(None, None)] * 3)
    return res.x[2]


def test_inradius_examples(square, triangle, stadium):
    rho, w = inradius(square)
    assert rho == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(w, (0, -S2), atol=1e-12)
    rho, w = inradius(triangle)
    assert rho == pytest.approx(S3 / 3, abs=1e-12)
    assert np.allclose(w, (0, 0), atol=1e-12)
    rho, w = inradius(stadium)
    assert rho == 1.0 and distance(stadium, w).value == pytest.approx(1.0)


@pytest.mark.parametrize(
    "verts",
    [
        [(0, 0), (3, 0), (3, 1), (0, 1)],
        [(0, 0), (4, 0), (5, 2), (2, 4), (-1, 2)],
        [(0, 0), (1, 0), (0.3, 2)],
        [(0, 0), (2, 0), (3, 1), (2, 2), (0, 2), (-1, 1)],
    ],
)
def test_inradius_matches_lp_and_witness(verts):
    poly = make_polygon(verts)
    rho, w = inradius(poly)
    assert rho == pytest.approx(_lp_inradius(poly), abs=1e-10)
    assert distance(poly, w).value == pytest.approx(rho, abs=1e-10)


def test_nonconvex_inradius_and_flag():
    L = make_polygon([(0, 0), (4, 0), (4, 1), (1, 1), (1, 4), (0, 4)])
    assert not L.convex
    rho, w = inradius(L)
    # disk touching both outer walls and the reflex corner (1, 1)
    assert rho == pytest.approx(S2 / (1 + S2), abs=1e-6)
    assert distance(L, w).value == pytest.approx(rho, abs=1e-12)
    assert gate(L, 0.05).exact is False


def test_square_singular_set_matches_grid_scan(square):
    S = singular_set(square, 0.02)
    # brute force: grid nodes with two edges equidistant within the spacing
    V = square.array
    g = np.linspace(-3, 3, 121)
    X, Y = np.meshgrid(g, g - S2)
    Q = np.column_stack([X.ravel(), Y.ravel()])
    Q = Q[square.contains(Q)]
    D = np.stack([np.abs((Q - a) @ np.array([(b - a)[1], -(b - a)[0]]) / 4) for a, b in zip(V, np.roll(V, -1, 0))], 1)
    Ds = np.sort(D, 1)
    brute = Q[Ds[:, 1] - Ds[:, 0] < 1e-9]
    assert len(brute) > 0
    assert cdist(brute, S).min(axis=1).max() <= 0.02
    # the diagonals of this square are the lines x = 0 and y = -sqrt(2)
    R = S - np.array([0, -S2])
    assert np.all(np.minimum(np.abs(R[:, 0]), np.abs(R[:, 1])) < 1e-9)


def test_singular_points_are_singular(corpus):
    for dom in corpus.values():
        for x in singular_set(dom, 0.05):
            assert distance(dom, x).is_singular


def test_sampling_spacing(square, stadium):
    for dom in (square, stadium):
        S = singular_set(dom, 0.05)
        nn = cdist(S, S) + np.eye(len(S)) * 1e9
        assert nn.min(axis=1).max() <= 0.05 + 1e-12


def test_skeleton_rectangle_high_segment():
    rect = make_polygon([(0, 0), (3, 0), (3, 1), (0, 1)])
    sk = convex_skeleton(rect)
    assert sk.rho == pytest.approx(0.5)
    assert _same_set(sk.high, [(0.5, 0.5), (2.5, 0.5)], 1e-12)
    assert len(high_ridge(rect, 0.1)) > 2


def test_high_ridge_hull_property(corpus):
    for dom in corpus.values():
        rho, _ = inradius(dom)
        for q in high_ridge(dom, 0.05):
            assert rho - distance(dom, q).value <= 1e-12
            assert superdifferential(dom, q).hull_contains_zero


def test_gate_examples(disk, stadium, square):
    g = gate(disk, 0.01)
    assert g.hausdorff == 0 and g.verdict
    g = gate(stadium, 0.01)
    assert g.hausdorff <= 0.02 and g.verdict
    g = gate(square, 0.01)
    assert abs(g.hausdorff - 2 * S2) <= 0.05 * 2 * S2 and not g.verdict


def test_high_within_cut_neighbourhood(corpus):
    for dom in corpus.values():
        g = gate(dom, 0.02)
        assert cdist(g.high_points, g.cut_points).min(axis=1).max() <= 2 * 0.02


def test_hausdorff_brute_force():
    rng = np.random.default_rng(1)
    P, Q = rng.normal(size=(40, 2)), rng.normal(size=(30, 2))
    D = cdist(P, Q)
    assert hausdorff(P, Q) == pytest.approx(max(D.min(1).max(), D.min(0).max()))


def test_distance_matches_segment_oracle(square, triangle):
    rng = np.random.default_rng(7)
    for poly in (square, triangle):
        (x0, x1), (y0, y1) = poly.bbox
        P = np.column_stack([rng.uniform(x0, x1, 500), rng.uniform(y0, y1, 500)])
        P = P[poly.contains(P)]
        vals = np.array([distance(poly, x).value for x in P])
        assert np.abs(vals - segment_oracle_distance(poly, P)).max() <= 1e-12


def test_one_lipschitz(corpus):
    rng = np.random.default_rng(11)
    for dom in corpus.values():
        (x0, x1), (y0, y1) = dom.bbox
        P = np.column_stack([rng.uniform(x0, x1, 20000), rng.uniform(y0, y1, 20000)])
        P = P[dom.contains(P)]
        d = distance_values(dom, P)
        i, j = rng.integers(0, len(P), (2, 10000))
        assert np.all(np.abs(d[i] - d[j]) <= np.hypot(*(P[i] - P[j]).T) + 1e-12)


def test_hull_helpers():
    pts = [(1, 0), (-1, 0), (0, 1)]
    assert hull.contains_origin(pts)
    assert not hull.contains_origin([(1, 1), (2, 1)])
    assert hull.affine_dim([(0, 0), (1, 1), (2, 2)]) == 1
    assert hull.distance_to_hull([(1, 1), (1, -1)]) == pytest.approx(1.0)
