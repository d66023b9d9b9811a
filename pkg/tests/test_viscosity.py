import math
import warnings

import numpy as np
import pytest

from infweb.distgeo import inradius
from infweb.domains import make_disk, make_polygon
from infweb.errors import NoInteriorNodes, NotConvergedWarning
from infweb.viscosity import (
    BAND,
    INTERIOR,
    build_grid,
    compare_to_phi,
    discrete_inf_laplacian,
    inf_laplacian_field,
    local_update,
    residual,
    solution_from_values,
    solve_dirichlet,
    stencil,
)
from infweb.websol import C0, phi_values, radial_solution


def test_stencil():
    for m in (1, 2, 3):
        V = stencil(m)
        assert len(V) == 8 * m
        assert np.all(np.abs(V).max(axis=1) == m)
        # antipodal pairing used by the scheme
        assert np.array_equal(V[: 4 * m], -V[4 * m:])


def test_grid_flags(disk):
    g = build_grid(disk, 1 / 16)
    assert np.all(disk.contains(g.points))
    xs, ys = g.axes()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    band = g.flags == BAND
    dist = np.abs(1 - np.hypot(X, Y))
    assert np.all(dist[band] <= g.h * math.sqrt(2))
    assert (g.flags == INTERIOR).sum() == g.n_interior
    assert np.all(g.L > 0) and np.all(g.L <= g.h * math.hypot(3, 3) + 1e-15)


def test_clipped_rays_end_on_boundary(square):
    g = build_grid(square, 1 / 8)
    n, k = np.nonzero(g.nb < 0)
    V = g.directions / np.hypot(*g.directions.T)[:, None]
    ends = g.points[n] + g.L[n, k][:, None] * V[k]
    assert square.boundary_distance(ends).max() < 1e-12


def test_affine_is_zero(square):
    g = build_grid(square, 1 / 8)
    u = 0.3 + g.points @ np.array([0.2, -0.1])
    # boundary value 0 is not affine, so use nodes whose stencil stays inside
    full = np.all(g.nb >= 0, axis=1)
    vals = inf_laplacian_field(g, u)[full]
    assert np.abs(vals).max() < 1e-12
    n = int(np.nonzero(full)[0][0])
    assert discrete_inf_laplacian(g, u, n) == pytest.approx(0, abs=1e-12)
    assert discrete_inf_laplacian(g, u, (int(g.I[n]), int(g.J[n]))) == pytest.approx(0, abs=1e-12)


def test_quadratic_matches_analytic():
    # second differences are exact on quadratics, so only the angular
    # resolution of the stencil remains: exact when the gradient is a lattice
    # direction, within a few percent otherwise
    dom = make_disk((0, 0), 2.0)
    for h in (1 / 16, 1 / 32, 1 / 64):
        g = build_grid(dom, h, m=3)
        u = 0.5 * np.sum(g.points**2, axis=1)
        n = g.node(round(1 / h), 0)
        assert discrete_inf_laplacian(g, u, n) == pytest.approx(1.0, abs=1e-12)
        for x, y in ((0.6, 0.4), (1.0, 0.5)):
            n = g.node(round(x / h), round(y / h))
            assert discrete_inf_laplacian(g, u, n) == pytest.approx(x * x + y * y, rel=0.02)


def test_convex_and_concave_parts():
    dom = make_disk((0, 0), 2.0)
    g = build_grid(dom, 1 / 16)
    u = 0.5 * np.sum(g.points**2, axis=1)
    n = g.node(16, 0)
    assert discrete_inf_laplacian(g, -u, n) == pytest.approx(-discrete_inf_laplacian(g, u, n))


def test_radial_solution_residual_shrinks(disk):
    out = []
    for h in (1 / 16, 1 / 32, 1 / 64):
        g = build_grid(disk, h)
        u = radial_solution((0, 0), 1.0, g.points)
        r = np.hypot(*g.points.T)
        sel = (r > 0.3) & (r < 0.7)
        out.append(np.median(np.abs(residual(g, u)[sel])))
    assert out[0] > out[1] > out[2]
    assert out[2] < 0.1


def test_monotone_on_random_fields(square):
    g = build_grid(square, 1 / 4, m=2)
    rng = np.random.default_rng(0)
    N, K = g.nb.shape
    violations = 0
    for trial in range(1000):
        u = rng.uniform(0, 3, N)
        n = int(rng.integers(N))
        nbrs = g.nb[n][g.nb[n] >= 0]
        if len(nbrs) == 0:
            continue
        j = int(rng.choice(nbrs))
        base_update = local_update(g, u, n)
        base_op = discrete_inf_laplacian(g, u, n)
        v = u.copy()
        v[j] += rng.uniform(0.01, 1)
        if local_update(g, v, n) < base_update - 1e-12:
            violations += 1
        # operator -Δ∞ nonincreasing in the neighbour, i.e. Δ∞ nondecreasing
        if discrete_inf_laplacian(g, v, n) < base_op - 1e-12:
            violations += 1
        # and nondecreasing in the centre value for -Δ∞
        w = u.copy()
        w[n] += rng.uniform(0.01, 1)
        if -discrete_inf_laplacian(g, w, n) < -base_op - 1e-12:
            violations += 1
    assert violations == 0


def test_local_update_solves_node(square):
    g = build_grid(square, 1 / 4)
    rng = np.random.default_rng(1)
    u = rng.uniform(0, 2, g.n_interior)
    for n in range(0, g.n_interior, 7):
        v = u.copy()
        v[n] = local_update(g, u, n)
        assert -discrete_inf_laplacian(g, v, n) == pytest.approx(1.0, abs=1e-9)


@pytest.fixture(scope="module")
def disk_solutions(disk):
    return {h: solve_dirichlet(disk, h) for h in (1 / 16, 1 / 32)}


def test_disk_solve_converges(disk, disk_solutions):
    e = []
    for h, sol in disk_solutions.items():
        assert sol.converged and sol.residual_inf < 1e-8
        assert np.all(sol.u >= 0)
        e.append(compare_to_phi(sol, disk).linf_error)
    assert e[1] < e[0]
    sol = disk_solutions[1 / 32]
    c = sol.grid.node(0, 0)
    assert abs(sol.u[c] - C0) < 0.02 * C0


def test_disk_symmetry(disk_solutions):
    sol = disk_solutions[1 / 32]
    g = sol.grid
    D = g.dense(sol.u, fill=0.0)
    # lattice is symmetric about the origin
    assert g.i0 == -(g.shape[0] // 2) and g.j0 == -(g.shape[1] // 2)
    for T in (D[::-1, :], D[:, ::-1], D.T, D[::-1, ::-1].T):
        assert np.abs(T - D).max() < 1e-8


def test_comparison_with_radial(disk_solutions, disk):
    for h, sol in disk_solutions.items():
        rho, w = inradius(disk)
        v = radial_solution(w, rho, sol.grid.points)
        assert np.all(sol.u >= v - h)


def test_scaling():
    s1 = solve_dirichlet(make_disk((0, 0), 1.0), 1 / 16)
    s2 = solve_dirichlet(make_disk((0, 0), 2.0), 2 / 16)
    assert np.array_equal(s1.grid.I, s2.grid.I)
    assert np.abs(s2.u - 2 ** (4 / 3) * s1.u).max() < 1e-8


def test_gauss_seidel_agrees_with_newton(triangle):
    a = solve_dirichlet(triangle, 1 / 16, tol=1e-10)
    b = solve_dirichlet(triangle, 1 / 16, tol=1e-10, method="gauss_seidel")
    assert b.converged and b.method == "gauss_seidel"
    assert np.abs(a.u - b.u).max() < 1e-8


def test_deterministic(stadium):
    a = solve_dirichlet(stadium, 1 / 16)
    b = solve_dirichlet(stadium, 1 / 16)
    assert np.array_equal(a.u, b.u) and a.iterations == b.iterations


def test_not_converged_warning(square):
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        sol = solve_dirichlet(square, 1 / 16, method="gauss_seidel", max_iter=3)
    assert not sol.converged
    assert any(issubclass(r.category, NotConvergedWarning) for r in rec)


def test_no_interior_nodes():
    tiny = make_polygon([(0.1, 0.1), (0.2, 0.1), (0.15, 0.2)])
    with pytest.raises(NoInteriorNodes):
        build_grid(tiny, 1.0)


def test_compare_exact_phi_is_zero(disk):
    g = build_grid(disk, 1 / 16)
    from infweb.viscosity import GridSolution

    sol = GridSolution(g, phi_values(disk, g.points), 0.0, 0, True)
    c = compare_to_phi(sol, disk)
    assert c.linf_error == 0 and c.l2_error == 0


def test_square_is_not_phi(square):
    errs = [compare_to_phi(solve_dirichlet(square, h), square).linf_error for h in (1 / 8, 1 / 16)]
    assert min(errs) > 0.2


def test_round_trip_residual(stadium):
    sol = solve_dirichlet(stadium, 1 / 16)
    again = solution_from_values(stadium, 1 / 16, 3, sol.grid.I, sol.grid.J, sol.u)
    assert abs(again.residual_inf - sol.residual_inf) <= 1e-12
