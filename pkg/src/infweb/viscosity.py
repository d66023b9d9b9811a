"""Monotone wide-stencil solver for ``-Δ∞u = 1`` with zero boundary values.

Discretization
--------------
Stencil directions are the lattice vectors ``v`` with ``max(|v1|, |v2|) = m``
(``8m`` of them, sorted by angle). Rays that leave the domain before reaching
the neighbouring node are cut at the exact boundary crossing, where the value
is zero. At a node with value ``U``, for a direction ``k`` and a direction
``i`` near the opposite one,

    sigma = (U - u_k) / l_k,    tau = (u_i - U) / l_i,
    G     = max((sigma + tau) / 2, 2 max(sigma, tau) / 3, 0),
    S_ik  = 2 (sigma - tau) G**2 / (l_i + l_k),

and ``A(u) = max_k min_i S_ik``. ``sigma - tau`` is a one-sided second
difference along the steepest-descent direction and ``G`` estimates the
slope, so ``A(u)`` approximates ``max(-Δ∞u, 0)``. The discrete ``-Δ∞u`` is

    max(A(u), 0) + min(-A(-u), 0),

which recovers the negative part through the reflection ``u -> -u``.
``S_ik`` is nondecreasing in ``U`` and nonincreasing in every neighbour
value. Both properties survive the reflection and the clipping, so the scheme
is monotone. It vanishes on affine functions.

Solvers
-------
``gauss_seidel`` sweeps the nodes, solving the scalar equation at each node
by bisection. ``newton`` (the default) solves on a hierarchy of coarser grids
first, interpolates upward, smooths with a few sweeps and finishes with a
semismooth Newton iteration on the max-min operator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import spsolve

from .distgeo import inradius
from .domains import Domain
from .errors import NoInteriorNodes, NotConvergedWarning
from .websol import phi_values

EXTERIOR, BAND, INTERIOR = 0, 1, 2
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
# nodes closer than this fraction of h to the boundary are treated as boundary
_NEAR = 1e-6


def stencil(m: int) -> np.ndarray:
    """The ``8m`` lattice directions with sup-norm ``m``, sorted by angle."""
    if m < 1:
        raise ValueError("stencil radius m must be at least 1")
    v = [(a, b) for a in range(-m, m + 1) for b in range(-m, m + 1) if max(abs(a), abs(b)) == m]
    v.sort(key=lambda t: math.atan2(t[1], t[0]))
    return np.array(v, dtype=np.int64)


@dataclass
class Grid:
    """Cartesian lattice ``(i h, j h)`` clipped to a domain.

    ``flags`` covers the full box ``shape``. Arrays indexed by interior node
    (``I``, ``J``, ``points``, ``d``, ``nb``, ``L``) follow row-major lattice
    order.
    """

    h: float
    m: int
    i0: int
    j0: int
    flags: np.ndarray
    I: np.ndarray
    J: np.ndarray
    points: np.ndarray
    d: np.ndarray
    nb: np.ndarray
    L: np.ndarray
    directions: np.ndarray
    label: str = ""
    width: int = 1
    index: np.ndarray = field(repr=False, default=None)

    @property
    def stencil_radius(self) -> int:
        return self.m

    @property
    def n_interior(self) -> int:
        return len(self.I)

    @property
    def shape(self) -> tuple[int, int]:
        return self.flags.shape

    def node(self, i: int, j: int) -> int:
        """Interior index of lattice node ``(i, j)``, -1 if not interior."""
        a, b = i - self.i0, j - self.j0
        if not (0 <= a < self.shape[0] and 0 <= b < self.shape[1]):
            return -1
        return int(self.index[a, b])

    def dense(self, u: np.ndarray, fill: float = np.nan) -> np.ndarray:
        """Lattice array: ``u`` on interior nodes, 0 on the band, ``fill`` outside."""
        out = np.full(self.shape, fill)
        out[self.flags == BAND] = 0.0
        out[self.I - self.i0, self.J - self.j0] = u
        return out

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        nx, ny = self.shape
        return (self.i0 + np.arange(nx)) * self.h, (self.j0 + np.arange(ny)) * self.h


def build_grid(domain: Domain, h: float, m: int = 3, width: int = 1) -> Grid:
    """Lattice nodes, flags and clipped stencil for ``domain`` at spacing ``h``.

    Raises:
        NoInteriorNodes: no lattice node falls inside the domain.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    V = stencil(m)
    (x0, x1), (y0, y1) = domain.bbox
    i0 = int(math.floor(x0 / h)) - m - 1
    i1 = int(math.ceil(x1 / h)) + m + 1
    j0 = int(math.floor(y0 / h)) - m - 1
    j1 = int(math.ceil(y1 / h)) + m + 1
    xs = np.arange(i0, i1 + 1) * h
    ys = np.arange(j0, j1 + 1) * h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Q = np.column_stack([X.ravel(), Y.ravel()])
    dist = domain.boundary_distance(Q).reshape(X.shape)
    inside = domain.contains(Q).reshape(X.shape) & (dist > _NEAR * h)
    flags = np.full(X.shape, EXTERIOR, dtype=np.int8)
    flags[~inside & (dist <= h * math.sqrt(2))] = BAND
    flags[inside] = INTERIOR
    a_idx, b_idx = np.nonzero(inside)
    N = len(a_idx)
    if N == 0:
        raise NoInteriorNodes(f"no lattice node of spacing {h} lies inside {domain.label}")
    index = np.full(X.shape, -1, dtype=np.int64)
    index[a_idx, b_idx] = np.arange(N)
    P = np.column_stack([X[inside], Y[inside]])
    K = len(V)
    nb = np.full((N, K), -1, dtype=np.int64)
    L = np.zeros((N, K))
    for k, (a, b) in enumerate(V):
        length = h * math.hypot(a, b)
        e = np.array([a, b], dtype=float) / math.hypot(a, b)
        exit_len = domain.ray_exit(P, np.broadcast_to(e, P.shape))
        ta, tb = a_idx + a, b_idx + b
        ok = inside[ta, tb] & (exit_len > length * (1 + 1e-12))
        nb[ok, k] = index[ta[ok], tb[ok]]
        L[:, k] = np.where(ok, length, np.minimum(exit_len, length))
    return Grid(
        h=h, m=m, i0=i0, j0=j0, flags=flags,
        I=a_idx + i0, J=b_idx + j0, points=P, d=dist[inside],
        nb=nb, L=L, directions=V, label=domain.label, width=width, index=index,
    )


# ---------------------------------------------------------------------------
# numba kernels


@numba.njit(cache=True)
def _pair(U, uk, lk, ui, li):
    sig = (U - uk) / lk
    tau = (ui - U) / li
    g = max((sig + tau) * 0.5, 2.0 * max(sig, tau) / 3.0, 0.0)
    return (sig - tau) * g * g * 2.0 / (li + lk)


@numba.njit(cache=True)
def _half(U, n, u, nb, L, w, sg):
    K = nb.shape[1]
    half = K // 2
    best = -np.inf
    for k in range(K):
        uk = sg * u[nb[n, k]] if nb[n, k] >= 0 else 0.0
        lk = L[n, k]
        low = np.inf
        for s in range(-w, w + 1):
            i = (k + half + s) % K
            ui = sg * u[nb[n, i]] if nb[n, i] >= 0 else 0.0
            val = _pair(sg * U, uk, lk, ui, L[n, i])
            if val < low:
                low = val
        if low > best:
            best = low
    return best


@numba.njit(cache=True)
def _psi(U, n, u, nb, L, w):
    return max(_half(U, n, u, nb, L, w, 1.0), 0.0) + min(-_half(U, n, u, nb, L, w, -1.0), 0.0)


@numba.njit(cache=True)
def _psi_all(u, nb, L, w):
    """Operator values, active pairs ``(k, i)`` and active halves at every node."""
    N, K = nb.shape
    half = K // 2
    out = np.zeros(N)
    act = np.empty((N, 4), dtype=np.int64)
    on = np.zeros((N, 2), dtype=np.bool_)
    for n in range(N):
        for h_ in range(2):
            sg = 1.0 if h_ == 0 else -1.0
            U = sg * u[n]
            best = -np.inf
            bk = 0
            bi = 0
            for k in range(K):
                uk = sg * u[nb[n, k]] if nb[n, k] >= 0 else 0.0
                lk = L[n, k]
                low = np.inf
                li_best = 0
                for s in range(-w, w + 1):
                    i = (k + half + s) % K
                    ui = sg * u[nb[n, i]] if nb[n, i] >= 0 else 0.0
                    val = _pair(U, uk, lk, ui, L[n, i])
                    if val < low:
                        low = val
                        li_best = i
                if low > best:
                    best = low
                    bk = k
                    bi = li_best
            # keep only the positive part of A(u) and the negative part of -A(-u)
            if best > 0.0:
                out[n] += sg * best
                on[n, h_] = True
            act[n, 2 * h_] = bk
            act[n, 2 * h_ + 1] = bi
    return out, act, on


@numba.njit(cache=True)
def _local_solve(n, u, nb, L, w, rhs):
    """Root of psi(U) = rhs; psi is continuous and nondecreasing in U."""
    K = nb.shape[1]
    lo = 0.0
    for k in range(K):
        if nb[n, k] >= 0 and u[nb[n, k]] < lo:
            lo = u[nb[n, k]]
    # at or below every neighbour value psi <= 0 < rhs
    step = max(abs(u[n] - lo), L[n, 0])
    hi = lo + step
    while _psi(hi, n, u, nb, L, w) < rhs:
        lo = hi
        step *= 2.0
        hi = lo + step
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _psi(mid, n, u, nb, L, w) < rhs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@numba.njit(cache=True)
def _sweep(u, nb, L, w, reverse):
    N = u.shape[0]
    change = 0.0
    for t in range(N):
        n = N - 1 - t if reverse else t
        new = _local_solve(n, u, nb, L, w, 1.0)
        change = max(change, abs(new - u[n]))
        u[n] = new
    return change


# ---------------------------------------------------------------------------
# public operators


def _node_index(grid: Grid, node) -> int:
    if isinstance(node, (tuple, list)):
        n = grid.node(*node)
        if n < 0:
            raise ValueError(f"lattice node {tuple(node)} is not interior")
        return n
    return int(node)


def discrete_inf_laplacian(grid: Grid, u: np.ndarray, node) -> float:
    """Discrete ``Δ∞u`` at one interior node (index or lattice pair ``(i, j)``)."""
    n = _node_index(grid, node)
    u = np.ascontiguousarray(u, dtype=float)
    return -float(_psi(u[n], n, u, grid.nb, grid.L, grid.width))


def inf_laplacian_field(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Discrete ``Δ∞u`` at every interior node."""
    return -_psi_all(np.ascontiguousarray(u, dtype=float), grid.nb, grid.L, grid.width)[0]


def residual(grid: Grid, u: np.ndarray) -> np.ndarray:
    """Discrete ``-Δ∞u - 1`` at every interior node."""
    return -inf_laplacian_field(grid, u) - 1.0


def local_update(grid: Grid, u: np.ndarray, node, rhs: float = 1.0) -> float:
    """Value at ``node`` that makes the discrete equation hold there, others fixed."""
    n = _node_index(grid, node)
    u = np.ascontiguousarray(u, dtype=float)
    return float(_local_solve(n, u, grid.nb, grid.L, grid.width, rhs))


@dataclass
class GridSolution:
    grid: Grid
    u: np.ndarray
    residual_inf: float
    iterations: int
    converged: bool
    method: str = "newton"

    def dense(self, fill: float = np.nan) -> np.ndarray:
        return self.grid.dense(self.u, fill)


@dataclass
class Comparison:
    linf_error: float
    l2_error: float
    boundary_slope_est: float


def _pair_partials(grid: Grid, u: np.ndarray, kb: np.ndarray, ib: np.ndarray, sg: float):
    """Partials of one active pair term w.r.t. (U, u_k, u_i), with neighbour indices."""
    nb, L = grid.nb, grid.L
    rows = np.arange(len(u))
    nk, ni = nb[rows, kb], nb[rows, ib]
    lk, li = L[rows, kb], L[rows, ib]
    U = sg * u
    uk = np.where(nk >= 0, sg * u[nk], 0.0)
    ui = np.where(ni >= 0, sg * u[ni], 0.0)
    s = (U - uk) / lk
    t = (ui - U) / li
    a = (s + t) / 2
    b = 2 * np.maximum(s, t) / 3
    G = np.maximum(np.maximum(a, b), 0.0)
    Gs = np.where(G > 0, np.where(a >= b, 0.5, np.where(s >= t, 2 / 3, 0.0)), 0.0)
    Gt = np.where(G > 0, np.where(a >= b, 0.5, np.where(t > s, 2 / 3, 0.0)), 0.0)
    W = 2 / (lk + li)
    dFs = W * (G**2 + (s - t) * 2 * G * Gs)
    dFt = W * (-(G**2) + (s - t) * 2 * G * Gt)
    # the sign flips on the argument and on the value cancel
    return dFs / lk - dFt / li, nk, -dFs / lk, ni, dFt / li


def _newton(grid: Grid, u: np.ndarray, tol: float, max_iter: int):
    """Semismooth Newton on the active max-min pairs.

    Returns ``(u, residual, iterations, ok)``.
    """
    nb, L, w = grid.nb, grid.L, grid.width
    N = len(u)
    rows = np.arange(N)
    psi, act, on = _psi_all(u, nb, L, w)
    F = psi - 1.0
    res = float(np.abs(F).max())
    it = 0
    while res >= tol and it < max_iter:
        it += 1
        r_, c_, v_ = [rows], [rows], []
        diag = np.zeros(N)
        # where neither half is active, differentiate the first one anyway
        use = on.copy()
        use[:, 0] |= ~on.any(axis=1)
        for h_, sg in enumerate((1.0, -1.0)):
            dU, nk, dk, ni, di = _pair_partials(grid, u, act[:, 2 * h_], act[:, 2 * h_ + 1], sg)
            a = use[:, h_]
            diag += np.where(a, dU, 0.0)
            mk, mi = (nk >= 0) & a, (ni >= 0) & a
            r_ += [rows[mk], rows[mi]]
            c_ += [nk[mk], ni[mi]]
            v_ += [dk[mk], di[mi]]
        if np.any(diag <= 0):
            return u, res, it, False
        J = sp.csc_matrix(
            (np.concatenate([diag] + v_), (np.concatenate(r_), np.concatenate(c_))), shape=(N, N)
        )
        du = spsolve(J, -F)
        if not np.all(np.isfinite(du)):
            return u, res, it, False
        lam = 1.0
        while True:
            cand = u + lam * du
            psi_c, act_c, on_c = _psi_all(cand, nb, L, w)
            res_c = float(np.abs(psi_c - 1.0).max())
            if res_c < (1 - 1e-4 * lam) * res:
                break
            lam /= 2
            if lam < 1e-4:
                return u, res, it, False
        u, F, act, on, res = cand, psi_c - 1.0, act_c, on_c, res_c
    return u, res, it, res < tol


def _gauss_seidel(grid: Grid, u: np.ndarray, tol: float, max_sweeps: int, check_every: int = 10):
    """Alternating sweeps until the residual drops below ``tol``."""
    res = float(np.abs(residual(grid, u)).max())
    sweeps = 0
    while res >= tol and sweeps < max_sweeps:
        _sweep(u, grid.nb, grid.L, grid.width, sweeps % 2 == 1)
        sweeps += 1
        if sweeps % check_every == 0 or sweeps == max_sweeps:
            res = float(np.abs(residual(grid, u)).max())
    return u, res, sweeps


def _prolong(coarse: GridSolution, fine: Grid) -> np.ndarray:
    xs, ys = coarse.grid.axes()
    vals = coarse.grid.dense(coarse.u, fill=0.0)
    interp = RegularGridInterpolator((xs, ys), vals, bounds_error=False, fill_value=0.0)
    return np.maximum(interp(fine.points), 0.0)


_COARSEST = 400


def solve_dirichlet(
    domain: Domain,
    h: float = 1 / 32,
    m: int = 3,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    method: str = "newton",
    width: int = 1,
    smoothing: int = 4,
) -> GridSolution:
    """Solve the discrete Dirichlet problem for ``-Δ∞u = 1`` on ``domain``.

    Args:
        domain: the domain.
        h: lattice spacing.
        m: stencil radius (``8m`` directions).
        tol: target for ``max |discrete(-Δ∞u) - 1|``.
        max_iter: cap on Newton steps or on sweeps (``gauss_seidel``).
        method: ``newton`` or ``gauss_seidel``.
        width: number of directions on each side of the exact opposite one
            that the scheme minimizes over.
        smoothing: sweeps applied after each interpolation step.

    Returns:
        The final iterate. ``converged`` is False (and NotConvergedWarning is
        emitted) when ``tol`` was not reached.

    Raises:
        NoInteriorNodes: the lattice misses the domain.
    """
    if method not in ("newton", "gauss_seidel"):
        raise ValueError(f"unknown method {method!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = build_grid(domain, h, m, width)
    if method == "gauss_seidel":
        u = np.zeros(grid.n_interior)
        u, res, iters = _gauss_seidel(grid, u, tol, max_iter)
    else:
        u, res, iters = _solve_nested(domain, grid, tol, max_iter, smoothing)
    converged = res < tol
    if not converged:
        warnings.warn(
            f"solve on {domain.label} stopped at residual {res:.3e} (tol {tol:.1e})",
            NotConvergedWarning,
            stacklevel=2,
        )
    return GridSolution(grid, u, res, iters, converged, method)


def _solve_nested(domain: Domain, grid: Grid, tol: float, max_iter: int, smoothing: int):
    coarse = None
    if grid.n_interior > _COARSEST:
        try:
            cgrid = build_grid(domain, 2 * grid.h, grid.m, grid.width)
        except NoInteriorNodes:
            cgrid = None
        if cgrid is not None and cgrid.n_interior >= 16:
            u, res, _ = _solve_nested(domain, cgrid, tol, max_iter, smoothing)
            coarse = GridSolution(cgrid, u, res, 0, res < tol)
    if coarse is None:
        u = np.zeros(grid.n_interior)
        u, res, sweeps = _gauss_seidel(grid, u, 1e-2, 10_000)
    else:
        u = _prolong(coarse, grid)
        sweeps = 0
    for _ in range(smoothing):
        _sweep(u, grid.nb, grid.L, grid.width, sweeps % 2 == 1)
        sweeps += 1
    total = sweeps
    while True:
        u, res, it, ok = _newton(grid, u, tol, max_iter)
        total += it
        if ok or total >= max_iter:
            return u, res, total
        # Newton stalled: smooth and retry
        u, res, s = _gauss_seidel(grid, u, 0.0, 20)
        total += s
        if total >= max_iter:
            return u, res, total


def compare_to_phi(sol: GridSolution, domain: Domain) -> Comparison:
    """Errors against ``phi`` at interior nodes and the boundary slope estimate.

    The slope estimate is the median of ``u / d`` over interior nodes within
    one lattice spacing of the boundary.
    """
    g = sol.grid
    rho, _ = inradius(domain)
    ref = phi_values(domain, g.points, rho)
    err = sol.u - ref
    near = g.d <= g.h
    slope = float(np.median(sol.u[near] / g.d[near])) if np.any(near) else math.nan
    return Comparison(
        linf_error=float(np.abs(err).max()),
        l2_error=float(math.sqrt(g.h**2 * float(np.sum(err**2)))),
        boundary_slope_est=slope,
    )




def solution_from_values(domain: Domain, h: float, m: int, I, J, u, width: int = 1) -> GridSolution:
    """Rebuild a solution from node values keyed by lattice index.

    Every interior node of the rebuilt grid must be present in ``(I, J)``.
    The residual is recomputed from scratch.
    """
    grid = build_grid(domain, h, m, width)
    lookup = {(int(i), int(j)): float(v) for i, j, v in zip(I, J, u)}
    try:
        vals = np.array([lookup[(int(i), int(j))] for i, j in zip(grid.I, grid.J)])
    except KeyError as exc:
        raise ValueError(f"node {exc.args[0]} missing from the supplied values") from exc
    res = float(np.abs(residual(grid, vals)).max())
    return GridSolution(grid, vals, res, 0, res < DEFAULT_TOL, "loaded")
