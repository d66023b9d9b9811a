"""Closed-form web solution and profile fitting.

The one-dimensional profile family is

    g_r(t) = c0 * (r**(4/3) - (r - t)**(4/3)),   c0 = 3**(4/3) / 4,

which solves ``-g'' (g')**2 = 1`` on ``[0, r)``. With ``r`` equal to the
inradius it gives the candidate ``phi(x) = g(d(x))``, and composed with the
distance to a single point it gives the radial solution on a ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distgeo import distance, distance_values, inradius
from .domains import Domain, as_point
from .errors import EmptyBin, OutOfRange, SingularDerivative

C0 = 3 ** (4 / 3) / 4
_EDGE = 1e-12


@dataclass(frozen=True)
class WebProfile:
    rho: float
    r: float

    c0 = C0

    def __post_init__(self):
        if not (0 < self.rho <= self.r):
            raise OutOfRange(f"need 0 < rho <= r, got rho={self.rho}, r={self.r}")

    @property
    def boundary_slope(self) -> float:
        """``g_r'(0) = (3 r)**(1/3)``."""
        return (3 * self.r) ** (1 / 3)

    def __call__(self, t, order: int = 0):
        return profile_eval(self.rho, self.r, t, order)


def profile_eval(rho: float, r: float, t, order: int = 0):
    """Value (order 0) or derivative (order 1, 2) of ``g_r`` at ``t`` in ``[0, rho]``.

    Accepts scalars or arrays.

    Raises:
        OutOfRange: bad parameters or ``t`` outside ``[0, rho]``.
        SingularDerivative: ``order == 2`` at ``t == r``.
    """
    if not (0 < rho <= r):
        raise OutOfRange(f"need 0 < rho <= r, got rho={rho}, r={r}")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    T = np.asarray(t, dtype=float)
    if np.any(T < -_EDGE) or np.any(T > rho * (1 + _EDGE)):
        raise OutOfRange(f"t must lie in [0, {rho}]")
    s = np.clip(r - T, 0.0, None)
    if order == 0:
        out = C0 * (r ** (4 / 3) - s ** (4 / 3))
    elif order == 1:
        out = 3 ** (1 / 3) * np.cbrt(s)
    else:
        if np.any(s <= 0):
            raise SingularDerivative("second derivative is unbounded at t = r")
        out = -(3 ** (-2 / 3)) * s ** (-2 / 3)
    return float(out) if np.ndim(out) == 0 else out


def phi(domain: Domain, x) -> float:
    """``g(d(x))`` with ``g`` built on the inradius. Raises OutsideDomain off the closure."""
    rho, _ = inradius(domain)
    d = distance(domain, x).value
    return profile_eval(rho, rho, min(d, rho))


def phi_values(domain: Domain, points, rho: float | None = None) -> np.ndarray:
    """Vectorized ``phi`` (zero outside the domain)."""
    if rho is None:
        rho, _ = inradius(domain)
    d = np.minimum(distance_values(domain, points), rho)
    return profile_eval(rho, rho, d)


def radial_solution(x0, rho: float, x) -> float:
    """``g(rho - |x - x0|)`` on the closed ball of radius ``rho`` about ``x0``."""
    x0 = np.asarray(as_point(x0))
    X = np.asarray(x, dtype=float)
    s = np.hypot(*(np.atleast_2d(X) - x0).T)
    if np.any(s > rho * (1 + _EDGE)):
        raise OutOfRange("point lies outside the ball")
    val = profile_eval(rho, rho, np.clip(rho - s, 0.0, rho))
    return float(val[0]) if X.ndim == 1 else val


@dataclass
class FittedProfile:
    """Bin statistics of a field against the distance to the boundary.

    ``oscillation`` in a bin is the largest drop ``u(x) - u(y)`` over node
    pairs with ``d(x) <= d(y)``: zero exactly when the field is a
    nondecreasing function of ``d`` inside the bin. ``spread`` is the plain
    ``max - min``.
    """

    rho: float
    edges: np.ndarray
    t_mid: np.ndarray
    f_hat: np.ndarray
    oscillation: np.ndarray
    spread: np.ndarray
    counts: np.ndarray

    @property
    def bins(self) -> list[tuple[float, float, float]]:
        return list(zip(self.t_mid.tolist(), self.f_hat.tolist(), self.oscillation.tolist()))

    @property
    def web_deviation(self) -> float:
        return float(self.oscillation.max())

    @property
    def slope_left(self) -> float:
        """One-sided secant of ``f_hat`` over the last two bin midpoints."""
        return float((self.f_hat[-1] - self.f_hat[-2]) / (self.t_mid[-1] - self.t_mid[-2]))

    def g_reference(self) -> np.ndarray:
        return profile_eval(self.rho, self.rho, self.t_mid)


def _max_inversion(d: np.ndarray, u: np.ndarray) -> float:
    order = np.lexsort((-u, d))
    us = u[order]
    return float(np.max(np.maximum.accumulate(us) - us))


def fit_profile(d: np.ndarray, u: np.ndarray, rho: float, n_bins: int) -> FittedProfile:
    """Bin ``u`` by ``d`` over ``[0, rho]`` (nodes with ``d >= rho`` go in the last bin)."""
    if n_bins < 4:
        raise ValueError("n_bins must be at least 4")
    d = np.asarray(d, float)
    u = np.asarray(u, float)
    edges = np.linspace(0.0, rho, n_bins + 1)
    which = np.clip(np.searchsorted(edges, d, side="right") - 1, 0, n_bins - 1)
    f_hat = np.empty(n_bins)
    osc = np.empty(n_bins)
    spread = np.empty(n_bins)
    counts = np.bincount(which, minlength=n_bins)
    if np.any(counts == 0):
        j = int(np.argmin(counts))
        raise EmptyBin(f"bin {j} on [{edges[j]:.6g}, {edges[j + 1]:.6g}) has no nodes")
    for j in range(n_bins):
        sel = which == j
        uj, dj = u[sel], d[sel]
        f_hat[j] = uj.mean()
        spread[j] = uj.max() - uj.min()
        osc[j] = _max_inversion(dj, uj)
    t_mid = 0.5 * (edges[:-1] + edges[1:])
    return FittedProfile(rho, edges, t_mid, f_hat, osc, spread, counts)


def fit_web_profile(sol, domain: Domain, n_bins: int = 32) -> FittedProfile:
    """Fit a web profile to a grid solution (interior nodes only)."""
    rho, _ = inradius(domain)
    return fit_profile(sol.grid.d, sol.u, rho, n_bins)
