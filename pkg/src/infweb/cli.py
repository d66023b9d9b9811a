"""Command-line front end.

Subcommands: ``analyze``, ``certify``, ``solve``, ``compare`` and ``export``.
Exit codes: 0 on success, 1 on any error, 2 when ``analyze --expect-gate``
finds that the gate fails.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .distgeo import distance, distance_values, gate, inradius, singular_set
from .errors import InfWebError, ParseError
from .estimate import certificate, verify_certificate
from .viscosity import compare_to_phi, solution_from_values, solve_dirichlet
from .websol import fit_web_profile, phi_values

THREADS_ENV = "INFWEB_THREADS"
MAX_AUTO_POINTS = 64
_VARIANTS = {"generic": "generic", "reach": "positive_reach", "convex": "convex"}


@dataclass
class RunConfig:
    command: str
    domain_file: Path
    step: float = 0.01
    h: float = 1 / 32
    m: int = 3
    tol: float = 1e-8
    n_samples: int = 10_000
    seed: int = 42
    n_bins: int = 32
    out_dir: Path = Path("out")
    expect_gate: bool = False
    x0: tuple[float, float] | None = None
    p: tuple[float, float] | None = None
    variant: str = "generic"
    reach: float | None = None
    grid_file: Path | None = None

    def validate(self) -> None:
        for name in ("step", "h", "tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ParseError(f"--{name} must be a positive number, got {v}")
        for name in ("m", "n_samples", "n_bins"):
            if getattr(self, name) <= 0:
                raise ParseError(f"--{name.replace('n_', '')} must be positive")
        if self.seed < 0:
            raise ParseError("--seed must be nonnegative")


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    try:
        return (io.eval_number(parts[0]), io.eval_number(parts[1]))
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _number(text: str) -> float:
    try:
        return io.eval_number(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infweb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", required=True, type=Path, help="YAML/JSON domain file")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--step", type=_number, default=0.01, help="sampling step for point clouds")
    common.add_argument("--h", type=_number, default=1 / 32, help="lattice spacing")
    common.add_argument("--m", type=int, default=3, help="stencil radius (8m directions)")
    common.add_argument("--tol", type=_number, default=1e-8, help="solver residual tolerance")
    common.add_argument("--samples", type=int, default=10_000, help="verification samples")
    common.add_argument("--seed", type=int, default=42, help="sampling seed")
    common.add_argument("--bins", type=int, default=32, help="profile bins")

    a = sub.add_parser("analyze", parents=[common], help="cut locus, high ridge and gate verdict")
    a.add_argument("--expect-gate", action="store_true", help="exit 2 if the gate fails")
    c = sub.add_parser("certify", parents=[common], help="distance estimate certificates")
    c.add_argument("--x0", type=_pair, help="singular point 'x,y'")
    c.add_argument("--p", type=_pair, help="superdifferential element 'px,py'")
    c.add_argument("--variant", choices=sorted(_VARIANTS), default="generic")
    c.add_argument("--reach", type=_number, help="reach R for --variant reach")
    sub.add_parser("solve", parents=[common], help="solve the Dirichlet problem on a grid")
    cmp_ = sub.add_parser("compare", parents=[common], help="compare a grid solution with the web candidate")
    cmp_.add_argument("--grid", type=Path, help="grid.csv from 'solve' (default: OUT/grid.csv, else solve)")
    sub.add_parser("export", parents=[common], help="dense lattice dumps for contour plots")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command, domain_file=ns.domain, step=ns.step, h=ns.h, m=ns.m, tol=ns.tol,
        n_samples=ns.samples, seed=ns.seed, n_bins=ns.bins, out_dir=ns.out,
        expect_gate=getattr(ns, "expect_gate", False), x0=getattr(ns, "x0", None),
        p=getattr(ns, "p", None), variant=getattr(ns, "variant", "generic"),
        reach=getattr(ns, "reach", None), grid_file=getattr(ns, "grid", None),
    )


def _cloud_columns(domain, P):
    d = distance_values(domain, P)
    n = [
        (0 if ev.value <= 0 else (-1 if not isinstance(ev.grads, tuple) else len(ev.grads)))
        for ev in (distance(domain, q) for q in P)
    ]
    return [P[:, 0], P[:, 1], d, np.array(n, dtype=np.int64)]


def _analyze(cfg: RunConfig, domain, out: Path) -> int:
    rep = gate(domain, cfg.step)
    hdr = ["x", "y", "d", "n_grads"]
    io.write_csv(out / "cut_points.csv", hdr, _cloud_columns(domain, rep.cut_points))
    io.write_csv(out / "high_points.csv", hdr, _cloud_columns(domain, rep.high_points))
    io.write_report(out / "gate_report.json", {
        "domain": domain.label, "rho": rep.rho, "hausdorff": rep.hausdorff,
        "verdict": rep.verdict, "step": rep.sampling_step, "exact": rep.exact,
        "hausdorff_kind": "symmetric",
        "n_cut": len(rep.cut_points), "n_high": len(rep.high_points),
    })
    print(f"{domain.label}: rho={rep.rho:.17g} hausdorff={rep.hausdorff:.17g} verdict={rep.verdict}")
    if cfg.expect_gate and not rep.verdict:
        return 2
    return 0


def _certify(cfg: RunConfig, domain, out: Path) -> int:
    variant = _VARIANTS[cfg.variant]
    if cfg.x0 is not None:
        x0 = cfg.x0
        p = cfg.p if cfg.p is not None else _default_p(domain, x0)
        targets = [(x0, p)]
    else:
        if cfg.p is not None:
            raise ParseError("--p needs --x0")
        pts = singular_set(domain, cfg.step)
        stride = max(1, math.ceil(len(pts) / MAX_AUTO_POINTS))
        targets = [(tuple(q), _default_p(domain, q)) for q in pts[::stride]]
    certs, rows = [], []
    for k, (x0, p) in enumerate(targets):
        cert = certificate(domain, x0, p, variant, reach=cfg.reach)
        rep = verify_certificate(domain, cert, cfg.n_samples, cfg.seed)
        entry = cert.as_dict()
        entry.update(min_margin=rep.min_margin, argmin=list(rep.argmin), n=rep.n, seed=rep.seed)
        certs.append(entry)
        rows.append((x0[0], x0[1], cert.K, rep.min_margin))
        if len(targets) == 1:
            io.write_csv(out / "margin.csv", ["x", "y", "d", "bound", "margin"],
                         [rep.points[:, 0], rep.points[:, 1], rep.d, rep.bound, rep.margin])
    io.write_report(out / "certificates.json", {"domain": domain.label, "certificates": certs})
    if len(targets) > 1:
        r = np.array(rows)
        io.write_csv(out / "margins_summary.csv", ["x0", "y0", "K", "min_margin"], list(r.T))
    worst = min(c["min_margin"] for c in certs)
    print(f"{domain.label}: {len(certs)} certificate(s), worst min_margin={worst:.17g}")
    for c in certs[:1]:
        print(f"  x0={c['x0']} K={c['K']:.17g} zeta={c['zeta']}")
    return 0


def _default_p(domain, x0):
    """Barycentre of the reachable gradients (0 for a continuum)."""
    ev = distance(domain, x0)
    if not isinstance(ev.grads, tuple):
        return (0.0, 0.0)
    g = np.asarray(ev.grads, float)
    return tuple(g.mean(axis=0)) if len(g) else (0.0, 0.0)


def _solution_summary(sol, domain, n_bins):
    cmp_ = compare_to_phi(sol, domain)
    fp = fit_web_profile(sol, domain, n_bins)
    return cmp_, fp, {
        "domain": domain.label, "h": sol.grid.h, "m": sol.grid.m,
        "iterations": sol.iterations, "residual_inf": sol.residual_inf,
        "converged": sol.converged, "linf_error": cmp_.linf_error, "l2_error": cmp_.l2_error,
        "web_deviation": fp.web_deviation, "boundary_slope_est": cmp_.boundary_slope_est,
        "n_bins": n_bins, "slope_left": fp.slope_left, "n_interior": sol.grid.n_interior,
    }


def _write_solution(sol, domain, out: Path, n_bins: int) -> dict:
    g = sol.grid
    rho, _ = inradius(domain)
    io.write_csv(out / "grid.csv", ["i", "j", "x", "y", "u", "d", "phi"],
                 [g.I, g.J, g.points[:, 0], g.points[:, 1], sol.u, g.d, phi_values(domain, g.points, rho)])
    xs, ys = g.axes()
    io.write_dense(out / "grid_dense.txt", xs, ys, sol.dense(), g.h)
    _, _, summary = _solution_summary(sol, domain, n_bins)
    io.write_report(out / "summary.json", summary)
    return summary


def _solve(cfg: RunConfig, domain, out: Path) -> int:
    sol = solve_dirichlet(domain, cfg.h, cfg.m, cfg.tol)
    s = _write_solution(sol, domain, out, cfg.n_bins)
    print(f"{domain.label}: h={s['h']:.17g} iterations={s['iterations']} "
          f"residual_inf={s['residual_inf']:.3e} linf_error={s['linf_error']:.6g}")
    return 0


def _load_or_solve(cfg: RunConfig, domain, out: Path):
    path = cfg.grid_file or (out / "grid.csv")
    if Path(path).exists():
        tab = io.read_csv(path)
        summary = out / "summary.json" if cfg.grid_file is None else Path(path).with_name("summary.json")
        h, m = cfg.h, cfg.m
        if summary.exists():
            meta = io.read_report(summary)
            h, m = meta["h"], meta["m"]
        return solution_from_values(domain, h, m, tab["i"], tab["j"], tab["u"])
    return solve_dirichlet(domain, cfg.h, cfg.m, cfg.tol)


def _compare(cfg: RunConfig, domain, out: Path) -> int:
    sol = _load_or_solve(cfg, domain, out)
    cmp_, fp, summary = _solution_summary(sol, domain, cfg.n_bins)
    io.write_csv(out / "profile.csv", ["t_mid", "f_hat", "oscillation", "g_reference"],
                 [fp.t_mid, fp.f_hat, fp.oscillation, fp.g_reference()])
    io.write_report(out / "compare.json", summary)
    print(f"{domain.label}: linf_error={cmp_.linf_error:.6g} web_deviation={fp.web_deviation:.6g} "
          f"boundary_slope_est={cmp_.boundary_slope_est:.6g} residual_inf={sol.residual_inf:.3e}")
    return 0


def _export(cfg: RunConfig, domain, out: Path) -> int:
    rho, _ = inradius(domain)
    (x0, x1), (y0, y1) = domain.bbox
    xs = np.arange(math.floor(x0 / cfg.h), math.ceil(x1 / cfg.h) + 1) * cfg.h
    ys = np.arange(math.floor(y0 / cfg.h), math.ceil(y1 / cfg.h) + 1) * cfg.h
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    inside = domain.contains(P).reshape(X.shape)
    d = np.where(inside, distance_values(domain, P).reshape(X.shape), np.nan)
    ph = np.where(inside, phi_values(domain, P, rho).reshape(X.shape), np.nan)
    io.write_dense(out / "contour_d.txt", xs, ys, d, cfg.h)
    io.write_dense(out / "contour_phi.txt", xs, ys, ph, cfg.h)
    grid_csv = cfg.grid_file or (out / "grid.csv")
    if Path(grid_csv).exists():
        sol = _load_or_solve(cfg, domain, out)
        gx, gy = sol.grid.axes()
        io.write_dense(out / "contour_u.txt", gx, gy, sol.dense(), sol.grid.h)
    print(f"{domain.label}: wrote contour dumps to {out}")
    return 0


_COMMANDS = {
    "analyze": _analyze, "certify": _certify, "solve": _solve,
    "compare": _compare, "export": _export,
}


def run(cfg: RunConfig) -> int:
    cfg.validate()
    domain = io.load_domain(cfg.domain_file)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[cfg.command](cfg, domain, out)


def main(argv=None) -> int:
    threads = os.environ.get(THREADS_ENV)
    if threads:
        import numba

        try:
            numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
        except ValueError:
            pass
    ns = build_parser().parse_args(argv)
    try:
        return run(config_from_args(ns))
    except (InfWebError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
