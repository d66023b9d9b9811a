"""Grid refinement for -Δ∞u = 1: the disk and stadium solves approach phi, the square does not.

Pass ``--fine`` to include h = 1/64 (about 40 s).
"""

import sys
import time
from pathlib import Path

from infweb import compare_to_phi, fit_web_profile, solve_dirichlet
from infweb.io import load_domain

HERE = Path(__file__).parent / "domains"
ks = (16, 32, 64) if "--fine" in sys.argv else (16, 32)

print(f"{'domain':9s} {'h':>6s} {'linf vs phi':>12s} {'web dev':>9s} {'slope':>7s} {'residual':>9s} {'time':>6s}")
for name in ("disk.yaml", "stadium.json", "square.yaml"):
    dom = load_domain(HERE / name)
    for k in ks:
        t = time.perf_counter()
        sol = solve_dirichlet(dom, 1 / k)
        cmp_ = compare_to_phi(sol, dom)
        dev = fit_web_profile(sol, dom, n_bins=k // 2).web_deviation
        print(f"{dom.label:9s} {'1/' + str(k):>6s} {cmp_.linf_error:12.5f} {dev:9.5f} "
              f"{cmp_.boundary_slope_est:7.4f} {sol.residual_inf:9.1e} {time.perf_counter() - t:5.1f}s")
