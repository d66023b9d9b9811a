"""Build and check distance certificates at singular points of the square and triangle."""

import math

from infweb import certificate, distance, verify_certificate
from infweb.io import load_domain
from pathlib import Path

HERE = Path(__file__).parent / "domains"

square = load_domain(HERE / "square.yaml")
triangle = load_domain(HERE / "triangle.yaml")

ev = distance(square, (0, 0))
print("square at origin: d =", ev.value, "gradients =", ev.grads)
c = certificate(square, (0, 0), (0, -1 / math.sqrt(2)), "convex")
print(f"  K = {c.K:.12f}  zeta = {c.zeta.round(12)}  lambdas = {c.lambdas}")
upper = verify_certificate(square, c, 10_000, 42, region=lambda P: P[:, 1] >= -math.sqrt(2))
print(f"  upper half: min margin {upper.min_margin:.2e}, max margin {upper.margin.max():.2e} (equality)")
whole = verify_certificate(square, c, 10_000, 42)
print(f"  whole square: min margin {whole.min_margin:.2e}")

c = certificate(triangle, (0, 0), (0, 0), "convex")
print(f"triangle incentre: K = {c.K:.12f}  zeta = {c.zeta.round(12)}")
for variant in ("convex", "generic"):
    r = verify_certificate(triangle, certificate(triangle, (0, 0), (0, 0), variant), 10_000, 42)
    print(f"  {variant:8s} min margin {r.min_margin:.3e} at {tuple(round(v, 4) for v in r.argmin)}")
