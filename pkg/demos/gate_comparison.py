"""Cut locus against high ridge: the stadium and disk pass the gate, the square does not."""

from pathlib import Path

from infweb import gate
from infweb.io import load_domain

HERE = Path(__file__).parent / "domains"

for name in ("disk.yaml", "stadium.json", "square.yaml", "triangle.yaml"):
    dom = load_domain(HERE / name)
    g = gate(dom, 0.01)
    print(f"{dom.label:9s} rho={g.rho:.4f}  cut pts={len(g.cut_points):5d}  "
          f"high pts={len(g.high_points):4d}  hausdorff={g.hausdorff:.4f}  verdict={g.verdict}")
