"""Critical graphs for the five anchor apexes.

For each apex the script classifies the region, traces the critical graph
and lists the short trajectories.  Apexes on either side of the curve Sigma
join the conjugate pair a, conj(a) by a short that crosses the real axis
to the right of 1 (region Omega1) or to the left of 0 (region Omega2).
SVG drawings land in ``demos/out``.
"""

import pathlib

import numpy as np

from qdgraph.periods import classify_apex, snap_to_sigma
from qdgraph.qdiff import from_apex
from qdgraph.render import PlotDocument, to_svg
from qdgraph.tracer import build_critical_graph

OUT = pathlib.Path(__file__).with_name("out")


def describe(a: complex) -> None:
    cls = classify_apex(a)
    g = build_critical_graph(from_apex(a))
    crit = g.critical()
    print(f"apex {a}: {cls.region} (S = {cls.S:+.3e}), {len(g.shorts)} shorts")
    for s in g.shorts:
        u, v = (crit[e].location for e in s.endpoints)
        line = f"    {u:.4f} -> {v:.4f}"
        if u.imag * v.imag < 0:
            cross = s.points[np.argmin(np.abs(s.points.imag))].real
            line += f"   crosses the real axis near {cross:+.3f}"
        print(line)
    doc = PlotDocument()
    shorts = {s.segment for s in g.shorts}
    for i, seg in enumerate(g.segments):
        doc.add_polyline(f"seg{i:03d}", "short" if i in shorts else "infinite", seg.points)
    for ident, cp in crit.items():
        if cp.is_finite:
            doc.add_marker(ident, "critical", cp.location)
    OUT.mkdir(exist_ok=True)
    (OUT / f"graph_{a.real:.7g}_{a.imag:g}.svg").write_text(to_svg(doc))


if __name__ == "__main__":
    for a in (1.6 + 2j, 1.8 + 2j, 0.5 + 2j, 2j, 1.55 + 2j):
        describe(a)
    b = snap_to_sigma(1.55 + 2j)
    print(f"\nOn Sigma at the same height ({b.real:.7f}+2i) the apex joins 1 from both sides:")
    describe(b)
