"""The measure nu solving the algebraic equation for its Cauchy transform.

In the real regime the support is a pair of real intervals; in the graph
regime it is a tree of trajectory arcs, and individual arc masses can be
negative while the total stays 1.  The numeric Cauchy transform over the
support is compared with the closed form at a few points.
"""

from qdgraph import measure

if __name__ == "__main__":
    for gamma, delta in ((0.0, 1.0), (0.0, 5.0), (1.0, -0.5)):
        sup = measure.support(gamma, delta)
        print(f"gamma = {gamma}, delta = {delta}: regime {sup.regime}")
        for arc in sup.arcs:
            a, b = arc.points[0], arc.points[-1]
            print(f"    arc {a:.4f} .. {b:.4f}   mass {arc.mass.real:+.6f}")
        print(f"    total mass {measure.total_mass(sup).real:.12f}")
        for z in (2 + 1j, -1 + 0.5j, 3j):
            num = measure.cauchy_numeric(sup, z)
            closed = measure.cauchy_closed_form(z, gamma, delta, sup)
            print(f"    C({z}) numeric {num:.10f}  closed form {closed:.10f}")
