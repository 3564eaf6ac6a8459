"""Eigenpolynomial roots approaching the support of the limiting measure.

For the quartic potential with coupling gamma = 0 the operator keeps
polynomials of degree m invariant.  Rescaling the roots of an eigenpolynomial
by 1/sqrt(m) and comparing with the support of the measure whose parameter
delta is estimated from lambda / m^(3/2) shows the distance shrinking in m.
"""

import math

from qdgraph import measure, spectral

if __name__ == "__main__":
    ms = [10, 20, 40, 80]
    for selector in ("max", "fraction:0.8"):
        print(f"selector {selector}")
        for m in ms:
            sol = spectral.spectrum(spectral.SpectralProblem(m, 0.0))
            k = spectral.select_index(selector, m)
            delta = float(sol.eigenvalues[k].real) / m**1.5
            sup = measure.support(0.0, delta)
            hd = measure.hausdorff_to_support(sol.roots(k) / math.sqrt(m), sup)
            print(f"    m = {m:3d}  k = {k:3d}  delta estimate {delta:.6f}  Hausdorff {hd:.4f}")
        table = spectral.delta_estimates(ms, 0.0, selector)
        print("    lambda/m^(3/2):", ", ".join(f"{v:.5f}" for v in table.scaled_32))
        print("    lambda/m^(4/3):", ", ".join(f"{v:.5f}" for v in table.scaled_43))
        print(f"    stabilizing exponent: {table.stabilizing}")
    print(f"\nlargest-eigenvalue limit 16/(3 sqrt 3) = {16 / (3 * math.sqrt(3)):.6f}")
