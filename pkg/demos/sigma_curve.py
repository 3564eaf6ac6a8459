"""The curve Sigma separating the two short-trajectory topologies.

Sigma is traced by predictor-corrector continuation of S(a) = 0 from a = 1.
The script prints the tangent angle where the curve leaves 1, the argument
of points far out (which approaches 90 degrees), and a few sample points.
The leaving angle is compared with the root of the local model near 1.
"""

import numpy as np

from qdgraph.periods import blowup_tangent_angle, classify_apex, trace_sigma

if __name__ == "__main__":
    curve = trace_sigma(max_abs=1000.0)
    print(f"traced {len(curve.points)} points, complete = {curve.complete}")
    print(f"max |S| on the curve: {np.max(np.abs(curve.residuals)):.2e}")
    print(f"chord angle leaving 1: {curve.tangent_angle_at_one():.4f} deg")
    print(f"local model angle:     {blowup_tangent_angle():.4f} deg")
    for r in (2, 10, 100, 1000):
        print(f"arg z at |z| = {r:>4}: {curve.angle_at_modulus(r):.4f} deg")
    print("\nsample points and a probe on either side:")
    for z in curve.points[:: max(1, len(curve.points) // 8)][1:]:
        left, right = classify_apex(z - 0.05).region, classify_apex(z + 0.05).region
        print(f"    {z.real:10.5f} + {z.imag:10.5f}i   left: {left}, right: {right}")
