import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from qdgraph import measure
from qdgraph.errors import DomainError, NoMeasure
from qdgraph.periods import snap_to_sigma

Z = sp.symbols("z")

REAL = (0.0, 1.0)  # q = z^3 - 4z - 1: three real zeros
GRAPH = (0.0, 5.0)  # q = z^3 - 4z - 5: one real zero, two complex


def _sympy_discriminant(g, d):
    """[DERIVED] oracle: B^2 - 4AC for z C^2 - (z^2 + g z/2) C + (z + d/4)."""
    A, B, Cc = Z, -(Z**2 + g * Z / 2), Z + d / 4
    return sp.Poly(sp.expand(B**2 - 4 * A * Cc), Z)


def _as_fractions(poly):
    return [Fraction(int(sp.fraction(c)[0]), int(sp.fraction(c)[1])) for c in reversed(poly.all_coeffs())]


@pytest.fixture(scope="module")
def real_sup():
    return measure.support(*REAL)


@pytest.fixture(scope="module")
def graph_sup():
    return measure.support(*GRAPH)


class TestDiscriminant:
    @pytest.mark.parametrize("g,d", [(0, 1), (-6, Fraction(1, 2)), (Fraction(3, 7), -5), (2, 0)])
    def test_against_sympy(self, g, d):
        ref = _as_fractions(_sympy_discriminant(sp.Rational(g), sp.Rational(d)))
        got = list(measure.discriminant_poly(Fraction(g), Fraction(d)).coeffs)
        assert got == ref[: len(got)] and all(c == 0 for c in ref[len(got):])
        assert measure.delta_poly(Fraction(g), Fraction(d)) == measure.discriminant_poly(Fraction(g), Fraction(d))

    def test_printed_form_gap(self):
        # [DERIVED] printed minus true discriminant is exactly -3 delta z
        g, d = Fraction(3, 2), Fraction(5, 3)
        gap = measure.printed_delta_poly(g, d) - measure.delta_poly(g, d)
        assert gap.coeffs == (0, -3 * d)

    def test_algebraic_residual_both_roots(self):
        g, d = 0.7, -1.3
        sup = measure.support(g, d)
        for z in (2 + 1j, -3 + 0.5j, 0.5 - 2j):
            f = measure.support_branch(sup, z)
            for C in ((2 * z + g - 2 * f) / 4, (2 * z + g + 2 * f) / 4):
                assert abs(measure.algebraic_residual(z, C, g, d)) <= 1e-12 * (1 + abs(z) ** 2)


class TestSupport:
    def test_real_regime_intervals(self, real_sup):
        # [DERIVED] support = intervals where q(x)/x < 0 among sorted {0, r1, r2, r3}
        assert real_sup.regime == "real"
        roots = np.sort(np.roots([1, 0, -4, -1]).real)
        pts = sorted([0.0, *roots])
        ends = sorted(tuple(sorted(a.ends)) for a in real_sup.arcs)
        np.testing.assert_allclose(ends, [(pts[0], pts[1]), (pts[2], pts[3])], atol=1e-12)

    def test_graph_regime(self, graph_sup):
        assert graph_sup.regime == "graph"
        assert len(graph_sup.arcs) == 2

    def test_degenerate(self):
        with pytest.raises(NoMeasure) as exc:
            measure.support(0.0, 0.0)
        assert exc.value.reason == "Degenerate"

    def test_three_shorts(self):
        # Rotating the Sigma configuration z -> r z with r^4 > 0 preserves trajectories:
        # zeros r {1, b, conj b} give gamma = -r(1 + 2x), delta = r^3 |b|^2.
        b = snap_to_sigma(1.55 + 2j)
        x, y = b.real, b.imag
        r = 4j / math.sqrt(4 * x + 4 * y * y - 1)
        with pytest.raises(NoMeasure) as exc:
            measure.support(-r * (1 + 2 * x), r**3 * abs(b) ** 2)
        assert exc.value.reason == "ThreeShorts"

    def test_rotated_apex_two_i(self):
        # Same rotation for apex 2i: support is r [0, 1] plus the arc through 2i r and -2i r.
        r = 4j / math.sqrt(15)
        sup = measure.support(-r, 4 * r**3)
        assert sup.regime == "graph"
        assert abs(measure.total_mass(sup) - 1) <= 1e-6
        ends = [set(np.round([a.points[0], a.points[-1]], 6)) for a in sup.arcs]
        assert {0j, complex(np.round(r, 6))} in ends


class TestMass:
    @pytest.mark.parametrize("params", [REAL, GRAPH, (1.0, -0.5), (-2.0, 3.0)])
    def test_total_mass_one(self, params):
        sup = measure.support(*params)
        assert abs(measure.total_mass(sup) - 1) <= 1e-6

    @pytest.mark.parametrize("params", [REAL, GRAPH])
    def test_contour_oracle(self, params):
        # [DERIVED] oracle: (1/2 pi i) times the contour integral of C over |z| = 10
        sup = measure.support(*params)
        n = 2048
        th = 2 * np.pi * np.arange(n) / n
        z = 10 * np.exp(1j * th)
        C = np.array([measure.cauchy_closed_form(w, *params, sup) for w in z])
        val = np.sum(C * 1j * z) * (2 * np.pi / n) / (2j * np.pi)
        assert val == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("params", [REAL, GRAPH])
    def test_z_times_C_at_infinity(self, params):
        sup = measure.support(*params)
        g, d = params
        for z in (1e6, 1e6j, -1e6 + 1e6j):
            # [DERIVED] f = z + g/2 - 2/z + ..., so z C = 1 + (d/4 - g/2)/z + O(1/z^2)
            zc = z * measure.cauchy_closed_form(z, *params, sup)
            assert zc == pytest.approx(1.0 + (d / 4 - g / 2) / z, abs=1e-11)

    def test_empty_support(self):
        assert measure.total_mass(None) == 0


class TestDensity:
    @pytest.mark.parametrize("which", ["real", "graph"])
    def test_against_limit_oracle(self, which, real_sup, graph_sup):
        # [DERIVED] oracle: support branch evaluated 1e-8 to the left of the arc
        sup = real_sup if which == "real" else graph_sup
        for arc in sup.arcs:
            for j in (len(arc.points) // 3, len(arc.points) // 2):
                if j == 0 or j == len(arc.points) - 1:
                    j = 1
                t = arc.points[j]
                T = arc.points[j + 1] - arc.points[j - 1]
                T /= abs(T)
                fp = measure.support_branch(sup, t + 1j * T * 1e-8)
                ref = (fp * T / (2j * math.pi)).real
                assert measure.density(sup, t) == pytest.approx(ref, rel=1e-3, abs=1e-6)

    def test_real_densities(self, real_sup, graph_sup):
        for sup in (real_sup, graph_sup):
            for arc in sup.arcs:
                assert np.all(np.isreal(arc.density_samples))
            assert sup.imag_defect == 0

    def test_off_support(self, real_sup):
        with pytest.raises(DomainError):
            measure.density(real_sup, 5 + 5j)

    def test_endpoint(self, real_sup):
        with pytest.raises(DomainError):
            measure.boundary_value(real_sup, real_sup.arcs[0].points[0])


class TestCauchy:
    @pytest.mark.parametrize("z", [2 + 1j, -1 + 0.5j, 3j, 5.0, -0.1 - 0.7j])
    def test_numeric_vs_closed_real(self, real_sup, z):
        assert measure.cauchy_numeric(real_sup, z) == pytest.approx(
            measure.cauchy_closed_form(z, *REAL, real_sup), abs=1e-9
        )

    @pytest.mark.parametrize("z", [2 + 1j, -3 + 0.2j, 0.5 - 2j])
    def test_numeric_vs_closed_graph(self, graph_sup, z):
        assert measure.cauchy_numeric(graph_sup, z) == pytest.approx(
            measure.cauchy_closed_form(z, *GRAPH, graph_sup), abs=1e-9
        )

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-5, 5), st.floats(0.05, 5))
    def test_conjugation(self, x, y):
        sup = measure.support(*REAL)
        z = complex(x, y)
        assert measure.cauchy_closed_form(z.conjugate(), *REAL, sup) == pytest.approx(
            measure.cauchy_closed_form(z, *REAL, sup).conjugate(), abs=1e-12
        )

    def test_on_support(self, real_sup):
        t = real_sup.arcs[0].points[1]
        with pytest.raises(DomainError):
            measure.cauchy_closed_form(t, *REAL, real_sup)
        with pytest.raises(DomainError):
            measure.cauchy_numeric(real_sup, t)

    def test_near_support_warns(self, real_sup):
        t = real_sup.arcs[0].points[1] + 1e-4j
        with pytest.warns(measure.NearSupport):
            measure.cauchy_numeric(real_sup, t)

    def test_origin(self, real_sup):
        with pytest.raises(DomainError):
            measure.cauchy_closed_form(0, *REAL, real_sup)


class TestHausdorff:
    def test_vertices_close(self, graph_sup):
        pts = np.concatenate([a.points for a in graph_sup.arcs])
        assert measure.hausdorff_to_support(pts, graph_sup) <= 0.05

    def test_far_point(self, real_sup):
        assert measure.hausdorff_to_support([100.0], real_sup) > 90

    def test_empty(self, real_sup):
        with pytest.raises(DomainError):
            measure.hausdorff_to_support([], real_sup)
