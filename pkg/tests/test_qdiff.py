import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdgraph.algebra import Poly
from qdgraph.errors import BranchJump, DegreeError, DomainError, NotApplicable
from qdgraph.qdiff import (
    BranchState,
    QuadDifferential,
    critical_points,
    d_directions,
    from_apex,
    from_parameters,
    from_roots_qd,
    initial_state,
    normalize_to_unit_root,
    radial_sqrt,
    ray_fan,
    sqrt_q_over_z,
    transport,
)


def _scan_fan(qd, z0, eps=1e-6, n=20000):
    """Numeric oracle: angles where Q(z0 + eps e^{i t}) e^{2 i t} is real and negative."""
    th = np.linspace(0, 2 * np.pi, n, endpoint=False)
    v = qd.Q(z0 + eps * np.exp(1j * th)) * np.exp(2j * th)
    im = v.imag
    out = []
    for i in range(n):
        j = (i + 1) % n
        if im[i] == 0 or im[i] * im[j] < 0:
            lo, hi = th[i], th[i] + 2 * np.pi / n
            f = lambda t: (qd.Q(z0 + eps * cmath.exp(1j * t)) * cmath.exp(2j * t)).imag
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if f(lo) * f(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            t = 0.5 * (lo + hi)
            if (qd.Q(z0 + eps * cmath.exp(1j * t)) * cmath.exp(2j * t)).real < 0:
                out.append(t % (2 * np.pi))
    return sorted(out)


def _circ_match(a, b, tol):
    a, b = sorted(a), sorted(b)
    assert len(a) == len(b)
    for x in a:
        d = min(abs((x - y + np.pi) % (2 * np.pi) - np.pi) for y in b)
        assert d <= tol


class TestConstruction:
    def test_from_parameters_exact(self):
        # [DERIVED] (gamma^2 - 16)/4 with gamma = 2: -3; constant term -delta
        qd = from_parameters(2, Fraction(1, 3))
        assert qd.q.coeffs == (Fraction(-1, 3), Fraction(-3), 2, 1)
        assert qd.params == (2, Fraction(1, 3))

    def test_from_parameters_printed(self):
        qd = from_parameters(0, 1, convention="printed")
        assert qd.q.coeffs[0] == -4

    def test_unknown_convention(self):
        with pytest.raises(DomainError):
            from_parameters(0, 1, convention="other")

    def test_float_parameters_are_complex(self):
        qd = from_parameters(0.5, 1.0)
        assert all(isinstance(c, complex) for c in qd.q.coeffs[:3])

    @pytest.mark.parametrize("a", [1.0, 2 - 1j, 0j])
    def test_from_apex_rejects_lower_half(self, a):
        with pytest.raises(DomainError):
            from_apex(a)

    def test_from_apex_zeros_exact(self):
        qd = from_apex(1.6 + 2j)
        assert set(np.round(qd.roots, 14)) == {1, 1.6 + 2j, 1.6 - 2j}

    def test_non_cubic(self):
        with pytest.raises(DegreeError):
            QuadDifferential(Poly((1, 0, 1)))
        with pytest.raises(DegreeError):
            from_roots_qd([1, 2])

    def test_non_monic(self):
        with pytest.raises(DomainError):
            QuadDifferential(Poly((1, 0, 0, 2)))

    def test_inconsistent_zeros(self):
        with pytest.raises(DomainError):
            QuadDifferential(Poly((0, 0, 0, 1)), zeros=(1, 2, 3))

    def test_normalize(self):
        # [DERIVED] zeros 2, 3+4i, 3-4i rescale by 2 to apex 1.5+2i
        r, a = normalize_to_unit_root(from_roots_qd([2, 3 + 4j, 3 - 4j]))
        assert r == pytest.approx(2, abs=1e-12)
        assert a == pytest.approx(1.5 + 2j, abs=1e-12)

    @pytest.mark.parametrize("roots", [[1, 2, 3], [-1, 1j, -1j]])
    def test_normalize_not_applicable(self, roots):
        with pytest.raises(NotApplicable):
            normalize_to_unit_root(from_roots_qd(roots))


class TestCriticalPoints:
    def test_generic(self):
        cps = critical_points(from_apex(1.6 + 2j))
        kinds = [c.kind for c in cps]
        assert kinds.count("zero") == 3 and kinds.count("pole") == 1 and kinds[-1] == "infinity"
        assert cps[-1].order == -6
        assert not any(c.degenerate for c in cps)

    def test_double_zero(self):
        cps = critical_points(from_roots_qd([1, 2, 2]))
        z = [c for c in cps if c.kind == "zero"]
        assert sorted(c.mult for c in z) == [1, 2]
        assert any(c.degenerate for c in z)

    def test_merged_with_pole(self):
        cps = critical_points(from_roots_qd([0, 1, 2]))
        merged = [c for c in cps if c.kind == "merged"]
        assert len(merged) == 1 and merged[0].degenerate and merged[0].order == 0


class TestRayFans:
    @pytest.mark.parametrize("a", [1.6 + 2j, 1.8 + 2j, 0.5 + 2j, 2j, -1 + 0.3j])
    def test_against_angle_scan(self, a):
        # [DERIVED] oracle: direct sign scan of Q e^{2 i theta} on a small circle
        qd = from_apex(a)
        for cp in qd.finite_critical():
            _circ_match(ray_fan(cp, qd), _scan_fan(qd, cp.location), 1e-4)

    def test_counts(self):
        qd = from_roots_qd([1, 2, 2])
        for cp in qd.finite_critical():
            expected = 1 if cp.kind == "pole" else cp.mult + 2
            assert len(ray_fan(cp, qd)) == expected

    def test_pole_single_ray_real_axis(self):
        # [DERIVED] q(0) = -|a|^2 < 0 for real-coefficient q with root 1: ray along arg pi - pi = 0
        qd = from_apex(1.6 + 2j)
        pole = [c for c in qd.finite_critical() if c.kind == "pole"][0]
        assert ray_fan(pole, qd) == [pytest.approx(0.0, abs=1e-15)]

    def test_orthogonal_rotation(self):
        qd = from_apex(1.6 + 2j)
        cp = qd.finite_critical()[0]
        h, o = ray_fan(cp, qd), ray_fan(cp, qd, kind="orthogonal")
        _circ_match([(x - np.pi / 3) % (2 * np.pi) for x in h], o, 1e-12)

    def test_directions_at_infinity(self):
        d = d_directions()
        # [TRIVIAL]
        assert d["horizontal"] == pytest.approx([np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4])
        assert d["orthogonal"] == pytest.approx([0, np.pi / 2, np.pi, 3 * np.pi / 2])

    def test_infinity_rejected(self):
        qd = from_apex(2j)
        with pytest.raises(DomainError):
            ray_fan(critical_points(qd)[-1], qd)


class TestBranch:
    def test_radial_asymptotics(self):
        # [DERIVED] z prod sqrt(1 - r/z) = z - (sum r)/2 + O(1/z); sum r = 1 + 2*1.6 = 4.2
        qd = from_apex(1.6 + 2j)
        for z in (1e4, 1e4j, -1e4 + 3e3j):
            assert radial_sqrt(qd, z) - z == pytest.approx(-2.1, abs=1e-3)

    def test_radial_squares_to_Q(self):
        qd = from_apex(0.5 + 2j)
        z = np.array([3 + 1j, -2 - 5j, 0.1j])
        np.testing.assert_allclose(radial_sqrt(qd, z) ** 2, qd.Q(z), rtol=1e-13)

    @pytest.mark.parametrize("a", [1.6 + 2j, 2j])
    def test_continuation_vs_phase_tracking(self, a):
        # [DERIVED] oracle: 10^4-point sign tracking of principal roots along a loop
        qd = from_apex(a)
        path = 3.5 * np.exp(1j * np.linspace(0.3, 0.3 + 2 * np.pi, 10001))
        ref = np.sqrt(qd.Q(path))
        for k in range(1, len(ref)):
            if abs(ref[k] - ref[k - 1]) > abs(ref[k] + ref[k - 1]):
                ref[k:] *= -1
        state = initial_state(qd, path[0])
        assert state.value == pytest.approx(ref[0])
        for k in range(100, len(path), 100):
            state = transport(qd, state, path[k])
            assert state.value == pytest.approx(ref[k], rel=1e-12)

    def test_loop_around_one_zero_flips_sign(self):
        qd = from_apex(2j)
        state = initial_state(qd, 1.3 + 0j)
        start = state.value
        for t in np.linspace(0, 2 * np.pi, 41)[1:]:
            state = transport(qd, state, 1 + 0.3 * cmath.exp(1j * t))
        assert state.value == pytest.approx(-start, rel=1e-12)

    def test_branch_jump(self):
        qd = from_apex(2j)
        state = initial_state(qd, 1.3 + 0j)
        with pytest.raises(BranchJump):
            sqrt_q_over_z(qd, 0.7 + 0j, state)

    def test_zero_rejected(self):
        qd = from_apex(2j)
        with pytest.raises(BranchJump):
            sqrt_q_over_z(qd, 1.0, BranchState(1.1, complex(radial_sqrt(qd, 1.1))))


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-3, 3),
    st.floats(0.2, 3),
    st.floats(0, 2 * math.pi),
    st.floats(0.5, 6),
)
def test_conjugation_symmetry_of_Q(x, y, t, r):
    qd = from_apex(complex(x, y))
    z = r * cmath.exp(1j * t)
    assert qd.Q(z.conjugate()) == pytest.approx(qd.Q(z).conjugate(), rel=1e-12, abs=1e-12)
