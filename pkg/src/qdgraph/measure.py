"""
The limit measure attached to the algebraic equation

    z C^2 - (z^2 + gamma z/2) C + (z + delta/4) = 0.

Its discriminant is ``Delta(z) = z q(z)`` with the cubic
``q = z^3 + gamma z^2 + (gamma^2 - 16)/4 z - delta``, so the root

    C(z) = (2 z + gamma - 2 f(z)) / 4,   f = sqrt(q(z)/z) ~ z at infinity,

is the Cauchy transform of a measure ``nu`` exactly when the cuts of ``f`` can
be laid along short trajectories of ``-q(z)/z dz^2``.  Across such a cut
``f`` changes sign, so by the Sokhotski-Plemelj formula

    d nu(t) = f_+(t) dt / (2 pi i),

where ``f_+`` is the boundary value from the left of the oriented arc.  The
expression is unchanged when the orientation is reversed.

Two constructions of the support are used.  When every zero of ``q`` is
real, the horizontal trajectories on the real line are the intervals where
``q(x)/x < 0`` and the support is read off exactly.  Otherwise the critical
graph is traced and its short trajectories are taken.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .algebra import Poly
from .errors import BranchJump, DegenerateError, DomainError, NoMeasure
from .qdiff import BranchState, QuadDifferential, critical_points, from_parameters, radial_sqrt, transport
from .quadrature import branch_line_integral
from .tracer import Budget, build_critical_graph

__all__ = [
    "NearSupport",
    "SupportArc",
    "MeasureSupport",
    "discriminant_poly",
    "delta_poly",
    "printed_delta_poly",
    "support",
    "support_branch",
    "boundary_value",
    "density",
    "total_mass",
    "cauchy_closed_form",
    "cauchy_numeric",
    "algebraic_residual",
    "hausdorff_to_support",
]

NORMAL_OFFSET = 1e-3
ON_SUPPORT_TOL = 1e-9
NEAR_SUPPORT = 1e-3


class NearSupport(UserWarning):
    """A Cauchy transform was requested within ``1e-3`` of the support."""


# ---------------------------------------------------------------------------
# Polynomial identities
# ---------------------------------------------------------------------------


def _exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return v


def discriminant_poly(gamma, delta) -> Poly:
    """Quadratic-formula discriminant ``(z^2 + gamma z/2)^2 - 4 z (z + delta/4)``.

    Built by polynomial arithmetic, so exact inputs give exact coefficients.
    """
    g, d = _exact(gamma), _exact(delta)
    half = Fraction(1, 2) if isinstance(g, Fraction) else 0.5
    quarter = Fraction(1, 4) if isinstance(d, Fraction) else 0.25
    b = Poly((0, g * half, 1))
    lin = Poly((d * quarter, 1))
    return b * b - Poly((0, 4)) * lin


def delta_poly(gamma, delta) -> Poly:
    """``Delta(z) = z (z^3 + gamma z^2 + (gamma^2 - 16)/4 z - delta)`` from its closed form."""
    g, d = _exact(gamma), _exact(delta)
    four = Fraction(4) if isinstance(g, Fraction) else 4.0
    return Poly((0, -d, (g * g - 16) / four, g, 1))


def printed_delta_poly(gamma, delta) -> Poly:
    """``(z/4)(4 z^3 + 4 gamma z^2 + (gamma^2 - 16) z - 16 delta)``.

    This is the other normalization of the constant term that circulates
    for this problem; it differs from :func:`discriminant_poly` by ``3 delta z``.
    """
    g, d = _exact(gamma), _exact(delta)
    four = Fraction(4) if isinstance(g, Fraction) else 4.0
    return Poly((0, -4 * d, (g * g - 16) / four, g, 1))


def algebraic_residual(z, C, gamma, delta) -> complex:
    """``z C^2 - (z^2 + gamma z/2) C + (z + delta/4)``."""
    return z * C * C - (z * z + gamma * z / 2) * C + (z + delta / 4)


# ---------------------------------------------------------------------------
# Support
# ---------------------------------------------------------------------------


@dataclass
class SupportArc:
    """One oriented support arc.

    ``points`` is a polyline whose first and last entries are the exact
    critical endpoints.  ``anchor`` holds the boundary value ``f_+`` at the
    vertex ``anchor_index``.
    """

    points: np.ndarray
    ends: tuple
    kinds: tuple
    anchor_index: int = 0
    anchor: Optional[BranchState] = None
    mass: complex = 0j
    samples: np.ndarray = field(default_factory=lambda: np.zeros(0))
    density_samples: np.ndarray = field(default_factory=lambda: np.zeros(0))
    imag_defect: float = 0.0
    tangent_defect: float = 0.0

    @property
    def length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.points))))


@dataclass
class MeasureSupport:
    """Support arcs, their densities and masses for one ``(gamma, delta)``."""

    gamma: complex
    delta: complex
    qd: QuadDifferential
    arcs: list
    regime: str  # "real" or "graph"

    @property
    def masses(self) -> list:
        return [a.mass for a in self.arcs]

    @property
    def imag_defect(self) -> float:
        return max((a.imag_defect for a in self.arcs), default=0.0)

    def polylines(self) -> list:
        return [a.points for a in self.arcs]


def _real_intervals(qd: QuadDifferential):
    pts = sorted([0.0] + [float(r.real) for r in qd.roots])
    return [(pts[0], pts[1]), (pts[2], pts[3])]


def _kind(x: complex) -> str:
    return "pole" if x == 0 else "zero"


def _build_support(gamma, delta, budget: Budget) -> MeasureSupport:
    qd = from_parameters(gamma, delta)
    if qd.degenerate:
        raise NoMeasure("Degenerate", "repeated zeros of Delta")
    roots = qd.roots
    if qd.is_real and np.all(roots.imag == 0):
        arcs = []
        for a, b in _real_intervals(qd):
            pts = np.array([a, 0.5 * (a + b), b], dtype=complex)
            arcs.append(SupportArc(pts, (a, b), (_kind(a), _kind(b))))
        regime = "real"
    else:
        try:
            graph = build_critical_graph(qd, budget)
        except DegenerateError as exc:
            raise NoMeasure("Degenerate", str(exc)) from None
        shorts = graph.shorts
        if len(shorts) == 3:
            raise NoMeasure("ThreeShorts", "three short trajectories (apex on the curve Sigma)")
        if len(shorts) != 2:
            if not graph.complete:
                raise NoMeasure("Incomplete", "critical graph did not close within the budget")
            raise NoMeasure("ShortCount", f"{len(shorts)} short trajectories")
        crit = graph.critical()
        arcs = []
        for s in shorts:
            pts = np.asarray(s.points, dtype=complex).copy()
            if len(pts) < 3:
                pts = np.array([pts[0], 0.5 * (pts[0] + pts[-1]), pts[-1]])
            kinds = tuple("pole" if crit[e].kind == "pole" else "zero" for e in s.endpoints)
            arcs.append(SupportArc(pts, s.endpoints, kinds))
        regime = "graph"
    sup = MeasureSupport(gamma, delta, qd, arcs, regime)
    for arc in sup.arcs:
        _fill_arc(sup, arc)
    return sup


@lru_cache(maxsize=64)
def _cached_support(gamma, delta, budget):
    return _build_support(gamma, delta, budget)


def support(gamma, delta, budget: Budget = Budget()) -> MeasureSupport:
    """Support of the limit measure for ``(gamma, delta)``.

    Raises
    ------
    NoMeasure
        ``Degenerate`` for repeated zeros, ``ThreeShorts`` for the Sigma
        configuration, ``ShortCount`` for any other count different from two,
        ``Incomplete`` when the critical graph ran out of budget.
    """
    return _cached_support(gamma, delta, budget)


# ---------------------------------------------------------------------------
# Branches and boundary values
# ---------------------------------------------------------------------------


def _crossings(z: complex, arcs, reach: float) -> int:
    # Segment from z to z * s_max against every polyline edge.
    if z == 0:
        raise DomainError("z = 0 is the pole")
    far = z * (reach / abs(z)) if abs(z) < reach else z * 2.0
    p, r = z, far - z
    count = 0
    for arc in arcs:
        a = arc.points[:-1]
        e = np.diff(arc.points)
        cross = (r.real * e.imag - r.imag * e.real)
        d = a - p
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (d.real * e.imag - d.imag * e.real) / cross
            u = (d.real * r.imag - d.imag * r.real) / cross
        hit = (cross != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u < 1)
        count += int(np.count_nonzero(hit))
    return count


def _distance_to_arcs(z: complex, arcs) -> float:
    best = math.inf
    for arc in arcs:
        a = arc.points[:-1]
        e = np.diff(arc.points)
        ee = np.abs(e) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.clip(np.real((z - a) * np.conj(e)) / np.where(ee == 0, 1, ee), 0, 1)
        best = min(best, float(np.min(np.abs(a + t * e - z))))
    return best


def support_branch(sup: MeasureSupport, z: complex) -> complex:
    """Branch of ``sqrt(q(z)/z)`` asymptotic to ``z`` whose cuts are the support arcs.

    The radial branch is continued from infinity along the ray through ``z``;
    each crossing of that ray with a support arc flips the sign.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("z = 0 is the pole")
    if sup.regime == "real" and z.imag == 0:
        # Real points off the support: take the limit from above, where
        # no ray is collinear with the intervals.
        zp = z + 1j * 1e-9 * max(1.0, abs(z))
        ref = complex(radial_sqrt(sup.qd, zp))
        w = cmath.sqrt(sup.qd.Q(z))
        return w if abs(w - ref) <= abs(w + ref) else -w
    reach = 2.0 * max(float(np.max(np.abs(a.points))) for a in sup.arcs) + 1.0 if sup.arcs else 1.0
    if sup.regime == "real":
        n = 0  # rays from non-real points never meet the real axis
    else:
        n = _crossings(z, sup.arcs, reach)
    return complex(radial_sqrt(sup.qd, z)) * (-1) ** n


def _tangent(points: np.ndarray, k: int) -> complex:
    lo, hi = max(k - 1, 0), min(k + 1, len(points) - 1)
    d = points[hi] - points[lo]
    return d / abs(d)


def _plus_state(sup: MeasureSupport, arc: SupportArc, k: int) -> BranchState:
    # Boundary value from the left: evaluate the support branch a small
    # distance along the left normal and continue onto the arc.
    t = complex(arc.points[k])
    T = _tangent(arc.points, k)
    h = NORMAL_OFFSET * min(1.0, abs(arc.points[-1] - arc.points[0]))
    p = t + 1j * T * h
    start = BranchState(p, support_branch(sup, p))
    return transport(sup.qd, start, t)


def _fill_arc(sup: MeasureSupport, arc: SupportArc) -> None:
    n = len(arc.points)
    k = n // 2
    arc.anchor_index = k
    arc.anchor = _plus_state(sup, arc, k)
    arc.mass = _arc_integral(sup, arc, None)
    # density samples at every interior vertex, continued along the polyline
    states = _vertex_states(sup, arc)
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(arc.points)))])
    dens, defect = [], 0.0
    for j in range(1, n - 1):
        val = states[j].value
        rho_poly = val * _tangent(arc.points, j) / (2j * math.pi)
        rho = _fixed_density(val, _tangent(arc.points, j))
        dens.append(rho)
        defect = max(defect, abs(rho_poly.imag) / max(abs(rho_poly), 1e-300))
    arc.samples = s[1:-1]
    arc.density_samples = np.asarray(dens)
    arc.imag_defect = _field_defect(dens)
    arc.tangent_defect = defect


def _field_defect(dens) -> float:
    return 0.0 if not len(dens) else float(max(abs(complex(d).imag) for d in dens))


def _fixed_density(f_plus: complex, approx_tangent: complex) -> float:
    """Real density per unit arc length.

    The exact trajectory tangent is ``+-i conj(f)/|f|``; the sign is taken
    from the polyline tangent, which fixes the orientation.
    """
    if f_plus == 0:
        return 0.0
    T = 1j * f_plus.conjugate() / abs(f_plus)
    if (T * approx_tangent.conjugate()).real < 0:
        T = -T
    val = f_plus * T / (2j * math.pi)
    return val.real if abs(val.imag) <= 1e-8 * max(abs(val), 1.0) else val


def _vertex_states(sup: MeasureSupport, arc: SupportArc) -> dict:
    k = arc.anchor_index
    states = {k: arc.anchor}
    st = arc.anchor
    for j in range(k + 1, len(arc.points) - 1):
        st = transport(sup.qd, st, arc.points[j])
        states[j] = st
    st = arc.anchor
    for j in range(k - 1, 0, -1):
        st = transport(sup.qd, st, arc.points[j])
        states[j] = st
    return states


def _arc_integral(sup: MeasureSupport, arc: SupportArc, weight) -> complex:
    """``(1/(2 pi i)) int_arc f_+(t) w(t) dt`` along the oriented polyline."""
    pts = arc.points
    k = arc.anchor_index
    total = 0j
    st = arc.anchor
    for j in range(k, len(pts) - 1):
        sing = "end" if j == len(pts) - 2 else None
        val, st = branch_line_integral(sup.qd, pts[j], pts[j + 1], st, singular=sing, weight=weight)
        total += val
    st = arc.anchor
    for j in range(k, 0, -1):
        sing = "end" if j == 1 else None
        val, st = branch_line_integral(sup.qd, pts[j], pts[j - 1], st, singular=sing, weight=weight)
        total -= val
    return total / (2j * math.pi)


def _locate(sup: MeasureSupport, t: complex, tol: float = 1e-6):
    best = None
    for ia, arc in enumerate(sup.arcs):
        a = arc.points[:-1]
        e = np.diff(arc.points)
        ee = np.abs(e) ** 2
        par = np.clip(np.real((t - a) * np.conj(e)) / np.where(ee == 0, 1, ee), 0, 1)
        d = np.abs(a + par * e - t)
        j = int(np.argmin(d))
        if best is None or d[j] < best[0]:
            best = (float(d[j]), ia, j)
    if best is None or best[0] > tol:
        raise DomainError("point is not on the support")
    return best[1], best[2]


def boundary_value(sup: MeasureSupport, t: complex) -> complex:
    """``f_+(t)``: the left boundary value of the support branch at ``t`` on an arc."""
    t = complex(t)
    ia, j = _locate(sup, t)
    arc = sup.arcs[ia]
    if min(abs(t - arc.points[0]), abs(t - arc.points[-1])) < 1e-12:
        raise DomainError("t is an endpoint of the support")
    states = _vertex_states(sup, arc)
    # nearest interior vertex with a stored state
    jj = min(max(j, 1), len(arc.points) - 2)
    if abs(t - arc.points[jj + 1 if jj + 1 < len(arc.points) - 1 else jj]) < abs(t - arc.points[jj]):
        jj = jj + 1 if jj + 1 < len(arc.points) - 1 else jj
    return transport(sup.qd, states[jj], t).value


def density(sup: MeasureSupport, t: complex) -> float:
    """Density of ``nu`` with respect to arc length at ``t`` on the support."""
    ia, j = _locate(sup, complex(t))
    f_plus = boundary_value(sup, t)
    return _fixed_density(f_plus, _tangent(sup.arcs[ia].points, max(min(j, len(sup.arcs[ia].points) - 2), 1)))


def total_mass(sup: Optional[MeasureSupport]) -> complex:
    """Sum of the signed arc masses (zero for an empty support)."""
    if sup is None or not sup.arcs:
        return 0j
    return complex(sum(a.mass for a in sup.arcs))


# ---------------------------------------------------------------------------
# Cauchy transforms
# ---------------------------------------------------------------------------


def cauchy_closed_form(z, gamma, delta, sup: Optional[MeasureSupport] = None) -> complex:
    """``C(z) = (2 z^2 + gamma z - 2 sqrt(Delta(z))) / (4 z)`` with ``sqrt(Delta) ~ z^2``.

    The square root is cut along the support, so ``C`` is analytic off it.
    Far from the support the equivalent form ``(4 + delta/z)/(2 z + gamma + 2 f)``
    is used, which avoids cancellation and keeps ``z C(z) -> 1`` accurate.

    Raises
    ------
    DomainError
        For ``z = 0`` or ``z`` on the support.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("z = 0")
    if sup is None:
        sup = support(gamma, delta)
    if _distance_to_arcs(z, sup.arcs) < ON_SUPPORT_TOL:
        raise DomainError("z lies on the support")
    f = support_branch(sup, z)
    num, conj = 2 * z + gamma - 2 * f, 2 * z + gamma + 2 * f
    if abs(conj) > abs(num):
        # (2z + gamma)^2 - 4 q/z = 16 + 4 delta/z, so the cancelling
        # difference can be traded for the sum.
        return (4 + delta / z) / conj
    return num / 4


def cauchy_numeric(sup: MeasureSupport, z) -> complex:
    """``int d nu(t) / (z - t)`` by quadrature over the support arcs."""
    z = complex(z)
    d = _distance_to_arcs(z, sup.arcs)
    if d < ON_SUPPORT_TOL:
        raise DomainError("z lies on the support")
    if d < NEAR_SUPPORT:
        warnings.warn(f"z is {d:.1e} from the support; accuracy degrades", NearSupport)

    def w(t):
        return 1.0 / (z - t)

    return complex(sum(_arc_integral(sup, arc, w) for arc in sup.arcs))


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------


def _densify(points: np.ndarray, n: int) -> np.ndarray:
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(points)))])
    grid = np.linspace(0.0, s[-1], n)
    return np.interp(grid, s, points.real) + 1j * np.interp(grid, s, points.imag)


def hausdorff_to_support(points, sup: MeasureSupport, samples: int = 4001) -> float:
    """Symmetric Hausdorff distance between a finite set and the support arcs."""
    pts = np.asarray(points, dtype=complex)
    if len(pts) == 0 or not sup.arcs:
        raise DomainError("empty point set or support")
    to_support = max(_distance_to_arcs(p, sup.arcs) for p in pts)
    dense = np.concatenate([_densify(a.points, samples) for a in sup.arcs])
    to_points = float(np.max(np.min(np.abs(dense[:, None] - pts[None, :]), axis=1)))
    return max(to_support, to_points)
