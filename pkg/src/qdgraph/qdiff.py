"""
The quadratic differential ``-q(z)/z dz^2`` and branch-consistent square roots.

``q`` is a monic cubic.  The finite critical points are the zeros of ``q`` and
the simple pole at the origin; infinity is a pole of order six.  Throughout,
``Q(z) = q(z)/z`` and horizontal trajectories are the curves along which
``Re of the integral of sqrt(Q)`` stays constant.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .algebra import Poly, from_roots, poly_roots
from .errors import BranchJump, DegreeError, DomainError, NotApplicable

__all__ = [
    "QuadDifferential",
    "CriticalPoint",
    "BranchState",
    "from_parameters",
    "from_apex",
    "from_roots_qd",
    "normalize_to_unit_root",
    "critical_points",
    "sqrt_q_over_z",
    "radial_sqrt",
    "initial_state",
    "transport",
    "ray_fan",
    "d_directions",
    "INFINITY",
]

INFINITY = "inf"
CLUSTER_TOL = 1e-7
MAX_PHASE_JUMP = math.pi / 2


@dataclass(frozen=True)
class CriticalPoint:
    """A critical point of the differential.

    ``kind`` is ``"zero"`` (multiplicity ``mult``), ``"pole"`` (the simple
    pole at the origin), ``"merged"`` (a zero of ``q`` sitting on the origin)
    or ``"infinity"`` (pole of order ``order``).  ``location`` is ``None`` for
    the point at infinity.
    """

    ident: str
    location: Optional[complex]
    kind: str
    mult: int = 1
    degenerate: bool = False

    @property
    def is_finite(self) -> bool:
        return self.location is not None

    @property
    def order(self) -> int:
        """Signed order ``n`` of the differential: zeros ``r``, poles negative."""
        if self.kind == "zero":
            return self.mult
        if self.kind == "pole":
            return -1
        if self.kind == "merged":
            return self.mult
        return -6


def _coerce_poly(q) -> Poly:
    if isinstance(q, Poly):
        return q
    return Poly(tuple(q))


@dataclass(frozen=True)
class QuadDifferential:
    """The differential ``-q(z)/z dz^2`` for a monic cubic ``q``.

    Parameters
    ----------
    q : Poly
        Monic cubic, ascending coefficients.
    params : tuple, optional
        ``(gamma, delta)`` when built by :func:`from_parameters`.
    """

    q: Poly
    params: Optional[tuple] = None
    zeros: Optional[tuple] = field(default=None, repr=False)
    _c: tuple = field(init=False, repr=False, compare=False)
    _roots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = _coerce_poly(self.q)
        if q.degree != 3:
            raise DegreeError(f"q must be a cubic, got degree {q.degree}")
        if q.leading != 1:
            raise DomainError("q must be monic")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "_c", tuple(complex(c) for c in q.coeffs))
        if self.zeros is not None:
            # Trust exactly known zeros (e.g. 1, a, conj a) over recomputed ones.
            zs = np.asarray([complex(r) for r in self.zeros])
            if len(zs) != 3 or np.max(np.abs(q.as_array() - from_roots(zs).as_array())) > 1e-9 * (
                1 + np.max(np.abs(q.as_array()))
            ):
                raise DomainError("zeros inconsistent with q")
            zs = zs[np.lexsort((zs.imag, zs.real))]
            object.__setattr__(self, "_roots", zs)
        else:
            object.__setattr__(self, "_roots", poly_roots(q))

    @property
    def roots(self) -> np.ndarray:
        return self._roots.copy()

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self._c)

    @property
    def alpha_beta(self) -> tuple:
        """Coefficients ``(alpha, beta)`` of ``z^3 + alpha z^2 + beta z + c0``."""
        return self.q.coeffs[2], self.q.coeffs[1]

    def qval(self, z):
        c0, c1, c2, _ = self._c
        return ((z + c2) * z + c1) * z + c0

    def Q(self, z):
        """``q(z)/z``; works on scalars and arrays."""
        return self.qval(z) / z

    @property
    def degenerate(self) -> bool:
        return any(cp.degenerate for cp in critical_points(self))

    def finite_critical(self) -> list:
        return [cp for cp in critical_points(self) if cp.is_finite]


def from_parameters(gamma, delta, convention: str = "algeq") -> QuadDifferential:
    """Differential attached to the algebraic equation with parameters ``(gamma, delta)``.

    With ``convention="algeq"`` (default) the cubic is
    ``q = z^3 + gamma z^2 + (gamma^2 - 16)/4 z - delta``, so that ``z q(z)`` is
    exactly the discriminant ``(z^2 + gamma z/2)^2 - 4 z (z + delta/4)`` of
    ``z C^2 - (z^2 + gamma z/2) C + (z + delta/4) = 0``.  The alternative
    ``convention="printed"`` uses ``-4 delta`` as the constant term, which is
    the historical form of the discriminant; it differs from the true
    discriminant by ``3 delta z``.

    Exact inputs (``int`` or ``Fraction``) give exact coefficients.
    """
    if convention not in ("algeq", "printed"):
        raise DomainError(f"unknown convention {convention!r}")
    exact = all(isinstance(v, (int, Fraction)) for v in (gamma, delta))
    four = Fraction(4) if exact else 4.0
    c0 = -delta if convention == "algeq" else -4 * delta
    q = Poly((c0, (gamma * gamma - 16) / four, gamma, 1))
    if not exact:
        q = Poly(tuple(complex(c) for c in q.coeffs))
    return QuadDifferential(q, params=(gamma, delta))


def from_apex(a: complex) -> QuadDifferential:
    """Normalized differential with zeros ``1, a, conj(a)``.

    Raises
    ------
    DomainError
        If ``Im a <= 0``.
    """
    a = complex(a)
    if a.imag <= 0:
        raise DomainError("the apex must lie in the upper half-plane; use from_roots_qd")
    zeros = (1.0 + 0j, a, a.conjugate())
    return QuadDifferential(from_roots(list(zeros)), zeros=zeros)


def from_roots_qd(roots) -> QuadDifferential:
    """Differential with ``q`` the monic cubic vanishing at ``roots``."""
    roots = [complex(r) for r in roots]
    if len(roots) != 3:
        raise DegreeError("exactly three roots are required")
    return QuadDifferential(from_roots(roots), zeros=tuple(roots))


def normalize_to_unit_root(q) -> tuple:
    """Rescale a real cubic with one positive real root ``r`` to the apex family.

    Under ``z = r w`` the differential becomes ``r^4`` times the normalized
    differential with zeros ``1, a/r, conj(a)/r``, so trajectories map onto
    each other.

    Returns
    -------
    tuple
        ``(r, apex)`` with ``Im apex > 0``.
    """
    q = q.q if isinstance(q, QuadDifferential) else _coerce_poly(q)
    if not q.is_real():
        raise NotApplicable("normalization needs real coefficients")
    roots = poly_roots(q)
    scale = max(1.0, float(np.max(np.abs(roots))))
    real = [r for r in roots if abs(r.imag) <= 1e-12 * scale]
    if len(real) != 1:
        raise NotApplicable("three real roots: use the real-zeros path")
    r = real[0].real
    if r <= 0:
        raise NotApplicable("the real root must be positive")
    upper = [z for z in roots if z.imag > 0][0]
    return r, upper / r


def _cluster_roots(roots, tol=CLUSTER_TOL):
    """Group numerically coincident roots: list of ``(mean location, multiplicity)``."""
    groups: list = []
    scale = max(1.0, max(abs(r) for r in roots))
    # Multiple roots split like eps**(1/mult); widen the window accordingly.
    window = max(tol, 1e-4) * scale
    for r in roots:
        for g in groups:
            if abs(g[0] / len(g[1]) - r) <= window:
                g[0] += r
                g[1].append(r)
                break
        else:
            groups.append([r, [r]])
    out = []
    for total, members in groups:
        out.append((total / len(members), len(members)))
    return out


_CP_CACHE: dict = {}


def critical_points(qd: QuadDifferential) -> list:
    """Finite zeros (with multiplicity), the origin pole, and infinity.

    Identifiers are ``z0, z1, ...`` for zeros in root order, ``p0`` for the
    pole and ``inf`` for infinity.  A zero of ``q`` at the origin cancels the
    pole; the merged point is reported with kind ``"merged"`` and flagged
    degenerate, as is every repeated zero.
    """
    key = (qd._c, tuple(qd._roots))
    if key in _CP_CACHE:
        return list(_CP_CACHE[key])
    roots = list(qd._roots)
    clusters = _cluster_roots(roots)
    clusters.sort(key=lambda g: (g[0].real, g[0].imag))
    out = []
    merged = False
    k = 0
    for loc, mult in clusters:
        if abs(loc) <= 1e-10:
            merged = True
            out.append(CriticalPoint("p0", 0j, "merged", mult - 1, degenerate=True))
            continue
        out.append(CriticalPoint(f"z{k}", complex(loc), "zero", mult, degenerate=mult > 1))
        k += 1
    if not merged:
        out.append(CriticalPoint("p0", 0j, "pole", 1))
    out.append(CriticalPoint(INFINITY, None, "infinity", 6))
    if len(_CP_CACHE) > 4096:
        _CP_CACHE.clear()
    _CP_CACHE[key] = tuple(out)
    return out


@dataclass(frozen=True)
class BranchState:
    """Last visited point and the value of ``sqrt(q/z)`` chosen there."""

    point: complex
    value: complex


def radial_sqrt(qd: QuadDifferential, z):
    """Branch of ``sqrt(q(z)/z)`` continued from infinity along the ray through ``z``.

    Computed as ``z * prod sqrt(1 - r_i / z)`` with principal roots; it is
    asymptotic to ``z`` and has cuts on the segments ``[0, r_i]``.
    """
    z = np.asarray(z, dtype=complex)
    out = z.copy()
    for r in qd._roots:
        out = out * np.sqrt(1.0 - r / z)
    return out if out.ndim else complex(out)


def initial_state(qd: QuadDifferential, z: complex) -> BranchState:
    """State holding the radial branch at ``z``."""
    return BranchState(complex(z), complex(radial_sqrt(qd, z)))


def sqrt_q_over_z(qd: QuadDifferential, z: complex, state: BranchState):
    """Continue ``sqrt(q/z)`` from ``state`` to ``z`` in a single step.

    The previous value is transported by ``sqrt(Q(z)/Q(last))`` and the root
    of ``Q(z)`` nearest to it is returned.  A step whose phase ratio exceeds
    ``pi/2`` is refused, since the straight segment could then pass on either
    side of a zero of ``Q``.

    Returns
    -------
    tuple
        ``(value, BranchState)``.

    Raises
    ------
    BranchJump
        When ``|arg(Q(z)/Q(last))| > pi/2``.
    """
    z = complex(z)
    qz = qd.Q(z)
    ql = state.value * state.value
    if ql == 0 or qz == 0:
        raise BranchJump("continuation through a zero of q/z")
    ratio = qz / ql
    if abs(cmath.phase(ratio)) > MAX_PHASE_JUMP:
        raise BranchJump(f"phase jump {cmath.phase(ratio):.3f} between {state.point} and {z}")
    guess = state.value * cmath.sqrt(ratio)
    w = cmath.sqrt(qz)
    if abs(w - guess) > abs(w + guess):
        w = -w
    return w, BranchState(z, w)


def transport(qd: QuadDifferential, state: BranchState, z: complex, max_depth: int = 30):
    """Continue along the straight segment to ``z``, subdividing on demand."""
    target = complex(z)
    pending = [target]
    depth = 0
    while pending:
        nxt = pending[-1]
        try:
            _, state = sqrt_q_over_z(qd, nxt, state)
            pending.pop()
        except BranchJump:
            depth += 1
            if depth > max_depth * 8 or abs(nxt - state.point) < 1e-14:
                raise
            pending.append(0.5 * (state.point + nxt))
    return state


def _local_factor(qd: QuadDifferential, cp: CriticalPoint) -> complex:
    if cp.kind == "pole":
        return complex(qd.qval(0j))
    # Deflate q by the zero (with multiplicity) and evaluate exactly.
    z0 = cp.location
    others = [r for r in qd._roots if abs(r - z0) > max(1e-4, CLUSTER_TOL) * max(1.0, abs(z0))]
    c = 1.0 + 0j
    for r in others:
        c *= z0 - r
    return c / z0


def ray_fan(cp: CriticalPoint, qd: QuadDifferential, kind: str = "horizontal") -> list:
    """Departure angles of critical trajectories at a finite critical point.

    For a zero of multiplicity ``r`` with ``Q(z) ~ c (z - z0)^r`` the angles are
    ``(pi - arg c + 2 pi k)/(r + 2)``; the simple pole uses ``r = -1`` and
    ``c = q(0)``, giving one ray.  Orthogonal rays drop the ``pi``.
    Angles are reduced to ``[0, 2 pi)`` and listed in ``k`` order.
    """
    if not cp.is_finite:
        raise DomainError("use d_directions for the point at infinity")
    if cp.kind == "merged":
        raise DomainError("no ray fan at a merged pole/zero")
    r = -1 if cp.kind == "pole" else cp.mult
    c = _local_factor(qd, cp)
    base = (math.pi if kind == "horizontal" else 0.0) - cmath.phase(c)
    return [((base + 2 * math.pi * k) / (r + 2)) % (2 * math.pi) for k in range(r + 2)]


def d_directions() -> dict:
    """Asymptotic directions at infinity for both trajectory families."""
    return {
        "horizontal": [(2 * k + 1) * math.pi / 4 for k in range(4)],
        "orthogonal": [k * math.pi / 2 for k in range(4)],
    }
