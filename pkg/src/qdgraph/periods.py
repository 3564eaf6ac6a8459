"""
Period integrals of ``sqrt(q(t)/t)``, the classification curve Sigma and the
apex classifier.

For an apex ``a = x + iy`` of the normalized family the classifying quantity is

    S(a) = Re of the integral of sqrt((t-1)(t-a)(t-conj a)/t) from 0 to a,

taken along ``[0, x]`` followed by ``[x, a]``.  Splitting the path gives the
real functions ``F`` (horizontal leg) and ``G`` (vertical leg), which are
evaluated here by real quadrature; the same number is also available from the
complex period machinery so the two routes can check each other.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .algebra import Poly
from .errors import DomainError, PathTooClose
from .qdiff import BranchState, QuadDifferential, critical_points, from_apex, initial_state, radial_sqrt
from .quadrature import adaptive_gl, branch_line_integral

__all__ = [
    "PathSpec",
    "period_integral",
    "residue_at_infinity",
    "necessary_condition",
    "closed_contour_period",
    "conjugate_arc_path",
    "sigma_F",
    "sigma_G",
    "sigma_value",
    "sigma_value_path",
    "ApexClass",
    "classify_apex",
    "snap_to_sigma",
    "SigmaSample",
    "SigmaCurve",
    "trace_sigma",
    "blowup_tangent_angle",
    "sigma_dx_analytic",
    "sigma_partial_derivative_check",
    "SIGMA_BAND",
    "ANCHOR_OMEGA1",
]

SIGMA_BAND = 1e-6
ANCHOR_OMEGA1 = 1.6 + 2j
TOO_CLOSE = 1e-8


@dataclass(frozen=True)
class PathSpec:
    """Polyline path with optional singular endpoints.

    ``start`` and ``end`` are ``None`` for a regular endpoint, ``"zero"`` for a
    zero of ``q`` and ``"pole"`` for the origin.
    """

    waypoints: tuple
    start: Optional[str] = None
    end: Optional[str] = None

    def __post_init__(self):
        pts = tuple(complex(w) for w in self.waypoints)
        if len(pts) < 2:
            raise DomainError("a path needs at least two waypoints")
        object.__setattr__(self, "waypoints", pts)

    def reversed(self) -> "PathSpec":
        return PathSpec(self.waypoints[::-1], self.end, self.start)


def _check_clearance(qd: QuadDifferential, path: PathSpec):
    crit = [cp.location for cp in critical_points(qd) if cp.is_finite]
    pts = path.waypoints
    n = len(pts) - 1
    for i in range(n):
        a, b = pts[i], pts[i + 1]
        d = b - a
        for c in crit:
            L2 = abs(d) ** 2
            t = 0.0 if L2 == 0 else min(1.0, max(0.0, ((c - a) * d.conjugate()).real / L2))
            # Allow the flagged singular endpoints themselves.
            if (i == 0 and path.start and abs(c - a) < TOO_CLOSE and t < 0.5) or (
                i == n - 1 and path.end and abs(c - b) < TOO_CLOSE and t > 0.5
            ):
                continue
            if abs(c - (a + t * d)) < TOO_CLOSE:
                raise PathTooClose(f"path passes within {TOO_CLOSE} of critical point {c}")


def period_integral(
    qd: QuadDifferential,
    path: PathSpec,
    state: Optional[BranchState] = None,
    weight=None,
    tol: float = 1e-13,
    return_state: bool = False,
):
    """Integral of ``weight(t) sqrt(q(t)/t) dt`` along ``path``.

    Parameters
    ----------
    qd : QuadDifferential
    path : PathSpec
    state : BranchState, optional
        Branch at (or very near) the first waypoint.  Defaults to the radial
        branch, i.e. the continuation from infinity along the ray.
    weight : callable, optional
        Vectorized analytic factor multiplying the square root.
    return_state : bool
        Also return the branch state at the end of the path.

    Raises
    ------
    PathTooClose
        If the path passes within ``1e-8`` of a critical point other than a
        flagged endpoint.
    """
    _check_clearance(qd, path)
    pts = path.waypoints
    n = len(pts) - 1
    if state is None:
        a, b = pts[0], pts[1]
        probe = a + (b - a) * (1e-6 if path.start else 0.0)
        state = initial_state(qd, probe)
    total = 0j
    for i in range(n):
        a, b = pts[i], pts[i + 1]
        s_flag = path.start if i == 0 else None
        e_flag = path.end if i == n - 1 else None
        if s_flag and e_flag:
            mid = 0.5 * (a + b)
            v1, state = branch_line_integral(qd, a, mid, state, "start", weight, tol / 2)
            v2, state = branch_line_integral(qd, mid, b, state, "end", weight, tol / 2)
            total += v1 + v2
        else:
            sing = "start" if s_flag else ("end" if e_flag else None)
            v, state = branch_line_integral(qd, a, b, state, sing, weight, tol / n)
            total += v
    return (total, state) if return_state else total


def residue_at_infinity(q) -> complex:
    """``(alpha^2 - 4 beta)/8`` for ``q = z^3 + alpha z^2 + beta z + c``.

    This is the coefficient of ``-1/z`` in the expansion
    ``sqrt(q/z) = z + alpha/2 - (alpha^2 - 4 beta)/(8 z) + ...``.
    Exact coefficient types are preserved.
    """
    q = q.q if isinstance(q, QuadDifferential) else q
    if not isinstance(q, Poly) or q.degree != 3:
        raise DomainError("a monic cubic is required")
    alpha, beta = q.coeffs[2], q.coeffs[1]
    return (alpha * alpha - 4 * beta) / 8


def necessary_condition(q) -> float:
    """``Im(alpha^2 - 4 beta)``; zero is necessary for two disjoint shorts."""
    return complex(8 * residue_at_infinity(q)).imag


def closed_contour_period(qd: QuadDifferential, radius: float = 20.0, center: complex = 0j) -> complex:
    """Half the counter-clockwise contour integral of ``sqrt(q/z)`` on a circle.

    For a circle enclosing all finite critical points, collapsing it onto the
    cuts shows that this equals the sum of the integrals of the boundary
    values along the cuts, and the expansion at infinity gives
    ``-i pi (alpha^2 - 4 beta)/8``.
    """
    crit = [abs(cp.location - center) for cp in critical_points(qd) if cp.is_finite]
    if not all(c < radius - TOO_CLOSE for c in crit):
        raise DomainError("the circle must enclose every finite critical point")

    # The radial branch has its cuts on [0, r_i], inside the disc, so it is
    # continuous on the circle.
    def f(th):
        z = center + radius * np.exp(1j * th)
        return radial_sqrt(qd, z) * 1j * (z - center)

    return 0.5 * adaptive_gl(f, 0.0, 2 * math.pi, tol=1e-13)


def conjugate_arc_path(a: complex, side: str = "left") -> PathSpec:
    """Path from ``a`` to ``conj(a)`` that crosses the real axis away from ``[0, 1]``.

    ``side="left"`` crosses at ``-(|a| + 2)``; ``side="right"`` crosses at
    ``|a| + 2``.  Both routes stay at height ``Im a`` until they turn down.
    """
    a = complex(a)
    if a.imag <= 0:
        raise DomainError("Im a must be positive")
    R = abs(a) + 2.0
    x = -R if side == "left" else R
    return PathSpec((a, complex(x, a.imag), complex(x, 0.0), complex(x, -a.imag), a.conjugate()), "zero", "zero")


# --- Sigma -----------------------------------------------------------------


def sigma_F(x: float, y: float) -> float:
    """Real part of the integral over the horizontal leg ``[0, x]``.

    Zero for ``0 <= x <= 1``; for ``x > 1`` only ``[1, x]`` contributes and the
    integrand is taken positive; for ``x < 0`` the positive integrand is
    integrated from 0 to ``x`` (a negative number).
    """
    if 0.0 <= x <= 1.0:
        return 0.0

    def f(u):
        return np.sqrt(((u - x) ** 2 + y * y) * (u - 1.0) / u)

    if x > 1.0:
        return float(adaptive_gl(f, 1.0, x, singular="start"))
    return float(adaptive_gl(f, 0.0, x, singular="start"))


def sigma_G(x: float, y: float) -> float:
    """Real part of the integral over the vertical leg ``[x, x + iy]``.

    ``-y^2`` times the integral over ``t in [0, 1]`` of
    ``sqrt(1 - t^2) Im sqrt(1 - 1/(x + i t y))``, computed with ``t = sin(phi)``.
    """

    def g(phi):
        t = np.sin(phi)
        return np.cos(phi) ** 2 * np.sqrt(1.0 - 1.0 / (x + 1j * t * y)).imag

    return float(-y * y * adaptive_gl(g, 0.0, 0.5 * math.pi, singular="start"))


def _raw_S(x: float, y: float) -> float:
    return sigma_F(x, y) + sigma_G(x, y)


@lru_cache(maxsize=1)
def _orientation() -> int:
    # The sign convention is fixed by requiring S > 0 at the anchor in Omega_1.
    return 1 if _raw_S(ANCHOR_OMEGA1.real, ANCHOR_OMEGA1.imag) > 0 else -1


def sigma_value(a: complex) -> float:
    """``S(a) = F + G`` with the calibrated sign (positive in Omega_1)."""
    a = complex(a)
    if a.imag <= 0:
        raise DomainError("Im a must be positive")
    return _orientation() * _raw_S(a.real, a.imag)


def sigma_value_path(a: complex) -> float:
    """``S(a)`` from the complex period integral along ``[0, x]`` then ``[x, a]``.

    The branch is fixed on the vertical leg at ``x + iy/2`` to the product of
    the positive root of ``y^2 - tau^2`` and the principal root of ``1 - 1/t``,
    which is the branch behind the ``F + G`` formulas.
    """
    a = complex(a)
    x, y = a.real, a.imag
    if y <= 0:
        raise DomainError("Im a must be positive")
    p = complex(x, 0.5 * y)
    st = BranchState(p, math.sqrt(0.75) * y * cmath.sqrt(1.0 - 1.0 / p))
    qd = from_apex(a)
    up = period_integral(qd, PathSpec((p, a), None, "zero"), st)
    corner_flag = "pole" if x == 0.0 else ("zero" if x == 1.0 else None)
    down, st_x = period_integral(qd, PathSpec((p, complex(x, 0.0)), None, corner_flag), st, return_state=True)
    vertical = up - down
    horizontal = 0j
    if x > 1.0:
        # [1, x] carries the branch from the corner; [0, 1] has a purely
        # imaginary integrand whatever branch is used.
        h1 = period_integral(qd, PathSpec((complex(x, 0.0), 1.0 + 0j), None, "zero"), st_x)
        h0 = period_integral(qd, PathSpec((0j, 1.0 + 0j), "pole", "zero"), initial_state(qd, 0.5 + 0j))
        horizontal = -(h1) + h0
    elif x < 0.0 or 0.0 < x < 1.0:
        h = period_integral(qd, PathSpec((complex(x, 0.0), 0j), None, "pole"), st_x)
        horizontal = -h
    elif x == 1.0:
        horizontal = period_integral(qd, PathSpec((0j, 1.0 + 0j), "pole", "zero"), initial_state(qd, 0.5 + 0j))
    return _orientation() * float((vertical + horizontal).real)


@dataclass(frozen=True)
class ApexClass:
    """Classification of an apex: ``region`` is ``"Omega1"``, ``"Sigma"`` or ``"Omega2"``."""

    region: str
    S: float
    band: float = SIGMA_BAND

    @property
    def margin(self) -> float:
        return abs(self.S)

    @property
    def near_sigma(self) -> bool:
        return self.region != "Sigma" and self.margin <= 1e-2


def classify_apex(a: complex, band: float = SIGMA_BAND) -> ApexClass:
    """Omega_1 / Sigma / Omega_2 membership of the apex ``a``."""
    a = complex(a)
    S = sigma_value(a)
    if abs(S) <= band:
        return ApexClass("Sigma", S, band)
    if a.real <= 1.0 or S < 0:
        return ApexClass("Omega2", S, band)
    return ApexClass("Omega1", S, band)


def _sigma_x(y: float, x_hint: Optional[float] = None) -> float:
    """The unique ``x > 1`` with ``S(x, y) = 0`` (``S`` increases in ``x`` there)."""
    lo = 1.0
    hi = max(x_hint * 1.05 + 0.05 if x_hint else 1.0 + 2.0 * y + 1.0, 1.0 + 1e-9)
    if x_hint is not None:
        lo = max(1.0, x_hint - 0.5 * (x_hint - 1.0) - 1e-12)
        if sigma_value(complex(lo, y)) > 0:
            lo = 1.0
    while sigma_value(complex(hi, y)) <= 0:
        hi = 1.0 + 2.0 * (hi - 1.0)
    return brentq(lambda x: sigma_value(complex(x, y)), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def snap_to_sigma(a: complex) -> complex:
    """Point of Sigma with the same imaginary part as ``a``."""
    a = complex(a)
    if a.imag <= 0:
        raise DomainError("Im a must be positive")
    return complex(_sigma_x(a.imag, a.real if a.real > 1 else None), a.imag)


@dataclass(frozen=True)
class SigmaSample:
    x: float
    y: float
    value: float


@dataclass
class SigmaCurve:
    """Polyline of the upper branch of Sigma starting at ``z = 1``."""

    points: np.ndarray
    residuals: np.ndarray
    complete: bool = True
    message: str = ""
    arclength: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if len(self.arclength) != len(self.points):
            self.arclength = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(self.points)))])

    def with_conjugate(self) -> np.ndarray:
        """Both branches as one polyline running from the lower end through 1."""
        return np.concatenate([np.conj(self.points[::-1]), self.points[1:]])

    def tangent_angle_at_one(self, index: int = 1) -> float:
        """Angle in degrees of the chord from ``1`` to ``points[index]``."""
        return math.degrees(cmath.phase(self.points[index] - 1.0))

    def angle_at_modulus(self, r: float) -> float:
        """``arg z`` in degrees at the point of the curve with ``|z| = r``."""
        mods = np.abs(self.points)
        if r > mods[-1]:
            raise DomainError(f"curve only reaches |z| = {mods[-1]:.6g}")
        z = _sigma_point_at_modulus(r, self.points, mods)
        return math.degrees(cmath.phase(z))


def _sigma_point_at_modulus(r: float, pts, mods) -> complex:
    i = int(np.searchsorted(mods, r))
    y_lo, y_hi = pts[max(i - 1, 0)].imag, pts[min(i, len(pts) - 1)].imag

    def g(y):
        return abs(complex(_sigma_x(y), y)) - r

    if g(y_lo) > 0:
        y_lo = 0.5 * y_lo
    y = brentq(g, y_lo, y_hi * 1.01 + 1e-12, xtol=1e-13)
    return complex(_sigma_x(y), y)


def _sigma_step(modulus: float) -> float:
    if modulus <= 10.0:
        return min(0.5, max(0.01, 0.01 + 0.49 * (modulus - 1.0) / 9.0))
    return 0.5 * modulus / 10.0


def trace_sigma(max_abs: float = 1000.0, step: Optional[float] = None, residual_tol: float = 1e-8) -> SigmaCurve:
    """Continue ``S = 0`` from ``z = 1`` into the upper half-plane.

    Predictor: a step along the current tangent (initially at ``pi/3``).
    Corrector: the exact root in ``x`` at the predicted height, which exists
    and is unique because ``S`` increases in ``x`` for ``x > 1``.  Steps grow
    from 0.01 near ``z = 1`` to 0.5 at ``|z| = 10`` and in proportion to
    ``|z|`` beyond; ``step`` overrides the schedule with a fixed length.
    """
    pts = [1.0 + 0j]
    res = [0.0]
    tangent = cmath.exp(1j * math.pi / 3)
    z = 1.0 + 0j
    message = ""
    complete = True
    while abs(z) < max_abs:
        h = step if step is not None else _sigma_step(abs(z))
        for _attempt in range(8):
            pred = z + h * tangent
            if pred.imag <= z.imag:
                h *= 0.5
                continue
            try:
                x = _sigma_x(pred.imag, pred.real if pred.real > 1 else None)
            except (ValueError, RuntimeError) as exc:
                message = str(exc)
                h *= 0.5
                continue
            new = complex(x, pred.imag)
            S = sigma_value(new)
            if abs(S) <= residual_tol and x > 1.0:
                break
            h *= 0.5
        else:
            complete = False
            message = message or "corrector did not converge"
            break
        tangent = (new - z) / abs(new - z)
        z = new
        pts.append(z)
        res.append(S)
    return SigmaCurve(np.asarray(pts), np.asarray(res), complete, message)


def blowup_tangent_angle() -> float:
    """Limiting direction of Sigma at ``z = 1`` in degrees, from the local model.

    With ``a = 1 + eps e^{i theta}`` and ``t = 1 + eps u`` the defining
    integral scales like ``eps^(5/2)`` times
    ``R(theta) = Re of the integral of sqrt(u (u - w)(u - conj w))`` over
    ``0 -> w``, ``w = e^{i theta}``, along ``[0, cos theta]`` then up.
    The tangent is the root of ``R`` in ``(0, pi/2)``.
    """

    def R(th):
        x, y = math.cos(th), math.sin(th)
        F = adaptive_gl(lambda u: np.sqrt(((u - x) ** 2 + y * y) * u), 0.0, x)

        def g(phi):
            t = np.sin(phi)
            return np.cos(phi) ** 2 * np.sqrt(x + 1j * t * y).imag

        G = -y * y * adaptive_gl(g, 0.0, 0.5 * math.pi)
        return F + G

    th = brentq(R, math.radians(45), math.radians(85), xtol=1e-15)
    return math.degrees(th)


def sigma_dx_analytic(a: complex) -> float:
    """``dS/dx`` from differentiating the ``F`` and ``G`` integrals (needs ``x > 1``)."""
    a = complex(a)
    x, y = a.real, a.imag
    if x <= 1.0 or y <= 0:
        raise DomainError("requires x > 1 and y > 0")

    def fx(u):
        return (x - u) * (u - 1.0) / np.sqrt(((u - x) ** 2 + y * y) * (u - 1.0) * u)

    dF = math.sqrt(y * y * (x - 1.0) / x) + adaptive_gl(fx, 1.0, x, singular="start")

    def gx(phi):
        t = np.sin(phi)
        w = x + 1j * t * y
        return np.cos(phi) ** 2 * (1.0 / (2.0 * w * w * np.sqrt(1.0 - 1.0 / w))).imag

    dG = -y * y * adaptive_gl(gx, 0.0, 0.5 * math.pi, singular="start")
    return _orientation() * float(dF + dG)


def sigma_partial_derivative_check(a: complex, h: float = 1e-5) -> float:
    """Central finite difference of ``S`` in ``x`` at ``a`` (requires ``Re a > 1``)."""
    a = complex(a)
    if a.real <= 1.0 or a.imag <= 0:
        raise DomainError("requires x > 1 and y > 0")
    return (sigma_value(a + h) - sigma_value(a - h)) / (2 * h)
