"""
Invariant suite used by ``qdiff verify``.

Every check reports a measured value next to its threshold.  Numeric checks
pass when the measured value does not exceed the threshold; passing ``tol``
replaces every numeric threshold (handy as a negative control).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import measure, periods, spectral
from .qdiff import critical_points, d_directions, from_apex, from_roots_qd, ray_fan
from .tracer import (
    build_critical_graph,
    check_no_same_direction,
    conjugation_defect,
    trajectory_diagnostics,
)

__all__ = ["Check", "ANCHORS", "run_suite", "format_report"]

ANCHORS = {
    "1.6+2i": (1.6 + 2j, "Omega1"),
    "1.8+2i": (1.8 + 2j, "Omega1"),
    "1.55+2i": (1.55 + 2j, "Sigma"),
    "0.5+2i": (0.5 + 2j, "Omega2"),
    "2i": (2j, "Omega2"),
}


@dataclass
class Check:
    name: str
    passed: bool
    measured: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.measured is None:
            return f"[{status}] {self.name}: {self.detail}"
        return f"[{status}] {self.name}: measured {self.measured:.3e} (threshold {self.threshold:.1e})  {self.detail}".rstrip()


def _numeric(name: str, measured: float, default: float, tol: Optional[float], detail: str = "") -> Check:
    thr = default if tol is None else tol
    return Check(name, bool(measured <= thr), float(measured), thr, detail)


def _classifications(tol):
    parts, ok = [], True
    margins = {}
    for label, (a, expected) in ANCHORS.items():
        c = periods.classify_apex(a)
        margins[label] = c.margin
        if expected == "Sigma":
            parts.append(f"{label}: {c.region} (|S|={c.margin:.2e}, near Sigma)")
        else:
            ok &= c.region == expected
            parts.append(f"{label}: {c.region}")
    ok &= min(margins, key=margins.get) == "1.55+2i"
    return Check("anchor classification", ok, detail="; ".join(parts))


def _short_counts(tol):
    parts, ok = [], True
    for label, (a, expected) in ANCHORS.items():
        if expected == "Sigma":
            a = periods.snap_to_sigma(a)
            want = 3
        else:
            want = 2
        n = len(build_critical_graph(from_apex(a)).shorts)
        ok &= n == want
        parts.append(f"{label}: {n}")
    return Check("anchor short counts (Sigma anchor snapped onto the curve)", ok, detail=", ".join(parts))


def _conjugate_arc(tol):
    worst = 0.0
    for a, _ in ANCHORS.values():
        qd = from_apex(a)
        for side in ("left", "right"):
            v = periods.period_integral(qd, periods.conjugate_arc_path(a, side))
            worst = max(worst, abs(v.real))
    return _numeric("Re of the a-to-conj(a) period", worst, 1e-8, tol)


def _residue_infinity(tol):
    qd = from_roots_qd([1, 2j, -2j])
    val = periods.closed_contour_period(qd)
    exact = periods.residue_at_infinity(qd.q)
    target = -1j * math.pi * exact
    return _numeric("closed-contour period for roots {1, 2i, -2i}", abs(val - target), 1e-8, tol, f"value {val:.12f}")


def _sigma_routes(tol):
    worst = max(abs(periods.sigma_value(a) - periods.sigma_value_path(a)) for a, _ in ANCHORS.values())
    return _numeric("S(a): real-variable route vs complex path", worst, 1e-10, tol)


def _operator_exact(tol):
    ok = True
    for m in range(1, 31):
        c = Fraction(m, 3)
        M = spectral.operator_matrix_exact(m, c)
        for k in range(m + 1):
            img = spectral.apply_operator([0] * k + [1], m, c)
            ok &= img[m + 1] == 0
            ok &= all(M[i][k] == img[i] for i in range(m + 1))
    return Check("operator matrix vs termwise application (exact, m <= 30)", ok)


def _eigen(tol):
    worst = 0.0
    for m in (1, 2, 5, 10, 20, 40):
        worst = max(worst, float(np.max(spectral.spectrum(spectral.SpectralProblem(m, 0.7)).residuals)))
    return _numeric("eigen residual", worst, 1e-8, tol)


def _riccati(tol):
    rng = np.random.default_rng(7)
    worst = 0.0
    for m in (1, 4, 12):
        p = spectral.SpectralProblem(m, 0.5)
        sol = spectral.spectrum(p)
        zs = rng.uniform(-4, 4, 20) + 1j * rng.uniform(0.5, 4, 20)
        for k in range(m + 1):
            r = sol.roots(k)
            for z in zs:
                worst = max(worst, abs(spectral.riccati_residual(r, sol.eigenvalues[k], z, m, p.coupling)))
    return _numeric("Riccati identity", worst, 1e-8, tol)


def _algeq(tol):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(3):
        g, d = float(rng.uniform(-2, 2)), float(rng.uniform(-1.5, 1.5))
        sup = measure.support(g, d)
        for _ in range(10):
            z = complex(rng.uniform(-4, 4), rng.uniform(0.2, 4))
            C = measure.cauchy_closed_form(z, g, d, sup)
            worst = max(worst, abs(measure.algebraic_residual(z, C, g, d)))
    return _numeric("algebraic equation residual of closed-form C", worst, 1e-10, tol)


def _discriminant(tol):
    ok = all(
        measure.discriminant_poly(Fraction(g), Fraction(d)) == measure.delta_poly(Fraction(g), Fraction(d))
        for g, d in [(0, 1), (-6, Fraction(1, 2)), (Fraction(3, 7), -5)]
    )
    return Check("discriminant identity (exact coefficients)", ok)


def _measure(tol):
    sup = measure.support(0.0, 1.0)
    mass_err = abs(measure.total_mass(sup) - 1)
    zs = [2 + 1j, -1 + 0.5j, 3j, 5.0, -0.1 - 0.7j]
    err = max(abs(measure.cauchy_numeric(sup, z) - measure.cauchy_closed_form(z, 0.0, 1.0, sup)) for z in zs)
    return [
        _numeric("total mass (gamma=0, delta=1)", mass_err, 1e-6, tol),
        _numeric("numeric vs closed-form Cauchy transform", err, 1e-6, tol),
    ]


def _structure(tol):
    drift, monotone, defect, same, fans = 0.0, True, 0.0, [], True
    for a, _ in ANCHORS.values():
        qd = from_apex(a)
        g = build_critical_graph(qd)
        for cp in critical_points(qd):
            if cp.is_finite:
                fans &= len(ray_fan(cp, qd)) == (1 if cp.kind == "pole" else cp.mult + 2)
        for s in g.segments:
            d = trajectory_diagnostics(qd, s)
            drift = max(drift, d["drift"])
            monotone &= d["monotone"]
        defect = max(defect, conjugation_defect(g))
        same += check_no_same_direction(g)
    fans &= len(d_directions()["horizontal"]) == 4
    return [
        Check("ray-fan counts", fans),
        _numeric("Re of the primitive along traced segments", drift, 1e-6, tol),
        Check("Im of the primitive monotone", monotone),
        _numeric("conjugation symmetry of graphs", defect, 1e-6, tol),
        Check("no two rays escape in the same direction", not same, detail=f"{len(same)} violations"),
    ]


SUITE: list[Callable] = [
    _classifications,
    _short_counts,
    _conjugate_arc,
    _residue_infinity,
    _sigma_routes,
    _operator_exact,
    _eigen,
    _riccati,
    _algeq,
    _discriminant,
    _measure,
    _structure,
]


def run_suite(tol: Optional[float] = None) -> list:
    """Run every check; ``tol`` overrides all numeric thresholds."""
    out = []
    for fn in SUITE:
        res = fn(tol)
        out.extend(res if isinstance(res, list) else [res])
    return out


def format_report(checks: list) -> str:
    lines = [c.line() for c in checks]
    n = sum(c.passed for c in checks)
    lines.append(f"{n}/{len(checks)} checks passed")
    return "\n".join(lines)
