"""
Tracing horizontal and orthogonal trajectories and assembling critical graphs.

A horizontal trajectory solves ``dz/ds = i sigma conj(v)/|v|`` with
``v = sqrt(q(z)/z)``, so that ``v dz`` is purely imaginary and the imaginary
part of the primitive grows monotonically.  Orthogonal trajectories drop the
factor ``i``.  Integration uses an embedded Dormand-Prince 5(4) pair whose
step is capped by the distance to the nearest finite critical point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DegenerateError, DomainError
from .qdiff import CriticalPoint, QuadDifferential, critical_points, d_directions, ray_fan

__all__ = [
    "Budget",
    "Endpoint",
    "TrajectorySegment",
    "Short",
    "CriticalGraph",
    "trace",
    "trace_ray",
    "build_critical_graph",
    "detect_short_trajectories",
    "check_no_same_direction",
    "segment_integrals",
    "trajectory_diagnostics",
    "conjugation_defect",
    "near_misses",
    "PolygonSide",
    "verify_teichmuller",
    "polyline_distance",
]

MATCH_TOL = 1e-3

# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


@dataclass(frozen=True)
class Budget:
    """Stopping parameters for a trace."""

    max_arc: float = 200.0
    escape_radius: float = 50.0
    eps_hit: float = 1e-4
    tol: float = 1e-10
    launch: float = 1e-6
    max_steps: int = 200_000


@dataclass(frozen=True)
class Endpoint:
    """How a trace ended.

    ``kind`` is ``"hit"`` (``target`` is a critical point id, ``distance`` the
    closest approach before snapping), ``"escaped"`` (``direction`` indexes the
    asymptotic direction, ``offset`` is the angular distance to it) or
    ``"aborted"`` (``reason`` is ``"budget"`` or ``"stiff"``).
    """

    kind: str
    target: Optional[str] = None
    distance: float = 0.0
    direction: Optional[int] = None
    offset: float = 0.0
    reason: str = ""


@dataclass
class TrajectorySegment:
    """A traced trajectory stored as a polyline with its branch values."""

    points: np.ndarray
    values: np.ndarray
    end: Endpoint
    arc_length: float
    sigma: int
    family: str = "horizontal"
    start: Optional[str] = None
    ray: Optional[int] = None
    angle: Optional[float] = None
    snapped: bool = False

    @property
    def label(self) -> str:
        if self.start is None:
            return "seed"
        return f"{self.start}/{self.ray}"

    def integration_slice(self) -> slice:
        """Points produced by the integrator (exact critical endpoints excluded)."""
        lo = 1 if self.start is not None else 0
        hi = len(self.points) - 1 if self.snapped else len(self.points)
        return slice(lo, hi)


@dataclass
class Short:
    """A short trajectory joining two finite critical points."""

    endpoints: tuple
    segment: int
    partner: Optional[int]
    unbroken: bool
    points: np.ndarray

    @property
    def matched(self) -> bool:
        return self.partner is not None


@dataclass
class CriticalGraph:
    qd: QuadDifferential
    segments: list
    shorts: list = field(default_factory=list)
    escape_table: dict = field(default_factory=dict)
    budget: Budget = field(default_factory=Budget)

    @property
    def complete(self) -> bool:
        return all(s.end.kind != "aborted" for s in self.segments)

    def critical(self) -> dict:
        return {cp.ident: cp for cp in critical_points(self.qd)}

    def short_pairs(self) -> list:
        return sorted(tuple(sorted(s.endpoints)) for s in self.shorts)

    def has_short(self, a: str, b: str) -> bool:
        return tuple(sorted((a, b))) in self.short_pairs()


def _segment_point_distance(p0: complex, p1: complex, c: complex) -> float:
    d = p1 - p0
    L2 = d.real * d.real + d.imag * d.imag
    if L2 == 0.0:
        return abs(c - p0)
    t = ((c - p0) * d.conjugate()).real / L2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return abs(c - (p0 + t * d))


def trace(
    qd: QuadDifferential,
    seed: complex,
    direction: complex,
    budget: Budget = Budget(),
    family: str = "horizontal",
    start: Optional[CriticalPoint] = None,
    ray: Optional[int] = None,
) -> TrajectorySegment:
    """Integrate a trajectory from ``seed`` leaving in ``direction``.

    Parameters
    ----------
    qd : QuadDifferential
    seed : complex
        Regular starting point.
    direction : complex
        Initial heading; fixes the orientation ``sigma``.
    budget : Budget
    family : {"horizontal", "orthogonal"}
    start : CriticalPoint, optional
        Critical point the seed was launched from; it is prepended to the
        polyline and ignored by hit detection until the trace has moved away.

    Returns
    -------
    TrajectorySegment
    """
    if family not in ("horizontal", "orthogonal"):
        raise DomainError(f"unknown family {family!r}")
    rot = 1j if family == "horizontal" else 1.0
    c0, c1, c2, _ = qd._c

    def Q(z):
        return (((z + c2) * z + c1) * z + c0) / z

    crits = [(cp.ident, cp.location) for cp in critical_points(qd) if cp.is_finite]
    dirs = d_directions()[family]
    z = complex(seed)
    v = cmath.sqrt(Q(z))
    head = rot * v.conjugate() / abs(v)
    sigma = 1 if (head * complex(direction).conjugate()).real >= 0 else -1
    head_sign = sigma * rot

    def field_at(p, vref):
        w = cmath.sqrt(Q(p))
        if (w * vref.conjugate()).real < 0:
            w = -w
        return head_sign * w.conjugate() / abs(w), w

    pts = [start.location, z] if start is not None else [z]
    vals = [0j, v] if start is not None else [v]
    start_id = start.ident if start is not None else None
    left_start = start is None
    arc = 0.0
    h = min(budget.launch * 10, 1e-4)
    k1 = field_at(z, v)[0]
    end = None
    steps = 0

    while end is None:
        steps += 1
        if steps > budget.max_steps:
            end = Endpoint("aborted", reason="budget")
            break
        dmin = min(abs(z - loc) for _, loc in crits)
        hmax = min(0.05 * (dmin + 0.01), 0.5 * dmin)
        h = min(h, hmax)
        if h < 1e-13:
            end = Endpoint("aborted", reason="stiff")
            break
        ks = [k1]
        for i in range(1, 7):
            zi = z + h * sum(a * kk for a, kk in zip(_A[i], ks))
            ks.append(field_at(zi, v)[0])
        z5 = z + h * sum(b * kk for b, kk in zip(_B5, ks))
        err = h * abs(sum(e * kk for e, kk in zip(_E, ks)))
        # Position errors move the real part of the primitive by |v| * err.
        tol = budget.tol / max(1.0, abs(v))
        if err > tol:
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
            continue
        k_new, v_new = field_at(z5, v)
        ratio = (v_new * v_new) / (v * v)
        if abs(cmath.phase(ratio)) > math.pi / 2:
            h *= 0.5
            continue
        z_old, z = z, z5
        v = v_new
        k1 = k_new
        arc += abs(z - z_old)
        pts.append(z)
        vals.append(v)
        h *= min(5.0, max(0.2, 0.9 * (tol / err) ** 0.2)) if err > 0 else 5.0

        if not left_start and abs(z - start.location) > 2 * budget.eps_hit:
            left_start = True
        hit = None
        for ident, loc in crits:
            if ident == start_id and not left_start:
                continue
            dist = _segment_point_distance(z_old, z, loc)
            if dist < budget.eps_hit and (hit is None or dist < hit[1]):
                hit = (ident, dist, loc)
        if hit is not None:
            end = Endpoint("hit", target=hit[0], distance=hit[1])
            pts.append(hit[2])
            vals.append(0j)
            break
        if abs(z) > budget.escape_radius:
            ang = cmath.phase(z) % (2 * math.pi)
            diffs = [abs((ang - d + math.pi) % (2 * math.pi) - math.pi) for d in dirs]
            kbest = int(np.argmin(diffs))
            end = Endpoint("escaped", direction=kbest, offset=diffs[kbest])
            break
        if arc > budget.max_arc:
            end = Endpoint("aborted", reason="budget")
            break

    return TrajectorySegment(
        points=np.asarray(pts, dtype=complex),
        values=np.asarray(vals, dtype=complex),
        end=end,
        arc_length=arc,
        sigma=sigma,
        family=family,
        start=start_id,
        ray=ray,
        snapped=end.kind == "hit",
    )


def trace_ray(
    qd: QuadDifferential,
    cp: CriticalPoint,
    angle: float,
    budget: Budget = Budget(),
    family: str = "horizontal",
    ray: Optional[int] = None,
) -> TrajectorySegment:
    """Trace the critical trajectory leaving ``cp`` at ``angle``."""
    u = cmath.exp(1j * angle)
    seg = trace(qd, cp.location + budget.launch * u, u, budget, family, start=cp, ray=ray)
    seg.angle = angle
    return seg


def build_critical_graph(
    qd: QuadDifferential,
    budget: Budget = Budget(),
    allow_degenerate: bool = False,
) -> CriticalGraph:
    """Trace every critical ray and detect the short trajectories.

    Rays are traced in (critical point, ray index) order from each finite
    zero and from the pole, in both half-planes.
    """
    cps = [cp for cp in critical_points(qd) if cp.is_finite]
    if not allow_degenerate and any(cp.degenerate for cp in cps):
        raise DegenerateError("repeated zeros or a zero at the pole")
    segments = []
    for cp in cps:
        if cp.kind == "merged":
            continue
        for k, th in enumerate(ray_fan(cp, qd)):
            segments.append(trace_ray(qd, cp, th, budget, ray=k))
    graph = CriticalGraph(qd, segments, budget=budget)
    graph.shorts = detect_short_trajectories(graph)
    graph.escape_table = {
        (s.start, s.ray): s.end.direction for s in segments if s.end.kind == "escaped"
    }
    return graph


def _as_segments(points: np.ndarray):
    return points[:-1], points[1:]


def polyline_distance(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each of ``points`` to the polyline ``poly``."""
    points = np.asarray(points, dtype=complex)
    poly = np.asarray(poly, dtype=complex)
    if len(poly) == 1:
        return np.abs(points - poly[0])
    a, b = _as_segments(poly)
    d = b - a
    L2 = np.maximum(np.abs(d) ** 2, 1e-300)
    out = np.empty(len(points))
    for i0 in range(0, len(points), 256):
        p = points[i0 : i0 + 256, None]
        t = np.clip(np.real((p - a) * np.conj(d)) / L2, 0.0, 1.0)
        out[i0 : i0 + 256] = np.min(np.abs(p - (a + t * d)), axis=1)
    return out


def _subsample(points: np.ndarray, n: int = 200) -> np.ndarray:
    if len(points) <= n:
        return points
    idx = np.unique(np.linspace(0, len(points) - 1, n).round().astype(int))
    return points[idx]


def detect_short_trajectories(graph: CriticalGraph) -> list:
    """Report each short trajectory once.

    A segment from a critical point that ends on a finite critical point is a
    short trajectory.  The two traces of the same short (one from each end)
    are paired when their polylines coincide within the match tolerance.
    """
    segs = graph.segments
    crit = graph.critical()
    eps = graph.budget.eps_hit
    hits = [i for i, s in enumerate(segs) if s.end.kind == "hit" and s.start is not None]
    used = set()
    shorts = []
    for i in hits:
        if i in used:
            continue
        si = segs[i]
        partner = None
        sample = _subsample(si.points)
        for j in hits:
            if j == i or j in used:
                continue
            sj = segs[j]
            if sj.start != si.end.target or sj.end.target != si.start:
                continue
            if np.max(polyline_distance(sample, sj.points)) < MATCH_TOL:
                partner = j
                break
        used.add(i)
        if partner is not None:
            used.add(partner)
        ends = (si.start, si.end.target)
        interior = si.points[1:-1]
        unbroken = True
        for ident, cp in crit.items():
            if not cp.is_finite or ident in ends or len(interior) == 0:
                continue
            if np.min(np.abs(interior - cp.location)) < eps:
                unbroken = False
        shorts.append(Short(ends, i, partner, unbroken, si.points))
    return shorts


def check_no_same_direction(graph: CriticalGraph) -> list:
    """Pairs of escaping rays from the same zero that share an asymptotic direction."""
    seen: dict = {}
    violations = []
    for (cp, ray), k in sorted(graph.escape_table.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        if (cp, k) in seen:
            violations.append(((cp, seen[(cp, k)]), (cp, ray), k))
        else:
            seen[(cp, k)] = ray
    return violations


def segment_integrals(qd: QuadDifferential, seg: TrajectorySegment):
    """Cumulative primitive of ``sqrt(q/z)`` along the integrated polyline.

    Each chord is integrated by 4-point Gauss-Legendre with the branch fixed
    by the stored value at its left end.  Chords of a trajectory can replace
    the curve itself because the integrand is analytic between them.

    Returns
    -------
    numpy.ndarray
        Complex cumulative integral, starting at 0.
    """
    sl = seg.integration_slice()
    p = seg.points[sl]
    v = seg.values[sl]
    if len(p) < 2:
        return np.zeros(1, dtype=complex)
    x, w = np.polynomial.legendre.leggauss(4)
    x, w = 0.5 * (x + 1), 0.5 * w
    a, b = p[:-1, None], p[1:, None]
    t = a + (b - a) * x[None, :]
    qt = qd.Q(t)
    root = np.sqrt(qt)
    ref = v[:-1, None] * np.sqrt(qt / (v[:-1, None] ** 2))
    root = np.where(np.real(root * np.conj(ref)) < 0, -root, root)
    inc = (root @ w) * (p[1:] - p[:-1])
    return np.concatenate([[0j], np.cumsum(inc)])


def trajectory_diagnostics(qd: QuadDifferential, seg: TrajectorySegment) -> dict:
    """Drift of the conserved part of the primitive and monotonicity of the other."""
    cum = segment_integrals(qd, seg)
    if seg.family == "horizontal":
        drift, mono = np.real(cum), np.imag(cum)
    else:
        drift, mono = np.imag(cum), np.real(cum)
    inc = np.diff(mono) * seg.sigma
    return {
        "drift": float(np.max(np.abs(drift))) if len(drift) else 0.0,
        "monotone": bool(np.all(inc > 0)) if len(inc) else True,
        "min_increment": float(np.min(inc)) if len(inc) else 0.0,
    }


def conjugation_defect(graph: CriticalGraph) -> float:
    """Largest distance between a segment's conjugate and its partner segment.

    Only meaningful for real-coefficient ``q``, where the partner of a ray at
    angle ``theta`` from ``z0`` is the ray at ``-theta`` from ``conj(z0)``.
    """
    crit = graph.critical()
    by_start: dict = {}
    for s in graph.segments:
        by_start.setdefault(s.start, []).append(s)
    worst = 0.0
    for s in graph.segments:
        loc = crit[s.start].location
        target = [
            c.ident for c in crit.values() if c.is_finite and abs(c.location - loc.conjugate()) < 1e-9
        ]
        if not target:
            return math.inf
        cands = by_start.get(target[0], [])
        want = (-s.angle) % (2 * math.pi)
        best = min(cands, key=lambda c: abs((c.angle - want + math.pi) % (2 * math.pi) - math.pi))
        # Compare over the common radius range to ignore the different stop points.
        pts = np.conj(_subsample(s.points))
        R = min(np.max(np.abs(s.points)), np.max(np.abs(best.points)))
        pts = pts[np.abs(pts) <= R * (1 - 1e-9)]
        if len(pts):
            worst = max(worst, float(np.max(polyline_distance(pts, best.points))))
    return worst


def near_misses(graph: CriticalGraph) -> list:
    """Closest approach of every non-short segment to each other finite critical point."""
    crit = graph.critical()
    out = []
    for s in graph.segments:
        if s.end.kind == "hit":
            continue
        interior = s.points[2:]
        for ident, cp in crit.items():
            if not cp.is_finite or ident == s.start or len(interior) == 0:
                continue
            out.append((s.label, ident, float(np.min(np.abs(interior - cp.location)))))
    return sorted(out, key=lambda r: r[2])


@dataclass(frozen=True)
class PolygonSide:
    """A boundary side: a traced segment, optionally traversed backwards."""

    segment: TrajectorySegment
    reverse: bool = False

    def oriented(self) -> np.ndarray:
        return self.segment.points[::-1] if self.reverse else self.segment.points

    def start_vertex(self):
        return _end_label(self.segment, not self.reverse)

    def end_vertex(self):
        return _end_label(self.segment, self.reverse)


def _end_label(seg: TrajectorySegment, at_start: bool):
    if at_start:
        return seg.start
    if seg.end.kind == "hit":
        return seg.end.target
    if seg.end.kind == "escaped":
        return "inf"
    return None


def _tangent(points: np.ndarray, at_start: bool, anchor: complex) -> complex:
    """Unit tangent leaving ``anchor`` (start) or arriving at it (end), from the polyline."""
    pts = points if at_start else points[::-1]
    # Use the first sample clearly away from the vertex for a stable direction.
    dists = np.abs(pts - anchor)
    scale = max(1e-6, min(1e-3, 0.1 * float(np.max(dists))))
    idx = int(np.argmax(dists > scale))
    d = pts[idx] - anchor
    d = d / abs(d)
    return d if at_start else -d


def _point_in_polygon(p: complex, poly: np.ndarray) -> bool:
    x, y = p.real, p.imag
    xs, ys = poly.real, poly.imag
    inside = False
    j = len(poly) - 1
    for i in range(len(poly)):
        if (ys[i] > y) != (ys[j] > y):
            xint = xs[j] + (y - ys[j]) * (xs[i] - xs[j]) / (ys[i] - ys[j])
            if x < xint:
                inside = not inside
        j = i
    return inside


def verify_teichmuller(graph: CriticalGraph, polygon: list, interior_override=None) -> Fraction:
    """Residual of the Teichmueller angle identity for a counter-clockwise polygon.

    ``polygon`` lists :class:`PolygonSide` objects (or ``(segment, reverse)``
    tuples, or segment indices into ``graph.segments``) forming a closed
    boundary traversed counter-clockwise.  For each vertex with order ``n``
    (``r`` for a zero, ``-1`` for the pole, ``-6`` at infinity) the interior
    angle ``theta`` is measured from the polyline tangents and rounded to a
    multiple of ``pi/|n+2|``.  Returns

    ``sum (1 - (n+2) theta / (2 pi)) - 2 - sum m_i``

    over vertices and interior critical points ``m_i``; zero for a genuine
    polygon.  ``interior_override`` replaces the geometric interior count.

    Raises
    ------
    DomainError
        If consecutive sides do not share a vertex.
    """
    sides = []
    for item in polygon:
        if isinstance(item, PolygonSide):
            sides.append(item)
        elif isinstance(item, tuple):
            seg, rev = item
            seg = graph.segments[seg] if isinstance(seg, int) else seg
            sides.append(PolygonSide(seg, rev))
        else:
            sides.append(PolygonSide(graph.segments[item]))
    if not sides:
        raise DomainError("empty polygon")
    crit = graph.critical()
    dirs_all = d_directions()
    total = Fraction(0)
    outline = []
    n_sides = len(sides)
    for i, side in enumerate(sides):
        nxt = sides[(i + 1) % n_sides]
        v_end, v_next = side.end_vertex(), nxt.start_vertex()
        if v_end is None or v_end != v_next:
            raise DomainError(f"sides {i} and {(i + 1) % n_sides} do not meet ({v_end} vs {v_next})")
        pts_in = side.oriented()
        pts_out = nxt.oriented()
        outline.append(pts_in)
        if v_end == "inf":
            # Directions at infinity: arrival along the incoming side's asymptote,
            # departure along the outgoing side's asymptote.
            arr = _asymptote(side.segment, dirs_all)
            dep = _asymptote(nxt.segment, dirs_all)
            # Equal directions bound a strip, whose angle at infinity is 0.
            theta = (dep - arr) % (2 * math.pi)
            n = -6
            R = 4 * max(float(np.max(np.abs(pts_in))), float(np.max(np.abs(pts_out))))
            arc = np.exp(1j * np.linspace(arr, arr + theta, 64)) * R
            outline.append(arc)
        else:
            cp = crit[v_end]
            anchor = cp.location
            t_in = _tangent(pts_in, at_start=False, anchor=anchor)
            t_out = _tangent(pts_out, at_start=True, anchor=anchor)
            theta = (cmath.phase(-t_in) - cmath.phase(t_out)) % (2 * math.pi)
            if theta <= 1e-9:
                theta = 2 * math.pi
            n = cp.order
        quantum = math.pi / abs(n + 2) if n != -2 else math.pi
        k = round(theta / quantum)
        if k == 0 and v_end != "inf":
            k = abs(n + 2) * 2 if n != -2 else 2
        theta_q = Fraction(k, abs(n + 2)) if n != -2 else Fraction(k)
        # theta_q is theta/pi; the vertex term is 1 - (n+2) theta / (2 pi).
        total += 1 - Fraction(n + 2) * theta_q / 2
    if interior_override is not None:
        interior = Fraction(interior_override)
    else:
        ring = np.concatenate(outline)
        interior = Fraction(0)
        on_boundary = {s.start_vertex() for s in sides}
        for ident, cp in crit.items():
            if not cp.is_finite or ident in on_boundary:
                continue
            if _point_in_polygon(cp.location, ring):
                interior += cp.order
    return total - 2 - interior


def _asymptote(seg: TrajectorySegment, dirs_all: dict) -> float:
    return dirs_all[seg.family][seg.end.direction]
