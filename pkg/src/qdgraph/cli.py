"""
Command-line front end.

    qdiff classify --a 1.6+2i
    qdiff graph --a 1.8+2i --out graph.csv --svg graph.svg
    qdiff sigma --out sigma.csv
    qdiff periods --a 2i
    qdiff spectrum --m-range 10,20,40 --gamma 0
    qdiff measure --gamma 0 --delta 1
    qdiff verify

Exit codes: 0 success, 1 invariant failure, 2 incomplete computation,
3 invalid or degenerate input.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from typing import Optional

import numpy as np

from . import measure, periods, spectral, verify
from .errors import DegenerateError, NoMeasure, NotApplicable, QDError
from .qdiff import critical_points, from_apex, from_parameters, from_roots_qd, normalize_to_unit_root
from .render import PlotDocument, csv_text, to_svg, write_text
from .tracer import Budget, build_critical_graph

EXIT_OK, EXIT_FAIL, EXIT_INCOMPLETE, EXIT_INPUT = 0, 1, 2, 3

PREDICTED_SHORTS = {"Omega1": 2, "Omega2": 2, "Sigma": 3}


class InputError(Exception):
    """Invalid command-line or configuration input (exit code 3)."""


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """Parse ``a+bi`` style numbers (``2i``, ``-i``, ``1.6 + 2i``, ``3``)."""
    s = re.sub(r"\s+", "", str(text)).replace("I", "i").replace("j", "i")
    if not s:
        raise InputError("empty complex number")
    s = re.sub(r"(^|[+\-])i", r"\g<1>1i", s)
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise InputError(f"cannot parse complex number {text!r}") from None


def parse_roots(text: str) -> list:
    parts = [p for p in str(text).split(",") if p.strip()]
    if len(parts) != 3:
        raise InputError("--roots needs three comma-separated values")
    return [parse_complex(p) for p in parts]


def parse_m_range(text: str) -> list:
    """``10,20,40`` or ``start:stop[:step]`` (inclusive stop)."""
    s = str(text).strip()
    if ":" in s:
        parts = [int(p) for p in s.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        if step <= 0:
            raise InputError("m-range step must be positive")
        return list(range(start, stop + 1, step))
    return [int(p) for p in s.split(",") if p.strip()]


def load_config(path: str) -> dict:
    """Flat ``key=value`` file; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{n}: expected key=value")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    # Flags given on the command line win over the config file.
    if getattr(args, "config", None):
        for key, value in load_config(args.config).items():
            if not hasattr(args, key):
                raise InputError(f"unknown config key {key!r}")
            if getattr(args, key) is None:
                setattr(args, key, value)
    for name in ("eps_hit", "escape_radius", "tol"):
        v = getattr(args, name, None)
        if v is not None:
            v = float(v)
            if not v > 0:
                raise InputError(f"--{name.replace('_', '-')} must be positive")
            setattr(args, name, v)
    return args


def _budget(args) -> Budget:
    kw = {}
    if getattr(args, "eps_hit", None) is not None:
        kw["eps_hit"] = args.eps_hit
    if getattr(args, "escape_radius", None) is not None:
        kw["escape_radius"] = args.escape_radius
    return Budget(**kw)


def _geometry(args):
    """Differential from exactly one of --a, --roots, (--gamma, --delta)."""
    given = [args.a is not None, args.roots is not None, args.gamma is not None or args.delta is not None]
    if sum(given) != 1:
        raise InputError("give exactly one of --a, --roots, or --gamma/--delta")
    if args.a is not None:
        return from_apex(parse_complex(args.a)), f"apex {args.a}"
    if args.roots is not None:
        return from_roots_qd(parse_roots(args.roots)), f"roots {args.roots}"
    if args.gamma is None or args.delta is None:
        raise InputError("--gamma and --delta go together")
    return from_parameters(parse_complex(args.gamma), parse_complex(args.delta)), "parameters"


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        write_text(path, text)
    else:
        sys.stdout.write(text)


def _real_if_possible(z: complex):
    return z.real if z.imag == 0 else z


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_classify(args) -> int:
    if args.a is not None:
        a = parse_complex(args.a)
    elif args.roots is not None:
        try:
            r, a = normalize_to_unit_root(from_roots_qd(parse_roots(args.roots)).q)
        except NotApplicable as exc:
            print(f"not in the apex family: {exc}")
            return EXIT_INPUT
        print(f"normalized by r = {r:.17g}: apex {a.real:.17g}{a.imag:+.17g}i")
    else:
        raise InputError("classify needs --a or --roots")
    cls = periods.classify_apex(a)
    graph = build_critical_graph(from_apex(a), _budget(args))
    traced = len(graph.shorts)
    predicted = PREDICTED_SHORTS[cls.region]
    name = {"Omega1": "Ω1", "Omega2": "Ω2", "Sigma": "Σ (within band)"}[cls.region]
    print(f"{name}, shorts={traced}")
    print(f"S(a) = {cls.S:.6e}  margin = {cls.margin:.3e}  band = {cls.band:.0e}")
    print(f"predicted shorts = {predicted}  traced shorts = {traced}")
    for s in graph.shorts:
        print(f"  short {s.endpoints[0]}-{s.endpoints[1]}")
    if cls.near_sigma:
        b = periods.snap_to_sigma(a)
        n_sigma = len(build_critical_graph(from_apex(b), _budget(args)).shorts)
        print(
            f"near Σ: nearest curve point at the same height is {b.real:.12f}{b.imag:+.12f}i "
            f"(distance {abs(b - a):.3e}), shorts there = {n_sigma}"
        )
    if not graph.complete:
        return EXIT_INCOMPLETE
    return EXIT_OK if traced == predicted else EXIT_INCOMPLETE


def _graph_document(qd, graph):
    doc = PlotDocument()
    short_segs = {s.segment: s for s in graph.shorts}
    partners = {s.partner for s in graph.shorts if s.partner is not None}
    rows = []
    for i, seg in enumerate(graph.segments):
        if i in partners:
            continue
        if i in short_segs:
            kind = "short"
        elif seg.end.kind == "escaped":
            kind = "infinite"
        else:
            kind = seg.end.kind
        ident = f"seg{i:03d}"
        cls = kind if kind in ("short", "infinite") else "aborted"
        doc.add_polyline(ident, cls, seg.points)
        rows.extend((ident, kind, float(p.real), float(p.imag)) for p in seg.points)
    for cp in critical_points(qd):
        if cp.is_finite:
            doc.add_marker(cp.ident, "pole" if cp.kind == "pole" else "critical", cp.location)
            rows.append((cp.ident, f"critical-{cp.kind}", float(cp.location.real), float(cp.location.imag)))
    return doc, rows


def cmd_graph(args) -> int:
    qd, label = _geometry(args)
    try:
        graph = build_critical_graph(qd, _budget(args))
    except DegenerateError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    doc, rows = _graph_document(qd, graph)
    _emit(csv_text(("segment_id", "kind", "re", "im"), rows), args.out)
    if args.svg:
        write_text(args.svg, to_svg(doc))
    pairs = ", ".join(f"{a}-{b}" for a, b in graph.short_pairs())
    print(f"{label}: {len(graph.segments)} critical rays, {len(graph.shorts)} shorts [{pairs}]", file=sys.stderr)
    return EXIT_OK if graph.complete else EXIT_INCOMPLETE


def cmd_sigma(args) -> int:
    curve = periods.trace_sigma()
    pts = curve.with_conjugate()
    res = np.concatenate([curve.residuals[::-1], curve.residuals[1:]])
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
    rows = [(float(si), float(p.real), float(p.imag), float(r)) for si, p, r in zip(s, pts, res)]
    _emit(csv_text(("s", "re", "im", "S_residual"), rows), args.out)
    if args.svg:
        doc = PlotDocument(window=(-0.5, 4.5, -3.5, 3.5))
        doc.add_polyline("sigma", "sigma", pts[np.abs(pts) < 10])
        write_text(args.svg, to_svg(doc))
    top = float(np.max(np.abs(curve.points)))
    far = curve.angle_at_modulus(min(1000.0, top))
    print(
        f"angle at z=1: {curve.tangent_angle_at_one():.3f} deg (local blow-up value "
        f"{periods.blowup_tangent_angle():.3f} deg, asymptotic statement 60 deg); "
        f"arg z at |z|={min(1000.0, top):g}: {far:.3f} deg (asymptotic statement 90 deg)",
        file=sys.stderr,
    )
    if not curve.complete:
        print(f"continuation stopped: {curve.message}", file=sys.stderr)
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_periods(args) -> int:
    qd, label = _geometry(args)
    exact = periods.residue_at_infinity(qd.q)
    print(f"{label}")
    print(f"(alpha^2 - 4 beta)/8 = {exact}")
    try:
        val = periods.closed_contour_period(qd, radius=2 * max(4.0, float(np.max(np.abs(qd.roots)))))
        print(f"half contour integral = {val.real:.15g}{val.imag:+.15g}i  (expected -i pi (alpha^2 - 4 beta)/8)")
    except QDError as exc:
        print(f"contour period unavailable: {exc}")
    if args.a is not None:
        a = parse_complex(args.a)
        for side in ("left", "right"):
            v = periods.period_integral(qd, periods.conjugate_arc_path(a, side))
            print(f"a -> conj(a) ({side} of [0,1]): {v.real:.3e}{v.imag:+.15g}i")
        print(f"S(a) real-variable route = {periods.sigma_value(a):.15g}")
        print(f"S(a) complex-path route  = {periods.sigma_value_path(a):.15g}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    gamma = float(parse_complex(args.gamma).real) if args.gamma is not None else 0.0
    if args.m_range is not None:
        ms = parse_m_range(args.m_range)
    elif args.m is not None:
        ms = [int(args.m)]
    else:
        raise InputError("spectrum needs --m or --m-range")
    if not ms or min(ms) < 1:
        raise InputError("m must be >= 1")
    selector = args.selector if args.selector is not None else "max"
    rows, scatter = [], []
    table = []
    for m in ms:
        sol = spectral.spectrum(spectral.SpectralProblem(m, gamma))
        for k, lam in enumerate(sol.eigenvalues):
            rows.append((m, k, float(lam.real), float(lam.imag), lam.real / m**1.5, lam.real / m ** (4 / 3)))
        k = spectral.select_index(selector, m)
        z = sol.roots(k) / math.sqrt(m)
        scatter.extend((m, k, j, float(p.real), float(p.imag)) for j, p in enumerate(z))
        dh = float(sol.eigenvalues[k].real) / m**1.5
        try:
            sup = measure.support(gamma, dh)
            hd = measure.hausdorff_to_support(z, sup)
        except (NoMeasure, QDError):
            sup, hd = None, float("nan")
        table.append((m, k, dh, hd, sup, z))
    _emit(csv_text(("m", "k", "re_lambda", "im_lambda", "lambda_m32", "lambda_m43"), rows), args.out)
    if args.out:
        write_text(args.out + ".roots.csv", csv_text(("m", "k", "index", "re", "im"), scatter))
    print("m,k,delta_hat,hausdorff", file=sys.stderr)
    for m, k, dh, hd, _, _ in table:
        print(f"{m},{k},{dh:.12g},{hd:.6g}", file=sys.stderr)
    if len(ms) >= 3 and sorted(ms) == ms and len(set(ms)) == len(ms):
        dt = spectral.delta_estimates(ms, gamma, selector)
        print("scaled eigenvalues lambda/m^(3/2): " + ", ".join(f"{v:.8f}" for v in dt.scaled_32), file=sys.stderr)
        print("scaled eigenvalues lambda/m^(4/3): " + ", ".join(f"{v:.8f}" for v in dt.scaled_43), file=sys.stderr)
        print(f"stabilizing exponent: {dt.stabilizing}", file=sys.stderr)
    if args.svg:
        m, k, dh, hd, sup, z = table[-1]
        doc = PlotDocument()
        if sup is not None:
            for i, arc in enumerate(sup.arcs):
                doc.add_polyline(f"support{i}", "support", arc.points)
        for j, p in enumerate(z):
            doc.add_marker(f"root{j:03d}", "roots", p)
        write_text(args.svg, to_svg(doc))
    return EXIT_OK


def cmd_measure(args) -> int:
    if args.gamma is None or args.delta is None:
        raise InputError("measure needs --gamma and --delta")
    g = _real_if_possible(parse_complex(args.gamma))
    d = _real_if_possible(parse_complex(args.delta))
    try:
        sup = measure.support(g, d, _budget(args))
    except NoMeasure as exc:
        print(f"no measure: {exc}")
        return EXIT_INPUT if exc.reason == "Degenerate" else EXIT_INCOMPLETE
    tol = args.tol if args.tol is not None else 1e-6
    mass = measure.total_mass(sup)
    print(f"regime: {sup.regime}")
    for arc in sup.arcs:
        print(f"  arc {arc.ends[0]} -> {arc.ends[1]}: mass {arc.mass.real:.12f}{arc.mass.imag:+.1e}i")
    print(f"total mass: {mass.real:.15f}{mass.imag:+.1e}i")
    rng = np.random.default_rng(0)
    zs = rng.uniform(-4, 4, 50) + 1j * rng.uniform(0.3, 4, 50) * rng.choice([-1, 1], 50)
    err = max(abs(measure.cauchy_numeric(sup, z) - measure.cauchy_closed_form(z, g, d, sup)) for z in zs)
    print(f"Cauchy transform, numeric vs closed form (50 points): {err:.3e}")
    rows = []
    for i, arc in enumerate(sup.arcs):
        rows.extend((f"arc{i}", float(s), float(p.real), float(p.imag), float(np.real(r)))
                    for s, p, r in zip(arc.samples, arc.points[1:-1], arc.density_samples))
    if args.out:
        write_text(args.out, csv_text(("arc_id", "s", "re", "im", "density"), rows))
    if args.svg:
        doc = PlotDocument()
        for i, arc in enumerate(sup.arcs):
            doc.add_polyline(f"arc{i}", "support", arc.points)
        for cp in critical_points(sup.qd):
            if cp.is_finite:
                doc.add_marker(cp.ident, "pole" if cp.kind == "pole" else "critical", cp.location)
        write_text(args.svg, to_svg(doc))
    ok = abs(mass - 1) <= tol and err <= tol
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    checks = verify.run_suite(args.tol)
    print(verify.format_report(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


COMMANDS = {
    "classify": cmd_classify,
    "graph": cmd_graph,
    "sigma": cmd_sigma,
    "periods": cmd_periods,
    "spectrum": cmd_spectrum,
    "measure": cmd_measure,
    "verify": cmd_verify,
}


HELP = {
    "classify": "region of an apex (Omega1, Sigma, Omega2) with traced short count",
    "graph": "critical graph as CSV, optionally SVG",
    "sigma": "the curve Sigma as CSV, optionally SVG",
    "periods": "period integrals and the residue at infinity",
    "spectrum": "eigenvalues, rescaled roots and delta-scaling tables",
    "measure": "support, masses and Cauchy transform check of the limit measure",
    "verify": "run the invariant suite",
}


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the invalid-input code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qdiff",
        description="Critical graphs of -q(z)/z dz^2, the curve Sigma, and the sextic oscillator limit measure.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--a", help="apex in the upper half-plane, e.g. 1.6+2i")
        p.add_argument("--roots", help="three comma-separated zeros of q")
        p.add_argument("--gamma", help="coupling gamma")
        p.add_argument("--delta", help="parameter delta")
        p.add_argument("--m", help="degree bound m")
        p.add_argument("--m-range", dest="m_range", help="list 10,20,40 or range 10:40:10")
        p.add_argument("--selector", help="eigen index: max, min, an index k, or fraction:theta")
        p.add_argument("--eps-hit", dest="eps_hit", help="hit radius around critical points")
        p.add_argument("--escape-radius", dest="escape_radius", help="radius counted as reaching infinity")
        p.add_argument("--tol", help="tolerance override")
        p.add_argument("--out", help="CSV output path (stdout if omitted)")
        p.add_argument("--svg", help="SVG output path")
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve(args)
        return COMMANDS[args.command](args)
    except (InputError, QDError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
