"""
Adaptive Gauss-Legendre quadrature with 32-node panels.

Two entry points:

* :func:`adaptive_gl` integrates a vectorized function over a real interval,
  optionally removing an inverse-square-root or square-root endpoint
  behaviour with a quadratic change of variables.
* :func:`branch_line_integral` integrates ``w(t) sqrt(q(t)/t) dt`` along a
  straight segment in the complex plane, carrying the square-root branch from
  panel to panel in path order.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import BranchJump
from .qdiff import BranchState, QuadDifferential

__all__ = ["gl_rule", "adaptive_gl", "branch_line_integral"]

PANEL_NODES = 32
MAX_DEPTH = 30
RTOL = 4e-15
# Cap on subdivisions per call.  An integrand whose evaluation is noisier
# than the tolerance (e.g. ``1/sqrt(1 - t)`` evaluated from ``t`` near 1)
# would otherwise refine every panel down to ``MAX_DEPTH``.
MAX_SPLITS = 20000


@lru_cache(maxsize=8)
def gl_rule(n: int = PANEL_NODES):
    """Gauss-Legendre nodes and weights mapped to ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _parametrization(singular):
    """Return ``(from_end, power, p_start, p_stop)`` for a segment parametrization.

    Points are ``base + direction * p**power`` where ``base`` is the start
    (or, with ``from_end``, the end) of the segment.  Measuring from the
    singular endpoint keeps full relative precision in ``t - endpoint``.
    The parameter runs from ``p_start`` to ``p_stop`` in path order.
    """
    if singular in (None, "none"):
        return False, 1, 0.0, 1.0
    if singular == "start":
        return False, 2, 0.0, 1.0
    if singular == "end":
        return True, 2, 1.0, 0.0
    raise ValueError(f"unknown singular flag {singular!r}")


def _adaptive(panel, p_start, p_stop, tol, rtol, max_depth):
    # Generic driver: panels are refined depth-first in path order.
    total = None
    stack = [(p_start, p_stop, 0, None)]
    splits = 0
    while stack:
        p0, p1, depth, whole = stack.pop()
        if whole is None:
            whole = panel(p0, p1)
        mid = 0.5 * (p0 + p1)
        left, right = panel(p0, mid), panel(mid, p1)
        diff = abs(whole - (left + right))
        splits += 1
        if (
            diff <= tol * abs(p1 - p0)
            or diff <= rtol * abs(left + right)
            or depth >= max_depth
            or splits > MAX_SPLITS
        ):
            total = left + right if total is None else total + left + right
        else:
            stack.append((mid, p1, depth + 1, right))
            stack.append((p0, mid, depth + 1, left))
    return total


def adaptive_gl(
    f, a: float, b: float, tol: float = 1e-13, singular=None, max_depth: int = MAX_DEPTH, rtol: float = RTOL
):
    """Integrate a vectorized ``f`` over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Accepts a float array and returns real or complex values.
    a, b : float
        Interval ends (``b < a`` flips the sign as usual).
    tol : float
        Absolute tolerance for the whole interval.
    rtol : float
        Relative tolerance per panel, so large integrands do not chase
        digits below rounding.
    singular : {None, "start", "end", "both"}
        Ends where ``f`` behaves like ``|t - end|^(+-1/2)``; these are
        treated with ``t = end + (.)s^2``.

    Returns
    -------
    value
        The integral estimate.
    """
    if singular == "both":
        mid = 0.5 * (a + b)
        return adaptive_gl(f, a, mid, tol / 2, "start", max_depth, rtol) + adaptive_gl(
            f, mid, b, tol / 2, "end", max_depth, rtol
        )
    from_end, power, p_start, p_stop = _parametrization(singular)
    base, direction = (b, a - b) if from_end else (a, b - a)
    x, w = gl_rule()

    def panel(p0, p1):
        p = p0 + (p1 - p0) * x
        jac = power * p ** (power - 1) * direction
        return (p1 - p0) * np.dot(w, f(base + direction * p**power) * jac)

    return _adaptive(panel, p_start, p_stop, tol, rtol, max_depth)


def _branch_values(qd: QuadDifferential, t: np.ndarray, state: BranchState):
    """Continue ``sqrt(Q)`` through the ordered nodes ``t`` starting from ``state``.

    Each node takes the root of ``Q`` nearest to the previous value transported
    by ``sqrt(Q(t_k)/Q(t_{k-1}))``.  Returns ``(values, ok)``; ``ok`` is false
    when some step turns the phase of ``Q`` by more than ``pi/2``, meaning the
    nodes are too sparse to fix the sign unambiguously.
    """
    qt = qd.Q(t)
    w = np.sqrt(qt)
    prev_q = np.concatenate([[state.value * state.value], qt[:-1]])
    prev_w = np.concatenate([[state.value], w[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = qt / prev_q
    ok = bool(np.all(np.isfinite(ratio))) and bool(np.all(np.abs(np.angle(ratio)) <= np.pi / 2))
    step = np.real(w * np.conj(prev_w * np.sqrt(ratio))) < 0
    # prev_w[0] is the chosen state value; later entries are principal roots,
    # so the accumulated product of relative signs gives the chosen signs.
    sgn = np.cumprod(np.where(step, -1.0, 1.0))
    return w * sgn, ok


def branch_line_integral(
    qd: QuadDifferential,
    A: complex,
    B: complex,
    state: BranchState,
    singular=None,
    weight=None,
    tol: float = 1e-13,
    max_depth: int = MAX_DEPTH,
    rtol: float = RTOL,
):
    """Integrate ``weight(t) sqrt(q(t)/t)`` along the segment from ``A`` to ``B``.

    The branch is continued from ``state`` (whose point should lie near the
    start of the segment) through the quadrature nodes in path order.

    Parameters
    ----------
    singular : {None, "start", "end"}
        Endpoint at which ``sqrt(q/t)`` has a square-root zero or an
        inverse-square-root pole.
    weight : callable, optional
        Vectorized analytic weight.

    Returns
    -------
    tuple
        ``(value, state)``, where the state sits at the last node visited.
    """
    A, B = complex(A), complex(B)
    from_end, power, p_start, p_stop = _parametrization(singular)
    base, direction = (B, A - B) if from_end else (A, B - A)
    x, w = gl_rule()

    def panel(p0, p1, st):
        p = p0 + (p1 - p0) * x
        t = base + direction * p**power
        jac = power * p ** (power - 1) * direction
        vals, ok = _branch_values(qd, t, st)
        end = BranchState(complex(t[-1]), complex(vals[-1]))
        if weight is not None:
            vals = vals * weight(t)
        return (p1 - p0) * np.dot(w, vals * jac), end, ok

    total = 0j
    whole0, _, ok0 = panel(p_start, p_stop, state)
    stack = [(p_start, p_stop, 0, whole0 if ok0 else None)]
    splits = 0
    while stack:
        p0, p1, depth, whole = stack.pop()
        splits += 1
        mid = 0.5 * (p0 + p1)
        left, st_l, ok_l = panel(p0, mid, state)
        right, st_r, ok_r = panel(mid, p1, st_l)
        halves_ok = ok_l and ok_r
        good = whole is not None and halves_ok
        if good:
            diff = abs(whole - (left + right))
            good = diff <= tol * abs(p1 - p0) or diff <= rtol * abs(left + right)
        if good or ((depth >= max_depth or splits > MAX_SPLITS) and halves_ok):
            total += left + right
            state = st_r
        elif depth >= max_depth:
            raise BranchJump(f"cannot resolve the branch near {base + direction * p0**power}")
        else:
            stack.append((mid, p1, depth + 1, right if ok_r else None))
            stack.append((p0, mid, depth + 1, left if ok_l else None))
    return total, state
