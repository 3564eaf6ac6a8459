"""
Complex polynomial arithmetic, root extraction and small eigenproblems.

Polynomials are stored with ascending coefficients.  Roots are always
returned in lexicographic ``(real, imag)`` order so that downstream results
are reproducible.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegreeError, DomainError

__all__ = [
    "Poly",
    "TriMatrix",
    "EigResult",
    "cubic_roots",
    "poly_roots",
    "from_roots",
    "eig_tridiagonal",
    "sort_roots",
]

ROOT_TOL = 1e-12
ROOT_MAXITER = 200
COEFF_TOL = 1e-13


def _is_zero(c):
    return c == 0


@dataclass(frozen=True)
class Poly:
    """Polynomial with ascending coefficients ``coeffs[k]`` of ``z**k``.

    Coefficients may be any numbers (``complex``, ``float``, ``Fraction``);
    arithmetic keeps their type so exact rational identities can be checked.
    Trailing zero coefficients are stripped, the zero polynomial is ``(0,)``.
    """

    coeffs: tuple

    def __post_init__(self):
        c = list(self.coeffs)
        if not c:
            c = [0]
        while len(c) > 1 and _is_zero(c[-1]):
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and _is_zero(self.coeffs[0])

    @property
    def leading(self):
        return self.coeffs[-1]

    def __call__(self, z):
        acc = self.coeffs[-1] * (z * 0 + 1) if isinstance(z, np.ndarray) else self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * z + c
        return acc

    def abs_eval(self, z):
        """Evaluate ``sum |c_k| |z|^k``, the scale used in backward errors."""
        r = abs(z)
        acc = abs(self.coeffs[-1]) * (r * 0 + 1.0)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * r + abs(c)
        return acc

    def deriv(self) -> "Poly":
        if self.degree == 0:
            return Poly((self.coeffs[0] * 0,))
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def monic(self) -> "Poly":
        if self.is_zero:
            raise DomainError("the zero polynomial has no monic form")
        lead = self.leading
        return Poly(tuple(c / lead for c in self.coeffs))

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, numbers.Number):
            return Poly((other,))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Poly(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def deflate(self, root, times: int = 1) -> "Poly":
        """Divide out ``(z - root)**times`` by synthetic division (remainder dropped)."""
        c = list(self.coeffs)
        for _ in range(times):
            if len(c) == 1:
                raise DegreeError("cannot deflate a constant")
            out = [0] * (len(c) - 1)
            acc = c[-1]
            out[-1] = acc
            for k in range(len(c) - 2, 0, -1):
                acc = acc * root + c[k]
                out[k - 1] = acc
            c = out
        return Poly(tuple(c))

    def as_array(self) -> np.ndarray:
        return np.asarray([complex(c) for c in self.coeffs], dtype=complex)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(complex(c).imag) <= tol for c in self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"


def sort_roots(roots) -> np.ndarray:
    """Sort complex numbers lexicographically by ``(real, imag)``."""
    r = np.asarray(roots, dtype=complex).ravel()
    order = np.lexsort((r.imag, r.real))
    return r[order]


def _symmetrize_conjugates(roots, tol=1e-8):
    # Real-coefficient polynomials: snap near-real roots onto the axis and
    # pair the rest exactly, so conjugation closure holds to the last bit.
    roots = list(roots)
    out = []
    used = [False] * len(roots)
    scale = max(1.0, max((abs(r) for r in roots), default=1.0))
    for i, r in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        if abs(r.imag) <= tol * scale:
            out.append(complex(r.real, 0.0))
            continue
        best, best_d = None, math.inf
        for j in range(len(roots)):
            if not used[j]:
                d = abs(roots[j] - r.conjugate())
                if d < best_d:
                    best, best_d = j, d
        if best is None or best_d > 1e-6 * scale:
            out.append(r)
            continue
        used[best] = True
        s = roots[best]
        re = 0.5 * (r.real + s.real)
        im = 0.5 * (abs(r.imag) + abs(s.imag))
        out.extend([complex(re, im), complex(re, -im)])
    return out


def _horner_pair(a, z):
    """Value and derivative of the descending-coefficient polynomial ``a``."""
    p = np.full_like(z, a[0])
    dp = np.zeros_like(z)
    for c in a[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _aberth(c: np.ndarray, tol=ROOT_TOL, maxiter=ROOT_MAXITER):
    """Aberth-Ehrlich iteration on ascending coefficients ``c`` (no zero roots).

    Returns ``(roots, converged)``.
    """
    n = len(c) - 1
    a = (c / c[-1])[::-1]
    absa = np.abs(a)
    # Start on a circle of radius equal to the geometric mean of |roots|.
    radius = abs(a[-1]) ** (1.0 / n)
    if not np.isfinite(radius) or radius == 0.0:
        radius = 1.0
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4
    z = radius * np.exp(1j * angles)
    active = np.ones(n, dtype=bool)
    for _ in range(maxiter):
        p, dp = _horner_pair(a, z)
        scale = np.zeros(n)
        r = np.abs(z)
        for coef in absa:
            scale = scale * r + coef
        done = np.abs(p) <= tol * scale * 1e-2
        active &= ~done
        if not active.any():
            return z, True
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            w = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(w)
        w[bad] = 0.0
        z = np.where(active, z - w, z)
        if np.all(np.abs(w[active]) <= 1e-16 * np.maximum(np.abs(z[active]), 1e-300)):
            return z, True
    p, _ = _horner_pair(a, z)
    scale = np.zeros(n)
    r = np.abs(z)
    for coef in absa:
        scale = scale * r + coef
    return z, bool(np.all(np.abs(p) <= tol * scale))


def _companion_roots(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -c[-2::-1] / c[-1]
    comp[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(comp)


def _newton_polish(c: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    a = c[::-1]
    for _ in range(steps):
        p, dp = _horner_pair(a, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = p / dp
        step[~np.isfinite(step)] = 0.0
        z = z - step
    return z


def _coefficient_error(c: np.ndarray, roots) -> float:
    """Relative coefficient mismatch between ``c`` (made monic) and ``prod (z - r)``."""
    monic = c / c[-1]
    rebuilt = np.poly(np.asarray(roots, dtype=complex))[::-1]
    return float(np.max(np.abs(rebuilt - monic)) / max(1.0, np.max(np.abs(monic))))


def _residual_ok(poly: Poly, roots) -> bool:
    c = poly.as_array()
    maxcoeff = np.max(np.abs(c))
    n = poly.degree
    for r in roots:
        bound = ROOT_TOL * max(1.0, abs(r) ** n) * maxcoeff
        if abs(poly(complex(r))) > bound:
            return False
    return True


def poly_roots(p: Poly) -> np.ndarray:
    """All roots of ``p`` counted with multiplicity.

    Aberth-Ehrlich simultaneous iteration (relative tolerance ``1e-12``,
    at most 200 sweeps) with a companion-matrix fallback.  Exact zero roots
    are split off first.  Real-coefficient inputs return an exactly
    conjugation-closed multiset.

    Raises
    ------
    DomainError
        For the zero polynomial.
    DegreeError
        For a nonzero constant.
    """
    if p.is_zero:
        raise DomainError("the zero polynomial has no finite root set")
    if p.degree < 1:
        raise DegreeError("poly_roots needs degree >= 1")
    c = p.as_array()
    nz = 0
    while c[nz] == 0:
        nz += 1
    c = c[nz:]
    roots = [0j] * nz
    if len(c) > 1:
        if len(c) == 2:
            found = np.array([-c[0] / c[1]])
        else:
            found, ok = _aberth(c)
            err = _coefficient_error(c, found)
            if not ok or not _residual_ok(Poly(tuple(c)), found) or err > COEFF_TOL:
                # Per-root residuals can be tiny for a badly shaped cluster;
                # the companion eigenvalues are backward stable as a set.
                alt = _companion_roots(c)
                if not _residual_ok(Poly(tuple(c)), alt):
                    alt = _newton_polish(c, alt)
                if _coefficient_error(c, alt) < err or not ok:
                    found = alt
        roots.extend(complex(r) for r in found)
    if p.is_real():
        roots = _symmetrize_conjugates(roots)
    return sort_roots(roots)


def cubic_roots(p: Poly) -> np.ndarray:
    """Three roots of a cubic, via the general root finder."""
    if p.degree != 3:
        raise DegreeError(f"expected a cubic, got degree {p.degree}")
    return poly_roots(p)


def from_roots(roots) -> Poly:
    """Monic polynomial with the given roots.

    Coefficients are the signed elementary symmetric functions of the roots,
    accumulated one linear factor at a time; exact number types are kept.
    """
    coeffs = [1]
    for r in roots:
        nxt = [0] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k + 1] = nxt[k + 1] + c
            nxt[k] = nxt[k] - r * c
        coeffs = nxt
    return Poly(tuple(coeffs))


@dataclass(frozen=True)
class TriMatrix:
    """Tridiagonal matrix: ``M[k, k] = diag[k]``, ``M[k+1, k] = sub[k]``,
    ``M[k, k+1] = sup[k]``."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag)
        sub = np.asarray(self.sub)
        sup = np.asarray(self.sup)
        n = len(diag)
        if n < 1 or len(sub) != n - 1 or len(sup) != n - 1:
            raise DomainError("inconsistent tridiagonal band lengths")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "sup", sup)

    @property
    def size(self) -> int:
        return len(self.diag)

    def to_dense(self) -> np.ndarray:
        dtype = np.result_type(self.diag, self.sub, self.sup, float)
        m = np.diag(self.diag.astype(dtype))
        if self.size > 1:
            m += np.diag(self.sub.astype(dtype), -1) + np.diag(self.sup.astype(dtype), 1)
        return m

    def matvec(self, v):
        v = np.asarray(v)
        out = self.diag * v
        if self.size > 1:
            out[1:] += self.sub * v[:-1]
            out[:-1] += self.sup * v[1:]
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_dense(), 2))


@dataclass
class EigResult:
    values: np.ndarray
    vectors: np.ndarray  # columns
    defective: bool = False
    method: str = ""
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _symmetrizable(m: TriMatrix) -> bool:
    if np.iscomplexobj(m.diag) and np.any(np.imag(m.diag) != 0):
        return False
    prod = np.asarray(m.sub * m.sup)
    if np.iscomplexobj(prod) and np.any(np.imag(prod) != 0):
        return False
    return bool(np.all(np.real(prod) > 0))


def _inverse_iteration(m: TriMatrix, w: np.ndarray, v: np.ndarray, steps: int = 4) -> np.ndarray:
    n = m.size
    if n == 1:
        return v.astype(complex)
    ab = np.zeros((3, n))
    ab[0, 1:] = np.real(m.sup)
    ab[2, :-1] = np.real(m.sub)
    scale = max(m.norm(), 1e-300)
    out = np.empty((n, len(w)), dtype=complex)
    for k, lam in enumerate(w):
        x = v[:, k].astype(float)
        shift = lam + 1e-13 * scale * (1 + k % 7)
        band = ab.copy()
        band[1, :] = np.real(m.diag) - shift
        for _ in range(steps):
            try:
                x = scipy.linalg.solve_banded((1, 1), band, x)
            except (np.linalg.LinAlgError, ValueError):
                break
            nrm = np.linalg.norm(x)
            if not np.isfinite(nrm) or nrm == 0:
                x = v[:, k].astype(float)
                break
            x = x / nrm
        out[:, k] = x
    return out


def eig_tridiagonal(m: TriMatrix) -> EigResult:
    """Eigenvalues and eigenvectors of a (possibly nonsymmetric) tridiagonal matrix.

    Sign-symmetric real matrices (``sub[k] * sup[k] > 0``) are balanced by a
    diagonal similarity into a symmetric Jacobi matrix and handed to LAPACK's
    symmetric tridiagonal solver; everything else goes through the dense
    nonsymmetric solver.  Eigenpairs are sorted by ``(real, imag)``; the
    result is flagged ``defective`` when the eigenvector basis is numerically
    singular.
    """
    n = m.size
    if _symmetrizable(m):
        diag = np.real(np.asarray(m.diag, dtype=complex))
        sub = np.real(np.asarray(m.sub, dtype=complex))
        sup = np.real(np.asarray(m.sup, dtype=complex))
        off = np.sqrt(sub * sup)
        if n == 1:
            w, u = diag.copy(), np.ones((1, 1))
        else:
            w, u = scipy.linalg.eigh_tridiagonal(diag, off)
        # v = D u with d[k+1]/d[k] = sqrt(sub[k]/sup[k]); work in logs.
        logd = np.concatenate([[0.0], np.cumsum(0.5 * np.log(np.abs(sub / sup)))])
        with np.errstate(divide="ignore"):
            logv = logd[:, None] + np.log(np.abs(u))
        logv -= np.max(logv, axis=0, keepdims=True)
        sgn = np.sign(u) * np.sign(np.concatenate([[1.0], np.cumprod(np.sign(sub / sup))]))[:, None]
        v = sgn * np.exp(logv)
        v /= np.linalg.norm(v, axis=0, keepdims=True)
        values = w.astype(complex)
        # The diagonal similarity can amplify rounding in small components;
        # inverse iteration on the original matrix restores a small residual.
        vectors = _inverse_iteration(m, w, v)
        method = "symmetrized"
    else:
        w, v = np.linalg.eig(m.to_dense().astype(complex))
        values, vectors = w, v
        method = "dense"
    if method == "symmetrized" and n > 1:
        scale = m.norm()
        res = np.linalg.norm(m.to_dense() @ vectors - vectors * values[None, :], axis=0)
        if np.any(res > 1e-10 * scale):
            w, v = np.linalg.eig(m.to_dense().astype(complex))
            values, vectors, method = w, v, "dense"
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    res = np.array(
        [np.linalg.norm(m.matvec(vectors[:, k]) - values[k] * vectors[:, k]) for k in range(n)]
    )
    defective = False
    if method == "dense" and n > 1:
        with np.errstate(all="ignore"):
            cond = np.linalg.cond(vectors)
        defective = bool(not np.isfinite(cond) or cond > 1e10)
    return EigResult(values, vectors, defective, method, res)
