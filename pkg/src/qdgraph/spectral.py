"""
The quasi-exactly solvable sextic oscillator in its polynomial form.

After the substitution ``z = x^2`` the eigenvalue problem reduces to

    4 z q'' - (4 z^2 + 2 c z - 2) q' + (4 m z - c/2 + lambda) q = 0,
    c = gamma * sqrt(m),

on polynomials of degree at most ``m``.  The operator

    L = -4 z d^2/dz^2 + (4 z^2 + 2 c z - 2) d/dz - (4 m z - c/2)

maps that space into itself, so ``L q = lambda q`` is an ``(m+1)``-dimensional
tridiagonal eigenproblem.  The roots of an eigenpolynomial are the
equilibrium of a one-dimensional electrostatic problem,

    sum_{j != i} 1/(z_i - z_j) = z_i/2 + c/4 - 1/(4 z_i),

which is how they are computed here (the monomial coefficients are too badly
scaled for a general root finder once ``m`` is a few dozen).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .algebra import Poly, TriMatrix, eig_tridiagonal, poly_roots
from .errors import DomainError

__all__ = [
    "SpectralProblem",
    "SpectralSolution",
    "RootMeasure",
    "DeltaTable",
    "operator_matrix",
    "operator_matrix_exact",
    "apply_operator",
    "spectrum",
    "electrostatic_roots",
    "eigenvalue_from_roots",
    "riccati_residual",
    "eq2_residual",
    "rescaled_root_measure",
    "cauchy_of_roots",
    "select_index",
    "delta_estimates",
]


@dataclass(frozen=True)
class SpectralProblem:
    """Degree bound ``m >= 1`` and real coupling ``gamma``."""

    m: int
    gamma: float = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("m must be an integer >= 1")
        if complex(self.gamma).imag != 0:
            raise DomainError("the coupling must be real in spectral runs")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "gamma", float(complex(self.gamma).real))

    @property
    def coupling(self) -> float:
        """``c = gamma * sqrt(m)``."""
        return self.gamma * math.sqrt(self.m)


def _bands(m: int, c):
    k = range(m + 1)
    diag = [c * (2 * j + Fraction(1, 2)) if isinstance(c, Fraction) else c * (2 * j + 0.5) for j in k]
    sup = [-2 * (j + 1) * (2 * j + 1) for j in range(m)]
    sub = [4 * (j - 1) - 4 * m for j in range(1, m + 1)]
    return sub, diag, sup


def operator_matrix(p: SpectralProblem) -> TriMatrix:
    """Matrix of ``L`` on ``1, z, ..., z^m`` (column ``k`` is the image of ``z^k``).

    ``M[k, k+1] = -2 (k+1)(2k+1)``, ``M[k, k] = c (2k + 1/2)``,
    ``M[k, k-1] = 4 (k-1) - 4 m``.  The coefficient that would carry ``z^m``
    to ``z^(m+1)`` is ``4m - 4m = 0``.
    """
    sub, diag, sup = _bands(p.m, p.coupling)
    return TriMatrix(np.asarray(sub, float), np.asarray(diag, float), np.asarray(sup, float))


def operator_matrix_exact(m: int, coupling) -> list:
    """Dense exact matrix (nested lists of ``Fraction``) for rational ``c``."""
    c = Fraction(coupling)
    sub, diag, sup = _bands(m, c)
    n = m + 1
    M = [[Fraction(0)] * n for _ in range(n)]
    for k in range(n):
        M[k][k] = Fraction(diag[k])
        if k + 1 < n:
            M[k][k + 1] = Fraction(sup[k])
            M[k + 1][k] = Fraction(sub[k])
    return M


def apply_operator(coeffs, m: int, coupling) -> list:
    """Apply ``L`` to a polynomial given by ascending coefficients (exact types kept).

    Returns ``m + 2`` coefficients; the last one is the ``z^(m+1)`` overflow.
    """
    coeffs = list(coeffs) + [0] * (m + 1 - len(coeffs))
    out = [0] * (m + 2)
    for k, a in enumerate(coeffs):
        if a == 0:
            continue
        # -4 z (z^k)'' + (4 z^2 + 2 c z - 2)(z^k)' - (4 m z - c/2) z^k
        if k >= 1:
            out[k - 1] += a * (-4 * k * (k - 1) - 2 * k)
        out[k] += a * (2 * coupling * k + coupling / 2)
        out[k + 1] += a * (4 * k - 4 * m)
    return out


@dataclass(frozen=True)
class RootMeasure:
    points: np.ndarray
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))


@dataclass
class SpectralSolution:
    """Eigenvalues, monic eigenpolynomials and (lazily) their roots."""

    problem: SpectralProblem
    matrix: TriMatrix
    eigenvalues: np.ndarray
    eigenpolys: np.ndarray  # column k: ascending coefficients, monic
    residuals: np.ndarray
    defective: bool = False
    _roots: dict = field(default_factory=dict, repr=False)
    _from_equilibrium: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return self.problem.m

    def roots(self, k: int) -> np.ndarray:
        """Roots of the ``k``-th eigenpolynomial (eigenvalues in ascending order)."""
        if k not in self._roots:
            self._roots[k] = _roots_for(self, k)
        return self._roots[k]

    def poly(self, k: int) -> Poly:
        return Poly(tuple(self.eigenpolys[:, k]))


def spectrum(p: SpectralProblem) -> SpectralSolution:
    """All ``m + 1`` eigenpairs of ``L``.

    Eigenvalues come from the tridiagonal solver.  Eigenpolynomials are
    assembled from the electrostatic roots, which is far better conditioned
    than back-transforming the symmetrized eigenvectors; the dense
    eigenvector is kept as a fallback when the equilibrium solve fails.
    ``residuals`` holds componentwise relative residuals
    ``||(M - lambda) c|| / || |M| |c| ||``.
    """
    M = operator_matrix(p)
    res = eig_tridiagonal(M)
    if res.defective:
        warnings.warn("eigenvector basis is numerically singular", RuntimeWarning)
    vals = res.values
    if np.all(np.abs(vals.imag) <= 1e-12 * max(1.0, np.max(np.abs(vals)))):
        vals = vals.real.astype(complex)
    lead = res.vectors[-1, :]
    safe = np.where(lead == 0, 1.0, lead)
    polys = res.vectors / safe[None, :]
    sol = SpectralSolution(p, M, vals, polys, np.zeros(p.m + 1), res.defective)
    absM = np.abs(M.to_dense())
    for k in range(p.m + 1):
        r = sol.roots(k)
        if sol._from_equilibrium.get(k):
            polys[:, k] = np.poly(r)[::-1]
        c = polys[:, k]
        num = np.linalg.norm(M.matvec(c) - vals[k] * c)
        sol.residuals[k] = num / max(np.linalg.norm(absM @ np.abs(c)), 1e-300)
    return sol


def electrostatic_roots(m: int, coupling: float, n_positive: int, max_iter: int = 200):
    """Solve the electrostatic equilibrium with ``n_positive`` positive charges.

    Damped Newton on the gradient of a strictly convex energy; steps are
    halved until the ordering and the signs of the charges are preserved.

    Returns
    -------
    tuple
        ``(roots ascending, converged)``.
    """
    if not 0 <= n_positive <= m:
        raise DomainError("n_positive must lie in [0, m]")
    c4 = coupling / 4.0
    scale = 1.5 * math.sqrt(m)
    neg = np.linspace(-1.0, -0.05, m - n_positive) * scale if m - n_positive else np.zeros(0)
    pos = np.linspace(0.05, 1.0, n_positive) * scale if n_positive else np.zeros(0)
    x = np.concatenate([neg, pos])
    converged = False
    for _ in range(max_iter):
        D = x[:, None] - x[None, :]
        np.fill_diagonal(D, np.inf)
        inv = 1.0 / D
        f = inv.sum(axis=1) - (x / 2 + c4 - 1.0 / (4 * x))
        J = inv**2
        np.fill_diagonal(J, 0.0)
        J[np.diag_indices(m)] = -J.sum(axis=1) - (0.5 + 1.0 / (4 * x * x))
        dx = np.linalg.solve(J, -f)
        t = 1.0
        for _halve in range(60):
            xn = x + t * dx
            if np.all(np.diff(xn) > 0) and np.all(np.sign(xn) == np.sign(x)):
                break
            t *= 0.5
        x = xn
        if np.max(np.abs(dx)) <= 1e-14 * max(1.0, np.max(np.abs(x))):
            converged = True
            break
    return x, converged


def eigenvalue_from_roots(roots, m: int, coupling: float) -> float:
    """``lambda = 4 sum z_i + c (2m + 1/2)`` from comparing top coefficients."""
    return 4.0 * float(np.sum(np.real(roots))) + coupling * (2 * m + 0.5)


def _roots_for(sol: SpectralSolution, k: int) -> np.ndarray:
    m, c = sol.m, sol.problem.coupling
    lam = sol.eigenvalues[k].real
    x, ok = electrostatic_roots(m, c, k)
    scale = max(1.0, float(np.max(np.abs(sol.eigenvalues))))
    if ok and abs(eigenvalue_from_roots(x, m, c) - lam) <= 1e-9 * scale:
        sol._from_equilibrium[k] = True
        return x.astype(complex)
    sol._from_equilibrium[k] = False
    return poly_roots(sol.poly(k))


def riccati_residual(q, lam: complex, z, m: int, coupling: float, relative: bool = True):
    """Left side of the Riccati form of the eigen-equation at ``z``.

    ``4 z m C^2 - (4 z^2 + 2 c z - 2) C + (4 m z - c/2 + lambda)/m + 4 z C'``
    with ``C = q'/(m q)``.  ``q`` is either a :class:`Poly` or an array of
    roots (preferred for large ``m``).  With ``relative=True`` the value is
    divided by the sum of the moduli of the four terms.

    Raises
    ------
    DomainError
        If ``z`` is a root of ``q``.
    """
    z = complex(z)
    if isinstance(q, Poly):
        qv = complex(q(z))
        if qv == 0:
            raise DomainError("z is a root of q")
        d1 = complex(q.deriv()(z)) / qv
        d2 = complex(q.deriv().deriv()(z)) / qv
        C = d1 / m
        Cp = (d2 - d1 * d1) / m
    else:
        r = np.asarray(q, dtype=complex)
        if np.any(r == z):
            raise DomainError("z is a root of q")
        inv = 1.0 / (z - r)
        C = complex(np.sum(inv)) / m
        Cp = -complex(np.sum(inv * inv)) / m
    terms = (
        4 * z * m * C * C,
        -(4 * z * z + 2 * coupling * z - 2) * C,
        (4 * m * z - coupling / 2 + lam) / m,
        4 * z * Cp,
    )
    total = sum(terms)
    if relative:
        return total / max(sum(abs(t) for t in terms), 1e-300)
    return total


def eq2_residual(q, lam: complex, z, m: int, coupling: float) -> complex:
    """Relative residual of ``4 z q'' - (4 z^2 + 2 c z - 2) q' + (4 m z - c/2 + lambda) q``.

    Computed from logarithmic derivatives divided by the sum of term moduli;
    algebraically this is ``m`` times the Riccati residual over a common scale.
    """
    z = complex(z)
    if isinstance(q, Poly):
        scale_q = complex(q(z))
        t1 = 4 * z * complex(q.deriv().deriv()(z))
        t2 = -(4 * z * z + 2 * coupling * z - 2) * complex(q.deriv()(z))
        t3 = (4 * m * z - coupling / 2 + lam) * scale_q
    else:
        r = np.asarray(q, dtype=complex)
        inv = 1.0 / (z - r)
        s1 = complex(np.sum(inv))
        s2 = complex(np.sum(inv * inv))
        t1 = 4 * z * (s1 * s1 - s2)
        t2 = -(4 * z * z + 2 * coupling * z - 2) * s1
        t3 = 4 * m * z - coupling / 2 + lam
    return (t1 + t2 + t3) / max(abs(t1) + abs(t2) + abs(t3), 1e-300)


def rescaled_root_measure(sol: SpectralSolution, k: int) -> RootMeasure:
    """Uniform measure on the roots of the ``k``-th eigenpolynomial divided by ``sqrt(m)``."""
    poly = sol.poly(k)
    if poly.degree < 1:
        warnings.warn("constant eigenpolynomial: empty root measure", RuntimeWarning)
        return RootMeasure(np.zeros(0, complex), np.zeros(0))
    r = sol.roots(k) / math.sqrt(sol.m)
    return RootMeasure(r, np.full(len(r), 1.0 / len(r)))


def cauchy_of_roots(P, z) -> complex:
    """``P'(z) / (n P(z))`` for a polynomial of degree ``n`` (or an array of roots)."""
    z = complex(z)
    if isinstance(P, Poly):
        if P.degree < 1:
            raise DomainError("degree must be at least 1")
        pv = complex(P(z))
        if pv == 0:
            raise DomainError("z is a root of P")
        return complex(P.deriv()(z)) / (P.degree * pv)
    r = np.asarray(P, dtype=complex)
    if np.any(r == z):
        raise DomainError("z is a root of P")
    return complex(np.mean(1.0 / (z - r)))


def select_index(selector, m: int) -> int:
    """Eigen index (ascending order) from a selector.

    ``"max"`` (largest), ``"min"`` (smallest), an integer ``k`` in ``[0, m]``,
    or ``"fraction:theta"`` for ``round(theta * m)``.
    """
    if selector in (None, "max"):
        return m
    if selector == "min":
        return 0
    if isinstance(selector, str) and selector.startswith("fraction:"):
        theta = float(selector.split(":", 1)[1])
        if not 0.0 <= theta <= 1.0:
            raise DomainError("fraction must lie in [0, 1]")
        return int(round(theta * m))
    try:
        k = int(selector)
    except (TypeError, ValueError):
        raise DomainError(f"unknown selector {selector!r}") from None
    if not 0 <= k <= m:
        raise DomainError(f"selector {k} out of range for m={m}")
    return k


@dataclass
class DeltaTable:
    """Scaled eigenvalues ``lambda_m / m^(3/2)`` and ``lambda_m / m^(4/3)``."""

    ms: list
    indices: list
    eigenvalues: list
    scaled_32: list
    scaled_43: list
    stabilizing: str

    @property
    def diffs_32(self) -> list:
        return list(np.diff(self.scaled_32))

    @property
    def diffs_43(self) -> list:
        return list(np.diff(self.scaled_43))

    @property
    def delta_hat(self) -> float:
        """Latest ``lambda_m / m^(3/2)``, the estimate of ``delta``."""
        return self.scaled_32[-1]

    def rows(self) -> list:
        return [
            (m, k, lam, s32, s43)
            for m, k, lam, s32, s43 in zip(self.ms, self.indices, self.eigenvalues, self.scaled_32, self.scaled_43)
        ]


def _settles(seq) -> float:
    # Ratio of the last successive difference to the first, in relative terms.
    d = np.abs(np.diff(seq))
    if len(d) < 2 or d[0] == 0:
        return math.inf
    return float(d[-1] / d[0])


def delta_estimates(ms, gamma: float = 0.0, selector="max") -> DeltaTable:
    """Scaled eigenvalue tables over increasing ``ms`` for one eigen branch.

    The ``stabilizing`` field names the exponent whose successive
    differences shrink (``"3/2"`` or ``"4/3"``), or ``"neither"``.
    """
    ms = [int(m) for m in ms]
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise DomainError("ms must be increasing")
    idx, lams, s32, s43 = [], [], [], []
    for m in ms:
        sol = spectrum(SpectralProblem(m, gamma))
        k = select_index(selector, m)
        lam = float(sol.eigenvalues[k].real)
        idx.append(k)
        lams.append(lam)
        s32.append(lam / m**1.5)
        s43.append(lam / m ** (4.0 / 3.0))
    r32, r43 = _settles(s32), _settles(s43)
    if r32 < 1 and (r32 <= r43 or r43 >= 1):
        stab = "3/2"
    elif r43 < 1:
        stab = "4/3"
    else:
        stab = "neither"
    # A diverging power law has differences that do not shrink; a converging
    # one has geometrically decreasing differences.
    grow43 = abs(s43[-1] - s43[0]) / max(abs(s43[0]), 1e-300)
    grow32 = abs(s32[-1] - s32[0]) / max(abs(s32[0]), 1e-300)
    if stab == "neither" and grow32 < grow43:
        stab = "3/2"
    return DeltaTable(ms, idx, lams, s32, s43, stab)
