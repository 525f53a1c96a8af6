"""Structural matrices ``A_n(t)``, generators ``W_n`` and martingale polynomials.

``A_n(t)`` maps the monomial vector ``(1, x, .., x^n)`` at time ``s`` to the
conditional moments at ``s + t``.  With ``C`` the monic coefficient matrix of
``p_0 .. p_n`` (row ``k`` = ``p_k``) and ``Lambda(t) = diag(exp(-alpha_k t))``::

    A_n(t) = C^{-1} Lambda(t) C,      W_n = C^{-1} diag(-alpha_k) C

so ``V = C^{-1}`` and ``V^{-1} = C``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._numeric import all_exact, eye, lower_inverse, zeros
from .errors import NonDiagonalizableOrDegenerate
from .polycore import PolynomialCoefficients, family_from_recurrence
from .process_spec import CONTINUOUS, DISCRETE, CorrelationIndices, ProcessSpec

#: Relative gap below which two diagonal entries count as repeated.
EIGEN_RTOL = 1e-9


@dataclass(frozen=True)
class StructuralMatrix:
    """Lower-triangular ``(n+1) x (n+1)`` matrix of ``gamma_{i,j}(t)``."""

    n: int
    t: object
    entries: np.ndarray

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    def apply(self, coeffs: Sequence) -> np.ndarray:
        """Conditional expectation of ``sum_j c_j X_t^j`` as coefficients in ``X_s``."""
        c = np.asarray(coeffs, dtype=self.entries.dtype)
        return c @ self.entries[: len(c), : len(c)]


@dataclass(frozen=True)
class GeneratorMatrix:
    """``W_n`` with ``A_n(t) = exp(t W_n)``; diagonal is ``(0, -alpha_1, .., -alpha_n)``."""

    n: int
    entries: np.ndarray
    #: same matrix in the opposite (growing) sign convention, when built from cumulants
    raw: np.ndarray | None = None

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object


@dataclass(frozen=True)
class Eigenstructure:
    V: np.ndarray
    Vinv: np.ndarray
    eigenvalues: tuple

    def reconstruct(self, diag: Sequence) -> np.ndarray:
        d = np.asarray(diag, dtype=self.V.dtype)
        return (self.V * d) @ self.Vinv


def coefficient_matrix(spec: ProcessSpec, n: int) -> PolynomialCoefficients:
    spec.check_degree(n)
    return family_from_recurrence(spec.recurrence, n)


def _conjugate(C: np.ndarray, diag: Sequence) -> np.ndarray:
    # caller has already put C and diag on the same (exact or float) path
    Cinv = lower_inverse(C)
    d = np.asarray(list(diag), dtype=C.dtype)
    return (Cinv * d) @ C


def build_structural(spec: ProcessSpec, n: int, t=0.0, *, factors: Sequence | None = None) -> StructuralMatrix:
    """``A_n(t) = C^{-1} Lambda_n(t) C``.

    ``factors`` overrides ``Lambda_n(t)``'s diagonal; passing rationals such
    as ``(1, rho, rho^2, ..)`` gives the exact path for harness specs
    (``rho = exp(-alpha t)``), since the exponential itself is irrational.
    """
    C = coefficient_matrix(spec, n).rows
    if factors is None:
        factors = spec.indices.decay(t, n)
    else:
        factors = tuple(factors)[: n + 1]
        if len(factors) != n + 1:
            raise ValueError(f"need {n + 1} decay factors, got {len(factors)}")
    exact = C.dtype == object and all_exact(factors)
    if not exact:
        C = C.astype(float)
        factors = tuple(float(f) for f in factors)
    return StructuralMatrix(n, t, _conjugate(C, factors))


def build_generator(spec: ProcessSpec, n: int) -> GeneratorMatrix:
    if spec.time_kind != CONTINUOUS:
        raise ValueError("generator matrices exist only in continuous time")
    C = coefficient_matrix(spec, n).rows
    alphas = spec.indices.values[: n + 1]
    exact = C.dtype == object and all_exact(alphas)
    if not exact:
        C = C.astype(float)
        diag = tuple(-float(a) for a in alphas)
    else:
        diag = tuple(-a for a in alphas)
    return GeneratorMatrix(n, _conjugate(C, diag))


def semigroup_check(spec: ProcessSpec, n: int, s, t, u,
                    builder: Callable[[ProcessSpec, int, object], StructuralMatrix] | None = None) -> float:
    """Max-entry residual of ``A_n(t-s) A_n(u-t) - A_n(u-s)``."""
    build = builder or build_structural
    lhs = build(spec, n, t - s).entries @ build(spec, n, u - t).entries
    diff = lhs - build(spec, n, u - s).entries
    return float(max(abs(v) for v in diff.ravel()))


def triangular_eigendecompose(M) -> Eigenstructure:
    """Eigenvectors of a lower-triangular matrix by back-substitution.

    Eigenvalues are the diagonal; column ``k`` of ``V`` solves
    ``(M - lambda_k I) v = 0`` with ``v_k = 1`` and ``v_j = 0`` for ``j < k``.
    Repeated diagonal entries (relative gap <= 1e-9 on floats, equality on
    rationals) raise :class:`NonDiagonalizableOrDegenerate`.
    """
    A = M.entries if hasattr(M, "entries") else np.asarray(M)
    size = A.shape[0]
    exact = A.dtype == object
    lam = [A[k, k] for k in range(size)]
    for i in range(size):
        for j in range(i):
            gap = abs(lam[i] - lam[j])
            if exact:
                repeated = gap == 0
            else:
                repeated = gap <= EIGEN_RTOL * max(1.0, abs(lam[i]), abs(lam[j]))
            if repeated:
                raise NonDiagonalizableOrDegenerate(
                    f"diagonal entries {j} and {i} coincide ({lam[j]!r}, {lam[i]!r})"
                )
    V = zeros((size, size), exact)
    for k in range(size):
        V[k, k] = Fraction(1) if exact else 1.0
        for j in range(k + 1, size):
            acc = 0
            for i in range(k, j):
                acc += A[j, i] * V[i, k]
            V[j, k] = acc / (lam[k] - lam[j])
    return Eigenstructure(V, lower_inverse(V), tuple(lam))


def martingale_polynomials(spec: ProcessSpec, n: int) -> tuple[PolynomialCoefficients, CorrelationIndices]:
    """Recover monic ``p_0 .. p_n`` and their indices from the eigenstructure.

    Continuous time decomposes ``W_n``; discrete time decomposes ``A_n(1)``.
    ``p_k`` is row ``k`` of ``V^{-1}`` (a left eigenvector), so
    ``p_k^T A_n(tau) = exp(-alpha_k tau) p_k^T`` holds as a coefficient
    identity.
    """
    if spec.time_kind == CONTINUOUS:
        eig = triangular_eigendecompose(build_generator(spec, n))
        idx = CorrelationIndices(tuple(-v for v in eig.eigenvalues), CONTINUOUS)
    else:
        eig = triangular_eigendecompose(build_structural(spec, n, 1))
        idx = CorrelationIndices(eig.eigenvalues, DISCRETE)
    rows = eig.Vinv
    if rows.dtype != object:
        rows = rows.copy()
        np.fill_diagonal(rows, 1.0)  # unit by construction; strip round-off
    return PolynomialCoefficients(rows), idx


def martingale_residual(A: StructuralMatrix, p: PolynomialCoefficients, factors: Sequence) -> float:
    """``max_k | p_k^T A - lambda_k p_k^T |`` over the rows of ``p``."""
    worst = 0
    for k in range(A.n + 1):
        row = p.rows[k, : A.n + 1]
        diff = row @ A.entries - factors[k] * row
        worst = max(worst, max(abs(v) for v in diff))
    return float(worst)


def discrete_power(spec: ProcessSpec, n: int, k: int) -> StructuralMatrix:
    """``A_n(k) = A_n(1)^k``; negative ``k`` uses the inverse."""
    if spec.time_kind != DISCRETE:
        raise ValueError("discrete_power needs a discrete-time spec")
    if int(k) != k:
        raise ValueError("discrete time admits integer powers only")
    k = int(k)
    A1 = build_structural(spec, n, 1).entries
    exact = A1.dtype == object
    if any(A1[i, i] == 0 for i in range(n + 1)):
        raise ValueError("A_n(1) is singular; corrupt spec")
    base = lower_inverse(A1) if k < 0 else A1
    out = eye(n + 1, exact)
    for _ in range(abs(k)):
        out = out @ base
    return StructuralMatrix(n, k, out)


def expm_lower(W: GeneratorMatrix, t: float) -> np.ndarray:
    """``exp(t W)`` through the triangular eigenstructure."""
    eig = triangular_eigendecompose(W)
    lam = np.asarray([float(v) for v in eig.eigenvalues])
    return eig.reconstruct(np.exp(lam * t)).astype(float)
