"""Monic orthogonal polynomial families.

Recurrence convention (monic)::

    p_{n+1}(x) = (x - a_n) p_n(x) - b_n p_{n-1}(x),   p_{-1} = 0, p_0 = 1

A :class:`ThreeTermRecurrence` of length ``L`` stores ``a_0 .. a_{L-1}`` and
``b_1 .. b_L``; that is enough to build ``p_0 .. p_L`` together with their
norms ``hhat_n = E p_n(X)^2 = b_1 * ... * b_n``.

Values that are all ``int``/``Fraction`` keep the exact rational path; any
float switches to double precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from ._numeric import all_exact, number_to_json, parse_number, zeros
from .errors import NonPositiveDefiniteMoments, RecurrenceLengthError

#: Relative pivot threshold below which the float Hankel path declares a
#: moment functional singular.
HANKEL_RTOL = 1e-12


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``m_0 .. m_N`` of a probability law (``m_0 = 1``)."""

    values: tuple

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("empty moment sequence")
        if vals[0] != 1:
            raise ValueError(f"m_0 must be 1, got {vals[0]!r}")

    @property
    def N(self) -> int:
        return len(self.values) - 1

    @property
    def exact(self) -> bool:
        return all_exact(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)

    def hankel(self, k: int) -> np.ndarray:
        """Leading ``(k+1) x (k+1)`` Hankel matrix ``[m_{i+j}]``."""
        if 2 * k > self.N:
            raise RecurrenceLengthError(f"need m_{2 * k}, have up to m_{self.N}")
        rows = [[self.values[i + j] for j in range(k + 1)] for i in range(k + 1)]
        return np.array(rows, dtype=object if self.exact else float)

    def is_positive_definite(self) -> bool:
        try:
            moments_to_recurrence(self)
        except NonPositiveDefiniteMoments:
            return False
        return True

    def inner(self, f: Sequence, g: Sequence):
        """``<f, g>`` for coefficient vectors in the monomial basis."""
        total = 0
        for i, fi in enumerate(f):
            if fi == 0:
                continue
            for j, gj in enumerate(g):
                if gj == 0:
                    continue
                if i + j > self.N:
                    raise RecurrenceLengthError(f"need m_{i + j}, have up to m_{self.N}")
                total += fi * gj * self.values[i + j]
        return total


@dataclass(frozen=True)
class ThreeTermRecurrence:
    """Monic three-term recurrence.

    ``a[k]`` is ``a_k`` and ``b[k]`` is ``b_{k+1}`` (so ``b`` holds
    ``b_1 .. b_L``); both have length ``L``.
    """

    a: tuple
    b: tuple
    kind: str = "custom"
    params: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a, b = tuple(self.a), tuple(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if len(a) != len(b):
            raise ValueError(f"len(a)={len(a)} != len(b)={len(b)}")
        bad = [k + 1 for k, bk in enumerate(b) if not bk > 0]
        if bad:
            raise ValueError(f"b_n must be > 0, violated at n={bad}")

    __hash__ = None  # params is a dict

    @property
    def length(self) -> int:
        return len(self.a)

    @property
    def exact(self) -> bool:
        return all_exact(self.a) and all_exact(self.b)

    def truncated(self, L: int) -> "ThreeTermRecurrence":
        if L > self.length:
            raise RecurrenceLengthError(f"length {L} > stored {self.length}")
        return ThreeTermRecurrence(self.a[:L], self.b[:L], self.kind, dict(self.params))

    def as_float(self) -> "ThreeTermRecurrence":
        return ThreeTermRecurrence(
            tuple(float(v) for v in self.a), tuple(float(v) for v in self.b),
            self.kind, dict(self.params),
        )

    def norms(self, N: int | None = None) -> tuple:
        """``hhat_0 .. hhat_N`` with ``hhat_n = b_1 * ... * b_n``."""
        N = self.length if N is None else N
        if N > self.length:
            raise RecurrenceLengthError(f"degree {N} > stored {self.length}")
        out = [Fraction(1) if self.exact else 1.0]
        for k in range(N):
            out.append(out[-1] * self.b[k])
        return tuple(out)

    def evaluate(self, x, N: int, orthonormal: bool = False) -> np.ndarray:
        """Values ``p_0(x) .. p_N(x)`` (float), shape ``x.shape + (N+1,)``.

        The orthonormal variant ``h_n = p_n / sqrt(hhat_n)`` is run through its
        own recurrence so that high degrees do not overflow.
        """
        if N > self.length:
            raise RecurrenceLengthError(f"degree {N} > stored {self.length}")
        x = np.asarray(x, dtype=float)
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        out = np.empty(x.shape + (N + 1,))
        out[..., 0] = 1.0
        if N == 0:
            return out
        if orthonormal:
            sb = np.sqrt(b)
            out[..., 1] = (x - a[0]) / sb[0]
            for n in range(1, N):
                out[..., n + 1] = ((x - a[n]) * out[..., n] - sb[n - 1] * out[..., n - 1]) / sb[n]
        else:
            out[..., 1] = x - a[0]
            for n in range(1, N):
                out[..., n + 1] = (x - a[n]) * out[..., n] - b[n - 1] * out[..., n - 1]
        return out

    def jacobi_matrix(self, size: int | None = None) -> np.ndarray:
        """Symmetric tridiagonal Jacobi matrix (float)."""
        size = self.length if size is None else size
        if size > self.length:
            raise RecurrenceLengthError(f"size {size} > stored {self.length}")
        a = np.asarray(self.a[:size], dtype=float)
        off = np.sqrt(np.asarray(self.b[: size - 1], dtype=float))
        return np.diag(a) + np.diag(off, 1) + np.diag(off, -1)

    def to_dict(self, moments: int | None = None) -> dict:
        d = {
            "kind": self.kind,
            "params": {k: number_to_json(v) if not isinstance(v, str) else v
                       for k, v in self.params.items()},
            "a": [number_to_json(v) for v in self.a],
            "b": [number_to_json(v) for v in self.b],
        }
        if moments is not None:
            d["moments"] = [number_to_json(v) for v in recurrence_to_moments(self, moments).values]
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ThreeTermRecurrence":
        a = [parse_number(v) for v in d["a"]]
        b = [parse_number(v) for v in d["b"]]
        exact = all_exact(a) and all_exact(b)
        a = [parse_number(v, exact) for v in a]
        b = [parse_number(v, exact) for v in b]
        return cls(tuple(a), tuple(b), d.get("kind", "custom"), dict(d.get("params", {})))


@dataclass(frozen=True)
class PolynomialCoefficients:
    """Lower-triangular matrix; row ``n`` holds monic ``p_n`` in ``(1, x, .., x^n)``."""

    rows: np.ndarray

    def __post_init__(self):
        r = self.rows
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValueError("coefficient matrix must be square")
        for i in range(r.shape[0]):
            if r[i, i] != 1:
                raise ValueError(f"p_{i} is not monic")
            if any(r[i, j] != 0 for j in range(i + 1, r.shape[1])):
                raise ValueError("coefficient matrix must be lower-triangular")

    @property
    def N(self) -> int:
        return self.rows.shape[0] - 1

    @property
    def exact(self) -> bool:
        return self.rows.dtype == object

    def __getitem__(self, n) -> np.ndarray:
        return self.rows[n, : n + 1]

    def __call__(self, n: int, x):
        """Evaluate ``p_n`` at ``x`` by Horner's rule."""
        acc = 0
        for c in reversed(list(self.rows[n, : n + 1])):
            acc = acc * x + c
        return acc


def family_from_recurrence(rec: ThreeTermRecurrence, N: int) -> PolynomialCoefficients:
    """Expand ``p_0 .. p_N`` into monomial coefficients."""
    if N > rec.length:
        raise RecurrenceLengthError(f"degree {N} > stored recurrence length {rec.length}")
    exact = rec.exact
    rows = zeros((N + 1, N + 1), exact)
    rows[0, 0] = 1
    if N >= 1:
        rows[1, 0] = -rec.a[0]
        rows[1, 1] = 1
    for n in range(1, N):
        # p_{n+1} = x p_n - a_n p_n - b_n p_{n-1}
        rows[n + 1, 1 : n + 2] += rows[n, : n + 1]
        rows[n + 1, : n + 1] -= rec.a[n] * rows[n, : n + 1]
        rows[n + 1, :n] -= rec.b[n - 1] * rows[n - 1, :n]
    if exact:
        rows = np.vectorize(Fraction, otypes=[object])(rows)
    return PolynomialCoefficients(rows)


def moments_to_recurrence(m: MomentSequence, allow_truncation: bool = False) -> ThreeTermRecurrence:
    """Gram-Schmidt on ``1, x, x^2, ..`` under the moment functional.

    Recovers ``a_0 .. a_{K-1}`` and ``b_1 .. b_K`` with ``K = N // 2``.  A
    vanishing (or, on floats, relatively tiny) ``hhat_k`` raises
    :class:`NonPositiveDefiniteMoments`; with ``allow_truncation`` the family
    is cut at the last healthy degree instead (finite-support laws), provided
    at least ``p_1`` survives.
    """
    exact = m.exact
    K = m.N // 2
    one = Fraction(1) if exact else 1.0
    polys: list[list] = [[one]]
    norms = [one]
    a: list = []
    b: list = []
    for k in range(1, K + 1):
        mono = [0] * k + [one]
        p = list(mono)
        for j, pj in enumerate(polys):
            c = m.inner(mono, pj) / norms[j]
            for i, v in enumerate(pj):
                p[i] -= c * v
        hk = m.inner(p, p)
        scale = m.values[2 * k]
        singular = hk <= 0 if exact else not hk > HANKEL_RTOL * max(abs(scale), 1e-300)
        if singular:
            if allow_truncation and k > 1:
                break
            raise NonPositiveDefiniteMoments(
                f"Hankel determinant of order {k} is not positive (hhat_{k} = {hk!r})"
            )
        prev = polys[-1]
        xprev = [0] + list(prev)
        a.append(m.inner(xprev, prev) / norms[-1])
        b.append(hk / norms[-1])
        polys.append(p)
        norms.append(hk)
    return ThreeTermRecurrence(tuple(a), tuple(b), kind="moments")


def recurrence_to_moments(rec: ThreeTermRecurrence, N: int) -> MomentSequence:
    """``m_k = <x^k, 1>`` for the functional whose monic OPs follow ``rec``.

    Carries ``x^k`` in the ``p``-basis through ``x p_n = p_{n+1} + a_n p_n +
    b_n p_{n-1}`` and reads off the ``p_0`` component.
    """
    L = rec.length
    if N > 2 * L:
        raise RecurrenceLengthError(f"N={N} > 2 * length = {2 * L}")
    exact = rec.exact
    one = Fraction(1) if exact else 1.0
    zero = 0 * one
    vec = [one] + [zero] * L
    out = [one]
    for k in range(1, N + 1):
        # components above height N - k can no longer return to p_0
        top = min(k, N - k + 1, L)
        new = [zero] * (L + 1)
        for n in range(0, min(k - 1, L) + 1):
            c = vec[n]
            if c == 0:
                continue
            if n + 1 <= top:
                new[n + 1] += c
            if n < L:
                new[n] += rec.a[n] * c
            if n >= 1:
                new[n - 1] += rec.b[n - 1] * c
        vec = new
        out.append(vec[0])
    return MomentSequence(tuple(out))


def q_number(n: int, q):
    """``[n]_q = 1 + q + .. + q^{n-1}`` (``[0]_q = 0``)."""
    total = 0 * q
    term = 1 + 0 * q
    for _ in range(n):
        total += term
        term *= q
    return total


def q_factorial(n: int, q):
    out = 1 + 0 * q
    for i in range(1, n + 1):
        out *= q_number(i, q)
    return out


def q_hermite_recurrence(q, N: int) -> ThreeTermRecurrence:
    """Continuous q-Hermite polynomials: ``a_n = 0``, ``b_n = [n]_q``."""
    if not -1 <= q <= 1:
        raise ValueError(f"q must lie in [-1, 1], got {q!r}")
    if q == -1 and N >= 2:
        raise ValueError("q = -1 has two-point support; N must be <= 1")
    zero = 0 * q
    b = tuple(q_number(n, q) for n in range(1, N + 1))
    return ThreeTermRecurrence((zero,) * N, b, kind="q_hermite", params={"q": q})


def hermite_recurrence(N: int) -> ThreeTermRecurrence:
    """Probabilists' Hermite: ``a_n = 0``, ``b_n = n`` (exact)."""
    return ThreeTermRecurrence((Fraction(0),) * N, tuple(Fraction(n) for n in range(1, N + 1)),
                               kind="hermite")


def shifted_laguerre_recurrence(N: int) -> ThreeTermRecurrence:
    """Monic Laguerre family of the exponential law moved to mean zero.

    Standard Laguerre has ``a_n = 2n + 1``; shifting the variable by ``-1``
    gives ``a_n = 2n`` with ``b_n = n^2`` unchanged.
    """
    return ThreeTermRecurrence(
        tuple(Fraction(2 * n) for n in range(N)),
        tuple(Fraction(n * n) for n in range(1, N + 1)),
        kind="shifted_laguerre",
    )


def gauss_quadrature(rec: ThreeTermRecurrence, size: int | None = None):
    """Golub-Welsch nodes and weights from the Jacobi matrix (float).

    Exact for polynomials of degree ``<= 2 * size - 1``.
    """
    from scipy.linalg import eigh_tridiagonal

    size = rec.length if size is None else size
    if size > rec.length:
        raise RecurrenceLengthError(f"size {size} > stored {rec.length}")
    d = np.asarray(rec.a[:size], dtype=float)
    e = np.sqrt(np.asarray(rec.b[: size - 1], dtype=float))
    nodes, vecs = eigh_tridiagonal(d, e)
    weights = vecs[0, :] ** 2
    return nodes, weights / weights.sum()
