"""Transition operators on truncated Fourier coefficients.

A function ``f = sum_n c_n h_n`` in ``L2(mu)`` is stored by its coefficients in
the orthonormal family ``h_n = p_n / sqrt(hhat_n)``.  Everything diagonal in
that basis (``U^t``, the generator, the resolvent) is a coefficient-wise map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import RecurrenceLengthError, UnboundedSupportError
from .harness import is_harness
from .process_spec import CorrelationIndices, ProcessSpec

DEFAULT_TRUNCATION = 60


@dataclass(frozen=True)
class L2Function:
    """``f = sum_n coeffs[n] h_n``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def norm(self) -> float:
        return math.sqrt(math.fsum(c * c for c in self.coeffs))

    def __sub__(self, other: "L2Function") -> "L2Function":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0.0,) * (n - len(self.coeffs))
        b = other.coeffs + (0.0,) * (n - len(other.coeffs))
        return L2Function(tuple(x - y for x, y in zip(a, b)))

    @classmethod
    def basis(cls, n: int, N: int | None = None) -> "L2Function":
        N = n if N is None else N
        return cls(tuple(1.0 if k == n else 0.0 for k in range(N + 1)))


def _alphas(spec: ProcessSpec, N: int) -> np.ndarray:
    if N > spec.indices.N:
        raise RecurrenceLengthError(f"need {N} indices, spec stores {spec.indices.N}")
    if spec.indices.is_discrete:
        raise ValueError("generator and resolvent need continuous time")
    return np.asarray([float(a) for a in spec.indices.values[: N + 1]])


def apply_Ut(f: L2Function, spec: ProcessSpec, t) -> L2Function:
    """``c_n -> exp(-alpha_n t) c_n`` (``rho_n^t`` in discrete time)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    lam = spec.indices.decay(t, f.N)
    return L2Function(tuple(float(l) * c for l, c in zip(lam, f.coeffs)))


def apply_generator(f: L2Function, spec: ProcessSpec) -> L2Function:
    """``c_n -> -alpha_n c_n``."""
    a = _alphas(spec, f.N)
    return L2Function(tuple(-a * np.asarray(f.coeffs)))


def resolvent(f: L2Function, spec: ProcessSpec, lam: float) -> L2Function:
    """``R^lambda f``: ``c_n -> c_n / (lambda + alpha_n)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a = _alphas(spec, f.N)
    return L2Function(tuple(np.asarray(f.coeffs) / (lam + a)))


@dataclass(frozen=True)
class HilbertSchmidtSum:
    partial: float
    N: int
    closed_form: float | None = None


def hilbert_schmidt_sum(spec, t: float, N: int | None = None) -> HilbertSchmidtSum:
    """``sum_{n<=N} exp(-2 alpha_n t)``; for ``alpha_n = n alpha`` also ``1/(1 - exp(-2 alpha t))``.

    ``spec`` may be a :class:`ProcessSpec`, :class:`CorrelationIndices` or a
    plain sequence of indices.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if isinstance(spec, ProcessSpec):
        vals = spec.indices.values
    elif isinstance(spec, CorrelationIndices):
        vals = spec.values
    else:
        vals = tuple(spec)
    N = len(vals) - 1 if N is None else N
    if N > len(vals) - 1:
        raise RecurrenceLengthError(f"need {N} indices, have {len(vals) - 1}")
    a = np.asarray([float(v) for v in vals[: N + 1]])
    partial = math.fsum(np.exp(-2 * a * t))
    closed = None
    if len(vals) > 1 and float(vals[1]) > 0 and is_harness(vals):
        closed = 1.0 / (1.0 - math.exp(-2 * float(vals[1]) * t))
    return HilbertSchmidtSum(partial, N, closed)


@dataclass(frozen=True)
class FellerResult:
    """Heuristic summability verdict for ``sum_n exp(-alpha_n t) sup|h_n|``."""

    summable: bool
    degrees: tuple
    partial_sums: tuple
    sups: tuple = field(repr=False, default=())


def feller_summability(spec: ProcessSpec, t: float, grid_size: int = 2001,
                       start: int = 8, doublings: int = 3) -> FellerResult:
    """Ratio-stabilization test on partial sums at ``start * 2^k`` terms.

    Numerical heuristic: the sum is declared convergent if the increments
    between successive doublings shrink geometrically (or vanish).  A family
    shorter than the first checkpoint is a finite sum and always passes.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    sup = spec.support
    if not sup.bounded:
        raise UnboundedSupportError(f"{spec.name}: summability check needs a bounded support")
    if sup.kind == "points":
        grid = np.asarray([float(p) for p in sup.points])
    else:
        grid = np.linspace(sup.lower, sup.upper, grid_size)
    top = spec.max_degree
    H = spec.recurrence.evaluate(grid, top, orthonormal=True)
    sups = np.max(np.abs(H), axis=0)
    lam = np.asarray([float(v) for v in spec.indices.decay(t, top)])
    terms = np.abs(lam) * sups
    cum = np.cumsum(terms)
    checkpoints = [start * 2 ** k for k in range(doublings + 1)]
    if top < checkpoints[-1]:
        if top < start:
            return FellerResult(True, (top,), (float(cum[-1]),), tuple(sups))
        checkpoints = [c for c in checkpoints if c <= top]
    sums = [float(cum[c]) for c in checkpoints]
    inc = np.diff(sums)
    tiny = 1e-12 * max(1.0, sums[-1])
    if len(inc) == 0 or inc[-1] <= tiny:
        ok = True
    else:
        ratios = inc[1:] / np.maximum(inc[:-1], 1e-300)
        ok = bool(len(ratios) > 0 and np.all(ratios < 1.0))
    return FellerResult(ok, tuple(checkpoints), tuple(sums), tuple(sups))


@dataclass(frozen=True)
class KernelExpansion:
    """Truncated Lancaster series ``sum_{n<=N} exp(-alpha_n t) h_n(x) h_n(y)``."""

    spec: ProcessSpec
    t: float
    N: int = DEFAULT_TRUNCATION
    lam: np.ndarray = field(init=False, repr=False)
    a: np.ndarray = field(init=False, repr=False)
    sb: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")
        N = min(self.N, self.spec.max_degree)
        object.__setattr__(self, "N", N)
        top = min(N + 1, self.spec.max_degree)
        lam = np.asarray([float(v) for v in self.spec.indices.decay(self.t, top)])
        rec = self.spec.recurrence
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "a", np.asarray([float(v) for v in rec.a[: top + 1]]))
        object.__setattr__(self, "sb", np.sqrt(np.asarray([float(v) for v in rec.b[: top + 1]])))

    def hn(self, x, n: int) -> np.ndarray:
        return self.spec.recurrence.evaluate(x, n, orthonormal=True)


def _clenshaw(k: KernelExpansion, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """``sum_n c[..., n] h_n(x)`` by backward recurrence.

    ``h_{n+1} = A_n h_n + B_n h_{n-1}`` with ``A_n = (x - a_n)/sqrt(b_{n+1})``
    and ``B_n = -sqrt(b_n / b_{n+1})``; the sum is ``y_0`` of
    ``y_n = c_n + A_n y_{n+1} + B_{n+1} y_{n+2}``.
    """
    N = c.shape[-1] - 1
    a, sb = k.a, k.sb
    y1 = c[..., N].copy()
    y2 = np.zeros_like(y1)
    for n in range(N - 1, -1, -1):
        y = c[..., n] + (x - a[n]) / sb[n] * y1
        if n + 1 < N:
            y = y - sb[n] / sb[n + 1] * y2
        y1, y2 = y, y1
    return y1


def kernel_density(k: KernelExpansion, x, y):
    """``(value, tail estimate)`` of the truncated transition density ratio.

    Arguments are put in canonical order before evaluation, so the result is
    exactly symmetric in ``x`` and ``y``.  The tail estimate is the size of
    the first omitted term (extrapolated geometrically when the family ends
    at ``N``).  It is a heuristic, not a bound.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    N = k.N
    ext = min(N + 1, k.spec.max_degree)
    hy = k.spec.recurrence.evaluate(hi, ext, orthonormal=True)
    c = hy[..., : N + 1] * k.lam[: N + 1]
    val = _clenshaw(k, lo, c)
    if ext > N:
        hx = k.spec.recurrence.evaluate(lo, ext, orthonormal=True)
        err = np.abs(k.lam[ext] * hx[..., ext] * hy[..., ext])
    elif N >= 1 and k.lam[N - 1] != 0:
        ratio = abs(k.lam[N] / k.lam[N - 1])
        hx = k.spec.recurrence.evaluate(lo, N, orthonormal=True)
        err = np.abs(ratio * k.lam[N] * hx[..., N] * hy[..., N])
    else:
        err = np.zeros_like(val)
    if val.ndim == 0:
        return float(val), float(err)
    return val, err
