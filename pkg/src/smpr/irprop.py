"""Independent-regression processes: generators from cumulant coefficients,
stationary moments, and formal moment-generating-function series.

A :class:`CumulantSpec` holds ``d_0 > 0, d_1, d_2, ..``.  The generator in the
growing sign convention has entries ``binom(i, j) d_{i-j}`` below the diagonal
and ``i d_0`` on it; the decaying generator used elsewhere in the package is
its negative.  Stationary moments solve ``W m = 0`` and have cumulants
``delta_j = -d_j / (j d_0)``.

All series are truncated formal power series in ``y``; coefficients are
Fractions when the inputs are rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import all_exact, binom, parse_number, zeros
from .errors import InvalidSpec
from .polycore import MomentSequence
from .process_spec import CONTINUOUS, DISCRETE
from .structural import GeneratorMatrix, StructuralMatrix

DEFAULT_ORDER = 12
#: witness pairs for the "depends on tau - sigma only" detectors
LEVY_PAIRS = ((2.0, 1.0), (3.0, 2.0), (1.5, 0.5))
LEVY_TOL = 1e-12


@dataclass(frozen=True)
class CumulantSpec:
    """Coefficients ``d_0 .. d_K``.  Entries beyond ``K`` are zero.

    Only ``d_0 > 0`` is enforced on construction; :meth:`violations` lists
    the remaining admissibility checks and :meth:`validate` raises on them.
    """

    d: tuple
    time_kind: str = CONTINUOUS

    def __post_init__(self):
        d = tuple(parse_number(v) if isinstance(v, str) else v for v in self.d)
        if not d:
            raise InvalidSpec(["d must contain at least d_0"])
        if all_exact(d):
            d = tuple(Fraction(v) for v in d)
        object.__setattr__(self, "d", d)
        if not d[0] > 0:
            raise InvalidSpec([f"d_0 must be positive, got {d[0]!r}"])
        if self.time_kind not in (CONTINUOUS, DISCRETE):
            raise InvalidSpec([f"unknown time_kind {self.time_kind!r}"])

    @property
    def K(self) -> int:
        return len(self.d) - 1

    @property
    def exact(self) -> bool:
        return all_exact(self.d)

    @property
    def time_scale(self):
        """``d_0``: the decay rate of the mean (``alpha_1``)."""
        return self.d[0]

    def dj(self, j: int):
        return self.d[j] if j <= self.K else 0 * self.d[0]

    def normalized(self) -> "CumulantSpec":
        """Same stationary law with ``d_0 = 1`` (time rescaled by ``d_0``)."""
        return CumulantSpec(tuple(v / self.d[0] for v in self.d), self.time_kind)

    def delta(self, j: int):
        """``delta_j = -d_j / (j d_0)``: the ``j``-th cumulant of the stationary law."""
        if j < 1:
            raise ValueError("delta_j is defined for j >= 1")
        return -self.dj(j) / (j * self.d[0])

    def deltas(self, N: int | None = None) -> tuple:
        N = self.K if N is None else N
        return tuple(self.delta(j) for j in range(1, N + 1))

    def violations(self) -> list[str]:
        out = []
        K = self.K
        if K < 2:
            return out
        d2 = self.delta(2)
        if d2 < 0:
            out.append(f"delta_2 must be >= 0, got {d2}")
            return out
        high = [j for j in range(3, K + 1) if self.delta(j) != 0]
        if d2 == 0:
            if high:
                out.append(f"delta_2 = 0 forces delta_j = 0 for j > 2, violated at {high}")
            return out
        if K >= 4 and self.delta(4) == 0 and high:
            out.append(f"delta_4 = 0 makes chi degenerate at 0, so delta_j must vanish for j > 2; violated at {high}")
        # chi moments mu_j = delta_{j+2} / delta_2; Lyapunov ordering of their absolute moments
        mu = {j: float(self.delta(j + 2) / d2) for j in range(0, K - 1)}
        for k in range(1, (K - 2) // 2 + 1):
            even = mu[2 * k]
            if even < 0:
                out.append(f"delta_{2 * k + 2} must be >= 0")
                continue
            odd = abs(mu[2 * k - 1])
            if odd ** (1.0 / (2 * k - 1)) > even ** (1.0 / (2 * k)) * (1 + 1e-12):
                out.append(f"moment inequality fails: |delta_{2 * k + 1}/delta_2|^(1/{2 * k - 1}) "
                           f"> (delta_{2 * k + 2}/delta_2)^(1/{2 * k})")
            if 2 * k + 2 in mu:
                nxt = mu[2 * k + 2]
                if nxt >= 0 and even ** (1.0 / (2 * k)) > nxt ** (1.0 / (2 * k + 2)) * (1 + 1e-12):
                    out.append(f"moment inequality fails: (delta_{2 * k + 2}/delta_2)^(1/{2 * k}) "
                               f"> (delta_{2 * k + 4}/delta_2)^(1/{2 * k + 2})")
        return out

    def validate(self) -> "CumulantSpec":
        problems = self.violations()
        if problems:
            raise InvalidSpec(problems)
        return self

    @classmethod
    def from_deltas(cls, deltas: Sequence, time_kind: str = CONTINUOUS) -> "CumulantSpec":
        """``d_0 = 1`` and ``d_j = -j delta_j`` from ``delta_1, delta_2, ..``."""
        one = Fraction(1) if all_exact(deltas) else 1.0
        return cls((one,) + tuple(-j * dj for j, dj in enumerate(deltas, start=1)), time_kind)


def add_independent(a: CumulantSpec, b: CumulantSpec) -> CumulantSpec:
    """Spec of ``X + Y`` for independent stationary laws (cumulants add)."""
    K = max(a.K, b.K)
    return CumulantSpec.from_deltas(tuple(a.delta(j) + b.delta(j) for j in range(1, K + 1)))


# ---------------------------------------------------------------------------
# matrices and moments


def build_W(cs: CumulantSpec, n: int) -> GeneratorMatrix:
    """Generator on ``(1, x, .., x^n)``.

    ``raw`` has ``i d_0`` on the diagonal and ``binom(i, j) d_{i-j}`` below;
    ``entries = -raw`` is the decaying generator (``A_n(t) = exp(t entries)``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    exact = cs.exact
    raw = zeros((n + 1, n + 1), exact)
    for i in range(n + 1):
        raw[i, i] = i * cs.d[0]
        for j in range(i):
            raw[i, j] = binom(i, j) * cs.dj(i - j)
    return GeneratorMatrix(n, -raw, raw)


def build_A1(cs: CumulantSpec, n: int, rho) -> StructuralMatrix:
    """Discrete-time one-step matrix with entries ``binom(i, j) rho^j d_{i-j}``.

    In discrete time ``d_k`` are the moments of the innovation
    ``X_{k+1} - rho X_k`` (so ``d_0 = 1``).
    """
    if not -1 < rho < 1:
        raise ValueError("rho must lie in (-1, 1)")
    if cs.d[0] != 1:
        raise ValueError("discrete time needs d_0 = 1 (innovation moments)")
    exact = cs.exact and isinstance(rho, (int, Fraction))
    A = zeros((n + 1, n + 1), exact)
    for i in range(n + 1):
        for j in range(i + 1):
            A[i, j] = binom(i, j) * rho ** j * cs.dj(i - j)
    return StructuralMatrix(n, 1, A)


def stationary_moments(cs: CumulantSpec, N: int, *, rho=None) -> MomentSequence:
    """Forward substitution in ``W m = 0``: row ``j`` gives ``m_j``.

    With ``rho`` (discrete time) solves ``A_N(1) m = m`` instead.
    """
    one = Fraction(1) if cs.exact and (rho is None or isinstance(rho, (int, Fraction))) else 1.0
    m = [one]
    for j in range(1, N + 1):
        if rho is None:
            acc = sum(binom(j, k) * cs.dj(j - k) * m[k] for k in range(j))
            m.append(-acc / (j * cs.d[0]))
        else:
            acc = sum(binom(j, k) * rho ** k * cs.dj(j - k) * m[k] for k in range(j))
            m.append(acc / (1 - rho ** j))
    return MomentSequence(tuple(m))


# ---------------------------------------------------------------------------
# formal series


@dataclass(frozen=True)
class MgfSeries:
    """``exp(sum_{j>=1} kappa_j y^j / j!)`` stored by ``kappa_0 .. kappa_N`` (``kappa_0 = 0``)."""

    kappa: tuple

    def __post_init__(self):
        k = tuple(self.kappa)
        if not k or k[0] != 0:
            raise ValueError("kappa_0 must be 0")
        object.__setattr__(self, "kappa", k)

    @property
    def N(self) -> int:
        return len(self.kappa) - 1

    def coefficients(self) -> tuple:
        """Taylor coefficients ``m_n / n!`` of the MGF."""
        m = moments_of_mgf(self, self.N)
        return tuple(v / math.factorial(n) for n, v in enumerate(m.values))


def _zero_like(values):
    return Fraction(0) if all_exact(values) else 0.0


def mgf_series(cs: CumulantSpec, N: int = DEFAULT_ORDER) -> MgfSeries:
    """Cumulants ``kappa_j = delta_j`` of the stationary law."""
    return MgfSeries((_zero_like(cs.d),) + cs.deltas(N))


def moments_of_mgf(series: MgfSeries, N: int | None = None) -> MomentSequence:
    """Cumulant-to-moment recursion ``m_n = sum_k binom(n-1, k-1) kappa_k m_{n-k}``."""
    N = series.N if N is None else N
    kap = series.kappa
    one = Fraction(1) if all_exact(kap) else 1.0
    m = [one]
    for n in range(1, N + 1):
        m.append(sum(binom(n - 1, k - 1) * (kap[k] if k < len(kap) else 0) * m[n - k]
                     for k in range(1, n + 1)))
    return MomentSequence(tuple(m))


def series_mul(f: Sequence, g: Sequence, N: int) -> list:
    out = [0 * f[0]] * (N + 1)
    for i in range(min(N, len(f) - 1) + 1):
        for j in range(min(N - i, len(g) - 1) + 1):
            out[i + j] += f[i] * g[j]
    return out


def series_div(f: Sequence, g: Sequence, N: int) -> list:
    """``f / g`` with ``g[0] != 0``."""
    if g[0] == 0:
        raise ZeroDivisionError("series division needs g[0] != 0")
    out = []
    for n in range(N + 1):
        acc = f[n] if n < len(f) else 0 * f[0]
        for k in range(1, min(n, len(g) - 1) + 1):
            acc -= g[k] * out[n - k]
        out.append(acc / g[0])
    return out


def series_exp(c: Sequence, N: int) -> list:
    """``exp(sum_k c_k y^k)`` for ``c_0 = 0``, via ``E' = c' E``."""
    if c[0] != 0:
        raise ValueError("series_exp needs c_0 = 0")
    one = 1 + 0 * c[0]
    E = [one]
    for n in range(1, N + 1):
        acc = sum(k * (c[k] if k < len(c) else 0) * E[n - k] for k in range(1, n + 1))
        E.append(acc / n)
    return E


def ode_residual(cs: CumulantSpec, N: int = DEFAULT_ORDER):
    """Max coefficient of ``-y phi'(y)/phi(y) - (D(y) - 1)`` through order ``N``.

    ``D(y) = sum_j d_j y^j / j!`` with ``d`` normalized to ``d_0 = 1``.
    ``phi`` is built from :func:`stationary_moments`, so this ties the moment
    recursion to the differential equation it came from.
    """
    c = cs.normalized()
    m = stationary_moments(c, N + 1).values
    phi = [m[n] / math.factorial(n) for n in range(N + 2)]
    dphi = [(n + 1) * phi[n + 1] for n in range(N + 1)]
    lhs = [-v for v in series_div([0 * phi[0]] + dphi[:N], phi, N)]
    rhs = [0 * phi[0]] + [c.dj(j) / math.factorial(j) for j in range(1, N + 1)]
    return max(abs(a - b) for a, b in zip(lhs, rhs))


def increment_mgf(cs: CumulantSpec, tau, N: int = DEFAULT_ORDER, *, rho=None) -> MgfSeries:
    """Cumulants of ``X_{s+tau} - exp(-d_0 tau) X_s``: ``delta_j (1 - exp(-j d_0 tau))``.

    ``rho`` replaces ``exp(-d_0 tau)`` (rational ``rho`` keeps the result exact).
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    r = math.exp(-float(cs.d[0]) * float(tau)) if rho is None else rho
    kap = [_zero_like(cs.d)]
    for j in range(1, N + 1):
        kap.append(cs.delta(j) * (1 - r ** j))
    return MgfSeries(tuple(kap))


def bridge_mgf(cs: CumulantSpec, tau, sigma, N: int = DEFAULT_ORDER) -> tuple[MgfSeries, MgfSeries]:
    """``(Y_tau, Y_tau - Y_sigma)``: cumulants ``delta_j tau^{j/2}`` and ``delta_j (tau^{j/2} - sigma^{j/2})``."""
    if not 0 < sigma <= tau:
        raise ValueError("need 0 < sigma <= tau")
    c = cs.normalized()
    y = [0.0] + [float(c.delta(j)) * tau ** (j / 2) for j in range(1, N + 1)]
    inc = [0.0] + [float(c.delta(j)) * (tau ** (j / 2) - sigma ** (j / 2)) for j in range(1, N + 1)]
    return MgfSeries(tuple(y)), MgfSeries(tuple(inc))


def _depends_on_difference(kappa_at, tol: float) -> bool:
    ref = None
    for tau, sigma in LEVY_PAIRS:
        k = np.asarray(kappa_at(tau, sigma), dtype=float)
        if ref is None:
            ref = k
        elif np.max(np.abs(k - ref)) > tol * max(1.0, float(np.max(np.abs(ref)))):
            return False
    return True


def bridge_is_levy(cs: CumulantSpec, N: int = DEFAULT_ORDER, tol: float = LEVY_TOL) -> bool:
    """Do the bridge increments depend on ``(tau, sigma)`` only through ``tau - sigma``?

    Compares the increment cumulants at the witness pairs (2,1), (3,2) and
    (1.5, 0.5).  True for the Gaussian spec, false once any ``delta_j``,
    ``j != 2``, is nonzero.
    """
    return _depends_on_difference(lambda t, s: bridge_mgf(cs, t, s, N)[1].kappa, tol)


def levy_timechange_mgf(Q: MgfSeries, tau, sigma, N: int | None = None) -> MgfSeries:
    """Increment ``X_tau - X_sigma`` of ``X_t = exp(-t) L(exp(2t))`` for a Levy process
    ``L`` with unit-time cumulants ``Q.kappa``::

        log E exp(y(X_tau - X_sigma)) = (e^{2tau} - e^{2sigma}) Q(e^{-tau} y) + e^{2sigma} Q((e^{-tau} - e^{-sigma}) y)
    """
    N = Q.N if N is None else N
    et, es = math.exp(-tau), math.exp(-sigma)
    w = math.exp(2 * tau) - math.exp(2 * sigma)
    kap = [0.0]
    for j in range(1, N + 1):
        kq = float(Q.kappa[j]) if j <= Q.N else 0.0
        kap.append(kq * (w * et ** j + math.exp(2 * sigma) * (et - es) ** j))
    return MgfSeries(tuple(kap))


def levy_timechange_is_stationary(Q: MgfSeries, N: int | None = None, tol: float = LEVY_TOL) -> bool:
    """True iff the time-changed increments depend on ``tau - sigma`` only (``Q = a y^2``)."""
    return _depends_on_difference(lambda t, s: levy_timechange_mgf(Q, t, s, N).kappa, tol)


@dataclass(frozen=True)
class LaguerreMixture:
    """``rho * delta_{-(1-rho)} + (1-rho) * (Exp(1) - (1-rho))``."""

    rho: object
    point_mass_at: object
    point_weight: object
    exponential_shift: object
    exponential_weight: object
    order: int
    residual: float
    lhs: tuple = field(repr=False, default=())


def laguerre_mixture_decompose(rho, N: int = DEFAULT_ORDER) -> LaguerreMixture:
    """Check ``exp(-y(1-rho))(1-rho y)/(1-y) = rho exp(-y(1-rho)) + (1-rho) exp(-y(1-rho))/(1-y)``
    coefficient-wise through order ``N``.

    The left side is the conditional MGF of the shifted Laguerre process
    started from the mean; the right side shows it is a mixture with an atom,
    so that transition law has no density with respect to the marginal.
    """
    if not 0 <= rho <= 1:
        raise ValueError("rho must lie in [0, 1]")
    one = Fraction(1) if isinstance(rho, (int, Fraction)) else 1.0
    rho = rho * one
    shift = -(one - rho)
    # exp(shift * y) coefficients
    ex = [shift ** n / math.factorial(n) for n in range(N + 1)]
    geo = [one] * (N + 1)  # 1/(1-y)
    lhs = series_mul(series_mul(ex, [one, -rho], N), geo, N)
    exp_part = series_mul(ex, geo, N)
    rhs = [rho * a + (one - rho) * b for a, b in zip(ex, exp_part)]
    res = max(abs(a - b) for a, b in zip(lhs, rhs))
    return LaguerreMixture(rho, shift, rho, shift, one - rho, N, float(res), tuple(lhs))


def moment_convolution(a: MomentSequence, b: MomentSequence) -> MomentSequence:
    """Moments of ``X + Y`` for independent ``X, Y``: binomial convolution."""
    N = min(a.N, b.N)
    return MomentSequence(tuple(sum(binom(n, k) * a[k] * b[n - k] for k in range(n + 1))
                                for n in range(N + 1)))
