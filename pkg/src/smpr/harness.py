"""Harness and quadratic-harness tests for stationary polynomial-regression
processes, and the three-way classification of quadratic harnesses.

Times are passed as ``s < t < u``.  Wherever exponentials of time gaps
appear, an exact variant accepts the decay factors
``r_ts = exp(-alpha_1 (t-s))`` and ``r_tu = exp(-alpha_1 (u-t))`` directly so
that rational factors give rational coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polycore import family_from_recurrence
from .process_spec import CorrelationIndices, ProcessSpec

#: Relative tolerance for alpha_n == n alpha_1.
HARNESS_RTOL = 1e-12

TWO_POINT = "TwoPointChain"
ORNSTEIN_UHLENBECK = "OrnsteinUhlenbeck"
Q_ORNSTEIN_UHLENBECK = "QOrnsteinUhlenbeck"


def is_harness(indices, v=math.inf, rtol: float = HARNESS_RTOL) -> bool:
    """``alpha_n = n alpha_1`` for every ``2 <= n < v`` that is stored."""
    vals = indices.values if isinstance(indices, CorrelationIndices) else tuple(indices)
    if len(vals) < 2:
        return True
    a1 = vals[1]
    top = len(vals) if v == math.inf else min(len(vals), int(v))
    for n in range(2, top):
        target = n * a1
        if abs(vals[n] - target) > rtol * max(abs(target), abs(vals[n]), 1e-300):
            return False
    return True


@dataclass(frozen=True)
class HarnessCoefficients:
    """``E(h_1(X_t) | X_s, X_u) = aL h_1(X_s) + aR h_1(X_u)``."""

    aL: object
    aR: object
    s: float
    t: float
    u: float
    alpha1: float
    residual: float = 0.0


def _factors(alpha1, s, t, u, factors):
    if factors is not None:
        r_ts, r_tu = factors
        return r_ts, r_tu
    return math.exp(-alpha1 * (t - s)), math.exp(-alpha1 * (u - t))


def harness_coefficients(alpha1, s, t, u, *, factors: Sequence | None = None) -> HarnessCoefficients:
    """Solve the two moment equations for ``aL`` and ``aR``.

    Closed form::

        aL = r_us (1/r_tu - r_tu) / (1 - r_us^2),  aR = r_us (1/r_ts - r_ts) / (1 - r_us^2)

    with ``r_xy = exp(-alpha_1 |x - y|)``.
    """
    if factors is None:
        if not s < t < u:
            raise ValueError("need s < t < u")
        if not alpha1 > 0:
            raise ValueError("alpha1 must be positive")
    r_ts, r_tu = _factors(alpha1, s, t, u, factors)
    r_us = r_ts * r_tu
    den = 1 - r_us * r_us
    if den == 0:
        raise ValueError("degenerate spacing u == s")
    aL = r_us * (1 / r_tu - r_tu) / den
    aR = r_us * (1 / r_ts - r_ts) / den
    res = max(abs(r_ts - (aL + aR * r_us)), abs(r_tu - (aL * r_us + aR)))
    return HarnessCoefficients(aL, aR, s, t, u, alpha1, float(res))


def har_residual(alphas: Sequence, n: int, s, t, u) -> float:
    """``|exp(-a_{n-1}(t-s) - a_n(u-t)) - aL exp(-a_n(u-s)) - aR exp(-a_{n-1}(u-s))|``.

    Zero for every ``n`` exactly when ``a_n = n a_1``.
    """
    if n < 1 or n >= len(alphas):
        raise ValueError(f"n must lie in 1..{len(alphas) - 1}")
    a = [float(v) for v in alphas]
    hc = harness_coefficients(a[1], s, t, u)
    lhs = math.exp(-a[n - 1] * (t - s) - a[n] * (u - t))
    rhs = hc.aL * math.exp(-a[n] * (u - s)) + hc.aR * math.exp(-a[n - 1] * (u - s))
    return abs(lhs - rhs)


@dataclass(frozen=True)
class QuadraticCoefficients:
    """Coefficients of ``E(r_2(X_t) | X_s, X_u)`` on
    ``r_2(X_s), r_2(X_u), r_1(X_s) r_1(X_u), r_1(X_s), r_1(X_u), 1``."""

    AL: object
    AR: object
    B: object
    CL: object
    CR: object
    D: object

    def as_tuple(self) -> tuple:
        return (self.AL, self.AR, self.B, self.CL, self.CR, self.D)


def quadratic_residuals(qc: QuadraticCoefficients, alpha1, s, t, u, eh1_sq, eh1_cube,
                        *, factors: Sequence | None = None) -> np.ndarray:
    """Five residuals of the moment constraints on a quadratic harness.

    With monic ``h_1, h_2`` and ``e = exp(-alpha_1 (u-s))``:

    * ``e B E h_1^2 + D = 0``
    * ``e B E h_1^3 + (CL e + CR) E h_1^2 = 0`` (tested against ``h_1(X_u)``)
    * ``e B E h_1^3 + (CL + CR e) E h_1^2 = 0`` (tested against ``h_1(X_s)``)
    * ``exp(-2 alpha_1 (u-t)) = AL e^2 + AR + B e`` (against ``h_2(X_u)``)
    * ``exp(-2 alpha_1 (t-s)) = AL + AR e^2 + B e`` (against ``h_2(X_s)``)

    Returned as absolute values; with rational ``factors`` and coefficients
    the arithmetic is exact.
    """
    r_ts, r_tu = _factors(alpha1, s, t, u, factors)
    e = r_ts * r_tu
    AL, AR, B, CL, CR, D = qc.as_tuple()
    res = [
        e * B * eh1_sq + D,
        e * B * eh1_cube + (CL * e + CR) * eh1_sq,
        e * B * eh1_cube + (CL + CR * e) * eh1_sq,
        r_tu * r_tu - (AL * e * e + AR + B * e),
        r_ts * r_ts - (AL + AR * e * e + B * e),
    ]
    exact = all(isinstance(v, (int, Fraction)) for v in res)
    return np.array([abs(v) for v in res], dtype=object if exact else float)


def gaussian_quadratic_coefficients(alpha, s, t, u) -> QuadraticCoefficients:
    """OU (unit variance) coefficients from Gaussian conditioning of ``X_t`` on ``(X_s, X_u)``.

    ``E(X_t^2 | .) = (aL X_s + aR X_u)^2 + v`` with ``v`` the conditional
    variance; rewritten in ``r_2(x) = x^2 - 1``.
    """
    rho = lambda d: math.exp(-alpha * abs(d))  # noqa: E731
    S = np.array([[1.0, rho(u - s)], [rho(u - s), 1.0]])
    k = np.array([rho(t - s), rho(u - t)])
    aL, aR = np.linalg.solve(S, k)
    v = 1.0 - k @ np.array([aL, aR])
    return QuadraticCoefficients(aL * aL, aR * aR, 2 * aL * aR, 0.0, 0.0, aL * aL + aR * aR + v - 1.0)


def _polymul(f, g):
    out = [0 * f[0]] * (len(f) + len(g) - 1)
    for i, fi in enumerate(f):
        for j, gj in enumerate(g):
            out[i + j] += fi * gj
    return out


def three_time_regression(spec: ProcessSpec, r_ts, r_tu):
    """Population regression of monic ``p_2(X_t)`` and ``p_1(X_t)`` on
    functions of ``(X_s, X_u)``, computed from the moment functional.

    Uses ``E F(X_s) H(X_t) G(X_u) = sum_{m,n} r_ts^m r_tu^n <F,p_m><G,p_n><H p_n, p_m> / (hhat_m hhat_n)``.
    Returns ``(QuadraticCoefficients, (aL, aR))``.  Exact when the spec's
    recurrence and the factors are rational.  For a two-point law ``r_2``
    vanishes on the support and ``AL, AR`` are not identified; they are then
    set to the unique solution of the two ``h_2``-tested constraints.
    """
    deg = min(4, spec.recurrence.length)
    P = family_from_recurrence(spec.recurrence, deg)
    finite = spec.support.kind == "points" and bool(spec.support.weights)
    m = spec.moments(12 if finite else 2 * deg)
    hh = spec.recurrence.norms(deg)
    basis = [list(P[k]) for k in range(deg + 1)]
    v = spec.support.cardinality

    def coef(F):  # <F, p_n> for n = 0..deg
        return [m.inner(F, basis[n]) if n < v else 0 for n in range(deg + 1)]

    def e2(F, G, r):  # E F(X_a) G(X_b), decay r between them
        cf, cg = coef(F), coef(G)
        return sum(r ** n * cf[n] * cg[n] / hh[n] for n in range(deg + 1) if n < v)

    def e3(F, H, G):
        cf, cg = coef(F), coef(G)
        tot = 0
        for mm in range(deg + 1):
            for nn in range(deg + 1):
                if mm >= v or nn >= v or cf[mm] == 0 or cg[nn] == 0:
                    continue
                tot += (r_ts ** mm * r_tu ** nn * cf[mm] * cg[nn]
                        * m.inner(_polymul(H, basis[nn]), basis[mm]) / (hh[mm] * hh[nn]))
        return tot

    one = basis[0]
    two_point = v <= 2
    p1 = basis[1]
    p2 = None if two_point else basis[2]
    # regressors as (F(X_s), G(X_u)) pairs
    regs = [] if two_point else [(p2, one), (one, p2)]
    regs += [(p1, p1), (p1, one), (one, p1), (one, one)]
    r_us = r_ts * r_tu
    k = len(regs)
    G = [[e2(_polymul(regs[i][0], regs[j][0]), _polymul(regs[i][1], regs[j][1]), r_us)
          for j in range(k)] for i in range(k)]
    rhs2 = [0] * k if two_point else [e3(F, p2, Gx) for F, Gx in regs]
    rhs1 = [e3(F, p1, Gx) for F, Gx in regs]
    beta2 = _solve(G, rhs2)
    beta1 = _solve(G, rhs1)
    if two_point:
        B, CL, CR, D = beta2
        # AL, AR from the h_2-tested constraints (r_2 vanishes on the support)
        e = r_us
        U = r_tu * r_tu - B * e
        S = r_ts * r_ts - B * e
        AL = (U * e * e - S) / (e ** 4 - 1)
        AR = U - AL * e * e
        qc = QuadraticCoefficients(AL, AR, B, CL, CR, D)
        aL, aR = beta1[1], beta1[2]
    else:
        qc = QuadraticCoefficients(*beta2)
        aL, aR = beta1[3], beta1[4]
    return qc, (aL, aR), beta1


def _solve(A, b):
    """Gaussian elimination usable on Fractions and floats."""
    n = len(b)
    M = [list(A[i]) + [b[i]] for i in range(n)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(M[r][c]))
        if M[piv][c] == 0:
            raise np.linalg.LinAlgError("singular regression Gram matrix")
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


@dataclass(frozen=True)
class QuadraticClass:
    tag: str
    q: float
    alpha: float
    recipe: dict = field(default_factory=dict, compare=False)


def classify_quadratic(q, alpha) -> QuadraticClass:
    """Which quadratic harness corresponds to ``(q, alpha)``.

    ``q = -1`` is the two-point chain, ``q = 1`` the OU process and
    ``-1 < q < 1`` the (q, alpha)-OU process.  ``recipe`` names the built-in
    constructor and its arguments.
    """
    if not -1 <= q <= 1:
        raise ValueError(f"q must lie in [-1, 1], got {q!r}")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if q == -1:
        return QuadraticClass(TWO_POINT, q, alpha, {"builtin": "two_point", "alpha": alpha})
    if q == 1:
        return QuadraticClass(ORNSTEIN_UHLENBECK, q, alpha, {"builtin": "ou", "alpha": alpha})
    return QuadraticClass(Q_ORNSTEIN_UHLENBECK, q, alpha, {"builtin": "q_ou", "alpha": alpha, "q": q})
