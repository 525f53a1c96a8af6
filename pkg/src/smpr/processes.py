"""Concrete processes, closed-form kernels, exact transition sampling and the
time change to the bridge process ``Y``.

Built-ins: the OU process (Hermite martingales), the (q, alpha)-OU process
(continuous q-Hermite martingales on a compact interval), the two-point
symmetric chain, and general finite-state chains given by points, weights and
one decay index per orthogonal polynomial.

Sampling
--------
Every path owns a counter-based stream ``Philox(SeedSequence([seed, path]))``
and draws all its innovations up front; transitions are then applied to all
paths at once.  Results therefore do not depend on ``threads`` or on how
paths are chunked.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._numeric import all_exact, is_exact
from ._stats import ols_sandwich
from .errors import InvalidSpec
from .harness import is_harness
from .polycore import (
    MomentSequence,
    gauss_quadrature,
    hermite_recurrence,
    moments_to_recurrence,
    q_hermite_recurrence,
)
from .process_spec import CONTINUOUS, DISCRETE, CorrelationIndices, ProcessSpec, Support, harness_indices

DEFAULT_DEGREE = 80
#: q-OU sampler grid size and kernel truncation cap.
Q_GRID = 2048
Q_TRUNC_CAP = 600
KERNEL_TOL = 1e-13


# ---------------------------------------------------------------------------
# built-in specs


def _check_alpha(alpha):
    if not alpha > 0:
        raise InvalidSpec([f"alpha must be positive, got {alpha!r}"])


def ou_spec(alpha=1, max_degree: int = DEFAULT_DEGREE) -> ProcessSpec:
    """Stationary OU process with unit variance: ``alpha_n = n alpha``, Hermite family."""
    _check_alpha(alpha)
    return ProcessSpec("ou", hermite_recurrence(max_degree), harness_indices(alpha, max_degree),
                       Support("unbounded"), {"alpha": alpha, "max_degree": max_degree})


def q_ou_spec(alpha=1, q=0.5, max_degree: int = DEFAULT_DEGREE) -> ProcessSpec:
    """(q, alpha)-OU: continuous q-Hermite family, support ``[-2/sqrt(1-q), 2/sqrt(1-q)]``."""
    _check_alpha(alpha)
    if not -1 < q < 1:
        raise InvalidSpec([f"q must lie in (-1, 1), got {q!r}"])
    if is_exact(q):
        q = Fraction(q)
    edge = 2.0 / math.sqrt(1.0 - float(q))
    return ProcessSpec("q_ou", q_hermite_recurrence(q, max_degree), harness_indices(alpha, max_degree),
                       Support("interval", -edge, edge), {"alpha": alpha, "q": q, "max_degree": max_degree})


def two_point_spec(alpha=1) -> ProcessSpec:
    """Symmetric two-point chain on ``{-1, 1}``: family ``{1, x}``, ``alpha_1 = alpha``."""
    _check_alpha(alpha)
    spec = finite_chain_spec((-1, 1), (Fraction(1, 2), Fraction(1, 2)), (alpha,), name="two_point")
    return ProcessSpec("two_point", spec.recurrence, spec.indices, spec.support, {"alpha": alpha})


def finite_chain_spec(points: Sequence, weights: Sequence, alphas: Sequence, *,
                      name: str = "finite_chain", time_kind: str = CONTINUOUS) -> ProcessSpec:
    """Reversible chain on ``points`` with stationary ``weights`` and one index
    per nontrivial orthogonal polynomial (``len(alphas) == len(points) - 1``).

    The generator ``Q_xy = -pi_y sum_k alpha_k h_k(x) h_k(y)`` must have
    nonnegative off-diagonal entries (discrete time: the one-step matrix must
    be nonnegative), otherwise the spec is rejected.
    """
    points, weights = tuple(points), tuple(weights)
    v = len(points)
    problems = []
    if len(weights) != v:
        problems.append("points and weights differ in length")
    if len(set(points)) != v:
        problems.append("points must be distinct")
    if any(not w > 0 for w in weights):
        problems.append("weights must be positive")
    if len(alphas) != v - 1:
        problems.append(f"{v} points need {v - 1} indices, got {len(alphas)}")
    if problems:
        raise InvalidSpec(problems)
    exact = all_exact(points) and all_exact(weights)
    if exact:
        points = tuple(Fraction(p) for p in points)
        weights = tuple(Fraction(w) for w in weights)
        total = sum(weights)
    else:
        points = tuple(float(p) for p in points)
        weights = tuple(float(w) for w in weights)
        total = math.fsum(weights)
    if total != 1 and abs(total - 1) > 1e-12:
        raise InvalidSpec([f"weights sum to {total}, not 1"])
    mean = sum(w * x for x, w in zip(points, weights))
    if mean != 0 and abs(mean) > 1e-12:
        raise InvalidSpec([f"stationary mean must be 0, got {mean}"])
    m = MomentSequence(tuple(sum(w * x ** k for x, w in zip(points, weights)) for k in range(2 * v - 1)))
    rec = moments_to_recurrence(m, allow_truncation=True).truncated(v - 1)
    if time_kind == DISCRETE:
        head = Fraction(1) if all_exact(alphas) else 1.0
    else:
        head = Fraction(0) if all_exact(alphas) else 0.0
    indices = CorrelationIndices((head,) + tuple(alphas), time_kind)
    spec = ProcessSpec(name, rec, indices, Support("points", points=points, weights=weights),
                       {"points": points, "weights": weights, "alphas": tuple(alphas)})
    _check_chain_positivity(spec)
    return spec


def _check_chain_positivity(spec: ProcessSpec) -> None:
    pts = np.asarray([float(p) for p in spec.support.points])
    w = np.asarray([float(p) for p in spec.support.weights])
    H = spec.recurrence.evaluate(pts, spec.max_degree, orthonormal=True)
    vals = np.asarray([float(a) for a in spec.indices.values])
    if spec.indices.is_discrete:
        P = (H * vals) @ H.T * w[None, :]
        bad = P < -1e-12
    else:
        Q = -(H * vals) @ H.T * w[None, :]
        bad = (Q < -1e-12) & ~np.eye(len(pts), dtype=bool)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidSpec([f"indices give a negative transition rate from {pts[i]} to {pts[j]}"])


# ---------------------------------------------------------------------------
# kernels


def mehler_kernel(rho, x, y):
    """Closed-form OU transition density relative to the N(0,1) marginal.

    ``exp(-(x - rho y)^2 / (2(1-rho^2)) + x^2/2) / sqrt(1-rho^2)``, evaluated
    in the algebraically equal symmetric form
    ``exp((2 rho x y - rho^2 (x^2 + y^2)) / (2(1-rho^2))) / sqrt(1-rho^2)``.
    """
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = rho * rho
    out = np.exp((2 * rho * x * y - r2 * (x * x + y * y)) / (2 * (1 - r2))) / math.sqrt(1 - r2)
    return out if out.ndim else float(out)


def q_mehler_series(q, rho, x, y, N: int):
    """Partial sum ``sum_{n<=N} rho^n H_n(x|q) H_n(y|q) / [n]_q!``."""
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    rec = q_hermite_recurrence(float(q), N)
    hx = rec.evaluate(x, N, orthonormal=True)
    hy = rec.evaluate(y, N, orthonormal=True)
    out = np.sum(hx * hy * float(rho) ** np.arange(N + 1), axis=-1)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class _GridChain:
    """Stationary law on finitely many nodes with orthonormal values ``H``."""

    nodes: np.ndarray
    weights: np.ndarray
    H: np.ndarray  # nodes x degrees

    def row(self, hx: np.ndarray, lam: np.ndarray) -> np.ndarray:
        k = len(lam)
        K = (hx[:k] * lam) @ self.H[:, :k].T
        p = self.weights * np.maximum(K, 0.0)
        return p / p.sum()

    def transition_matrix(self, lam: np.ndarray) -> np.ndarray:
        """Row-stochastic ``P_ij = w_j max(K(x_i, x_j), 0)``, renormalized."""
        k = len(lam)
        K = (self.H[:, :k] * lam) @ self.H[:, :k].T
        P = np.maximum(K, 0.0) * self.weights[None, :]
        return P / P.sum(axis=1, keepdims=True)

    def transition_cdf(self, lam: np.ndarray) -> np.ndarray:
        cdf = np.cumsum(self.transition_matrix(lam), axis=1)
        cdf[:, -1] = 1.0
        return cdf

    def stationary_cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.weights)
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        return cdf


@lru_cache(maxsize=8)
def _q_grid(q: float) -> _GridChain:
    rec = q_hermite_recurrence(q, Q_GRID)
    nodes, w = gauss_quadrature(rec, Q_GRID)
    H = rec.evaluate(nodes, Q_TRUNC_CAP, orthonormal=True)
    return _GridChain(nodes, w, H)


def _q_lambdas(alpha: float, tau: float) -> np.ndarray:
    rho = math.exp(-alpha * tau)
    if rho <= 0.0:
        N = 0
    elif rho >= 1.0:
        N = Q_TRUNC_CAP
    else:
        N = min(Q_TRUNC_CAP, max(1, math.ceil(math.log(KERNEL_TOL) / math.log(rho))))
    return rho ** np.arange(N + 1)


def _sampler_kind(spec: ProcessSpec) -> str:
    if spec.name == "ou":
        return "ou"
    if spec.name == "q_ou":
        return "q_ou"
    if spec.support.kind == "points" and spec.support.weights:
        return "chain"
    if spec.support.bounded:
        return "quadrature"
    raise NotImplementedError(f"no sampler for unbounded custom spec {spec.name!r}")


def _grid(spec: ProcessSpec) -> _GridChain:
    kind = _sampler_kind(spec)
    if kind == "q_ou":
        return _q_grid(float(spec.params["q"]))
    if kind == "chain":
        nodes = np.asarray([float(p) for p in spec.support.points])
        w = np.asarray([float(p) for p in spec.support.weights])
    else:
        nodes, w = gauss_quadrature(spec.recurrence, spec.max_degree + 1)
    return _GridChain(nodes, w, spec.recurrence.evaluate(nodes, spec.max_degree, orthonormal=True))


def _lambdas(spec: ProcessSpec, tau) -> np.ndarray:
    if _sampler_kind(spec) == "q_ou":
        return _q_lambdas(float(spec.params["alpha"]), float(tau))
    return np.asarray([float(v) for v in spec.indices.decay(tau, spec.max_degree)])


def _check_tau(spec: ProcessSpec, tau) -> None:
    if not tau > 0:
        raise ValueError("tau must be positive")
    if spec.indices.is_discrete and int(tau) != tau:
        raise ValueError("discrete-time specs step by integers")


def transition_sample(spec: ProcessSpec, x, tau, rng: np.random.Generator, size=None):
    """Draw ``X_{s+tau}`` given ``X_s = x``.

    OU: ``N(e^{-alpha tau} x, 1 - e^{-2 alpha tau})``.  Finite chains: the
    spectral transition matrix.  q-OU: the truncated Poisson-Mehler kernel
    times the Gauss-quadrature marginal on a 2048-node grid.
    """
    _check_tau(spec, tau)
    if not bool(np.all(spec.support.contains(x))):
        raise ValueError(f"state {x!r} outside the support")
    kind = _sampler_kind(spec)
    if kind == "ou":
        r = math.exp(-float(spec.params["alpha"]) * float(tau))
        return r * x + math.sqrt(1 - r * r) * rng.standard_normal(size)
    g = _grid(spec)
    lam = _lambdas(spec, tau)
    rec = q_hermite_recurrence(float(spec.params["q"]), len(lam) - 1) if kind == "q_ou" else spec.recurrence
    hx = rec.evaluate(float(x), len(lam) - 1, orthonormal=True)
    p = g.row(hx, lam)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return g.nodes[np.minimum(idx, len(cdf) - 1)]


@dataclass(frozen=True)
class Trajectory:
    """Simulated paths: ``values[i, k]`` is path ``i`` at ``times[k]``."""

    times: np.ndarray
    values: np.ndarray
    seed: int
    spec: ProcessSpec

    @property
    def paths(self) -> int:
        return self.values.shape[0]

    def path(self, i: int) -> np.ndarray:
        return self.values[i]


def path_rng(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(path)])))


def _innovations(kind: str, seed: int, lo: int, hi: int, steps: int) -> np.ndarray:
    out = np.empty((hi - lo, steps))
    for i in range(lo, hi):
        g = path_rng(seed, i)
        out[i - lo] = g.standard_normal(steps) if kind == "ou" else g.random(steps)
    return out


def _draw_from_rows(cdf: np.ndarray, state: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.empty_like(state)
    order = np.argsort(state, kind="stable")
    uniq, starts = np.unique(state[order], return_index=True)
    bounds = list(starts[1:]) + [len(order)]
    for i, a, b in zip(uniq, starts, bounds):
        sel = order[a:b]
        out[sel] = np.searchsorted(cdf[i], u[sel], side="right")
    return np.minimum(out, cdf.shape[1] - 1)


def _simulate_chunk(spec, kind, times, seed, lo, hi):
    steps = len(times)
    eps = _innovations(kind, seed, lo, hi, steps)
    vals = np.empty_like(eps)
    if kind == "ou":
        alpha = float(spec.params["alpha"])
        vals[:, 0] = eps[:, 0]
        for k in range(1, steps):
            r = math.exp(-alpha * (times[k] - times[k - 1]))
            vals[:, k] = r * vals[:, k - 1] + math.sqrt(1 - r * r) * eps[:, k]
        return vals
    g = _grid(spec)
    state = np.searchsorted(g.stationary_cdf(), eps[:, 0], side="right")
    state = np.minimum(state, len(g.nodes) - 1)
    vals[:, 0] = g.nodes[state]
    cache: dict = {}
    for k in range(1, steps):
        tau = times[k] - times[k - 1]
        key = round(tau, 15)
        if key not in cache:
            cache[key] = g.transition_cdf(_lambdas(spec, tau))
        state = _draw_from_rows(cache[key], state, eps[:, k])
        vals[:, k] = g.nodes[state]
    return vals


def simulate(spec: ProcessSpec, times: Sequence, paths: int, seed: int, threads: int = 1) -> Trajectory:
    """Stationary paths observed at ``times`` (exact transitions, no discretization)."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if spec.indices.is_discrete and np.any(times != np.round(times)):
        raise ValueError("discrete-time specs need integer times")
    if paths < 1:
        raise ValueError("paths must be positive")
    kind = _sampler_kind(spec)
    threads = max(1, int(threads))
    chunk = max(1, math.ceil(paths / threads))
    bounds = [(lo, min(paths, lo + chunk)) for lo in range(0, paths, chunk)]
    if threads == 1 or len(bounds) == 1:
        parts = [_simulate_chunk(spec, kind, times, seed, lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda b: _simulate_chunk(spec, kind, times, seed, *b), bounds))
    return Trajectory(times, np.vstack(parts), int(seed), spec)


# ---------------------------------------------------------------------------
# bridge process


def _bridge_alpha(spec: ProcessSpec) -> float:
    if not is_harness(spec.indices, spec.support.cardinality):
        raise ValueError("time change needs a harness spec (alpha_n = n alpha_1)")
    if spec.recurrence.a[0] != 0:
        raise ValueError("time change needs a centred marginal")
    return float(spec.indices.values[1])


def time_change_to_bridge(spec: ProcessSpec, trajectory: Trajectory) -> Trajectory:
    """``tau = exp(2 alpha_1 t)``, ``Y_tau = sqrt(tau) h_1(X_t)``.

    ``h_1(x) = x`` for all built-ins (unit variance).
    """
    a1 = _bridge_alpha(spec)
    tau = np.exp(2 * a1 * trajectory.times)
    h1 = trajectory.values / math.sqrt(float(spec.recurrence.b[0]))
    return Trajectory(tau, np.sqrt(tau) * h1, trajectory.seed, spec)


def _bridge_pair(spec, sigma, tau, paths, seed):
    if not 0 < sigma <= tau:
        raise ValueError("need 0 < sigma <= tau")
    a1 = _bridge_alpha(spec)
    gap = math.log(tau / sigma) / (2 * a1)
    # stationarity: observe at (0, gap) and shift the clock
    times = [0.0] if gap == 0 else [0.0, gap]
    traj = simulate(spec, times, paths, seed)
    x_s, x_t = traj.values[:, 0], traj.values[:, -1]
    return x_s, x_t


@dataclass(frozen=True)
class BridgeCheck:
    """Regression of ``tau^{n/2} h_n(Y_tau / sqrt(tau))`` on ``h_0..h_n(Y_sigma / sqrt(sigma))``."""

    n: int
    sigma: float
    tau: float
    estimate: tuple
    standard_error: tuple
    target: tuple
    residual: float
    samples: int
    seed: int


def bridge_martingale_check(spec: ProcessSpec, n: int, sigma: float, tau: float,
                            paths: int = 100_000, seed: int = 0) -> BridgeCheck:
    """Martingale property of ``tau^{n/2} h_n(Y_tau / sqrt(tau))``.

    Target: coefficient ``sigma^{n/2}`` on ``h_n`` and zero elsewhere.
    ``residual`` is the largest ``|estimate - target|``.
    """
    spec.check_degree(n)
    x_s, x_t = _bridge_pair(spec, sigma, tau, paths, seed)
    Hs = spec.recurrence.evaluate(x_s, n, orthonormal=True)
    y = tau ** (n / 2) * spec.recurrence.evaluate(x_t, n, orthonormal=True)[:, n]
    if n == 0:
        beta, se = np.array([1.0]), np.array([0.0])
    else:
        beta, se = ols_sandwich(Hs, y)
    target = np.zeros(n + 1)
    target[n] = sigma ** (n / 2)
    return BridgeCheck(n, sigma, tau, tuple(beta), tuple(se), tuple(target),
                       float(np.max(np.abs(beta - target))), paths, seed)


def bridge_increment_variance(spec: ProcessSpec, sigma: float, tau: float,
                              paths: int = 100_000, seed: int = 0) -> tuple[float, float, float]:
    """MC ``E(Y_tau - Y_sigma)^2`` as ``(estimate, standard error, tau - sigma)``."""
    x_s, x_t = _bridge_pair(spec, sigma, tau, paths, seed)
    b1 = math.sqrt(float(spec.recurrence.b[0]))
    d2 = (math.sqrt(tau) * x_t / b1 - math.sqrt(sigma) * x_s / b1) ** 2
    return float(d2.mean()), float(d2.std(ddof=1) / math.sqrt(len(d2))), float(tau - sigma)


# ---------------------------------------------------------------------------
# spec documents

BUILTINS = ("ou", "q_ou", "two_point", "finite_chain")


def _num(v):
    from ._numeric import parse_number
    return parse_number(v)


def spec_from_dict(doc: dict) -> ProcessSpec:
    """Build a spec from its JSON document, collecting every violation.

    Either ``builtin: {kind, params}`` or explicit ``alpha``/``rho``,
    ``recurrence: {a, b}`` and ``support``.
    """
    from .errors import SMPRError
    from .polycore import ThreeTermRecurrence
    from .process_spec import indices_from_sequence

    problems: list[str] = []
    if "builtin" in doc:
        b = doc["builtin"]
        kind = b.get("kind")
        p = {k: (_num(v) if isinstance(v, (int, float, str)) else v) for k, v in b.get("params", {}).items()}
        try:
            if kind == "ou":
                return ou_spec(p.get("alpha", 1), int(p.get("max_degree", DEFAULT_DEGREE)))
            if kind == "q_ou":
                return q_ou_spec(p.get("alpha", 1), p.get("q", 0.5), int(p.get("max_degree", DEFAULT_DEGREE)))
            if kind == "two_point":
                return two_point_spec(p.get("alpha", 1))
            if kind == "finite_chain":
                return finite_chain_spec([_num(v) for v in p["points"]], [_num(v) for v in p["weights"]],
                                         [_num(v) for v in p["alphas"]])
        except (SMPRError, ValueError, KeyError, TypeError) as e:
            raise InvalidSpec(getattr(e, "violations", [str(e)])) from e
        raise InvalidSpec([f"unknown builtin kind {kind!r}; expected one of {BUILTINS}"])

    time_kind = doc.get("time_kind", CONTINUOUS)
    key = "rho" if time_kind == DISCRETE else "alpha"
    indices = rec = support = None
    if key not in doc:
        problems.append(f"missing '{key}' array")
    else:
        try:
            indices = indices_from_sequence(doc[key], time_kind)
        except InvalidSpec as e:
            problems.extend(e.violations)
        except (TypeError, ValueError) as e:
            problems.append(f"{key}: {e}")
    if "recurrence" not in doc:
        problems.append("missing 'recurrence' object")
    else:
        try:
            rec = ThreeTermRecurrence.from_dict(doc["recurrence"])
        except (KeyError, TypeError, ValueError) as e:
            problems.append(f"recurrence: {e}")
    try:
        support = Support.from_dict(doc.get("support", {"kind": "unbounded"}))
    except (KeyError, TypeError, ValueError) as e:
        problems.append(f"support: {e}")
    if problems:
        raise InvalidSpec(problems)
    return ProcessSpec(doc.get("name", "custom"), rec, indices, support)
