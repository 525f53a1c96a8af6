"""Statistical checks of the conditional-moment identities on simulated paths.

Conditioning on the past (or future) sigma-field is implemented as
conditioning on the single observation ``X_s`` (or ``X_t``); this is exact
because the processes are Markov.  Each test regresses an orthonormal
polynomial of one observation on a polynomial basis of the others by OLS with
HC0 sandwich standard errors and compares the fit to its closed-form target.

Finite-state specs also admit ``exact=True``: the regression is then computed
under the exact joint law by enumeration, with zero standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ._io import with_schema
from ._stats import ols_sandwich
from .errors import InsufficientPaths
from .harness import harness_coefficients
from .process_spec import ProcessSpec
from .processes import _grid, _lambdas, simulate

MIN_PATHS = 1000
DEFAULT_PATHS = 100_000


@dataclass(frozen=True)
class McReport:
    """Per-coefficient estimate, standard error, target and z-score.

    ``headline`` indexes the coefficients the test is about (the rest are
    nuisance terms whose targets are zero).
    """

    test: str
    labels: tuple
    estimate: tuple
    standard_error: tuple
    target: tuple
    z: tuple
    samples: int
    seed: int
    headline: tuple
    params: dict = field(default_factory=dict)

    @property
    def max_abs_z(self) -> float:
        return max(abs(self.z[i]) for i in self.headline)

    def passed(self, k: float = 3.0) -> bool:
        return all(abs(v) <= k for v in self.z)

    def to_dict(self) -> dict:
        return with_schema({
            "test": self.test,
            "params": self.params,
            "samples": self.samples,
            "seed": self.seed,
            "labels": list(self.labels),
            "estimate": list(self.estimate),
            "standard_error": list(self.standard_error),
            "target": list(self.target),
            "z": list(self.z),
            "headline": list(self.headline),
        })


def _zscores(beta, se, target, tol: float = 1e-12) -> tuple:
    out = []
    for b, s, t in zip(beta, se, target):
        if s > 0:
            out.append(float((b - t) / s))
        else:
            # zero spread: exact enumeration or a degenerate regression
            out.append(0.0 if abs(b - t) <= tol * max(1.0, abs(t)) else math.copysign(math.inf, b - t))
    return tuple(out)


def _check_paths(paths: int, exact: bool) -> None:
    if not exact and paths < MIN_PATHS:
        raise InsufficientPaths(f"need at least {MIN_PATHS} paths, got {paths}")


def _observe(spec: ProcessSpec, times, paths, seed, threads):
    uniq = sorted(set(float(t) for t in times))
    traj = simulate(spec, uniq, paths, seed, threads)
    col = {t: traj.values[:, i] for i, t in enumerate(uniq)}
    return [col[float(t)] for t in times]


def _chain_law(spec: ProcessSpec, times):
    """Nodes and joint probabilities of ``(X_{t_0}, .., X_{t_k})`` for a finite chain."""
    if not (spec.support.kind == "points" and spec.support.weights):
        raise ValueError("exact enumeration needs a finite-support spec")
    g = _grid(spec)
    M = len(g.nodes)
    mats = []
    for a, b in zip(times[:-1], times[1:]):
        mats.append(np.eye(M) if b == a else g.transition_matrix(_lambdas(spec, b - a)))
    states, probs = [], []
    for idx in product(range(M), repeat=len(times)):
        p = g.weights[idx[0]]
        for k, P in enumerate(mats):
            p *= P[idx[k], idx[k + 1]]
        states.append([g.nodes[i] for i in idx])
        probs.append(p)
    return np.asarray(states), np.asarray(probs)


def _conditional(spec, n, s, t, paths, seed, exact, threads, reverse):
    spec.check_degree(n)
    if t < s:
        raise ValueError("need t >= s")
    _check_paths(paths, exact)
    if exact:
        xs, w = _chain_law(spec, [s, t])
        x_s, x_t = xs[:, 0], xs[:, 1]
    else:
        x_s, x_t = _observe(spec, [s, t], paths, seed, threads)
        w = None
    given, resp = (x_t, x_s) if reverse else (x_s, x_t)
    rec = spec.recurrence
    X = rec.evaluate(given, n, orthonormal=True)
    y = rec.evaluate(resp, n, orthonormal=True)[:, n]
    beta, se = ols_sandwich(X, y, w)
    if t == s:
        se = np.zeros_like(se)  # identity regression: no sampling error
    lam = float(spec.indices.decay(t - s, n)[n])
    target = np.zeros(n + 1)
    target[n] = lam
    labels = tuple(f"h{k}" for k in range(n + 1))
    name = "reversed" if reverse else "conditional"
    params = {"spec": spec.name, "n": n, "s": s, "t": t, "exact": exact}
    return McReport(name, labels, tuple(map(float, beta)), tuple(map(float, se)), tuple(map(float, target)),
                    _zscores(beta, se, target), len(y) if not exact else 0, seed, (n,), params)


def conditional_moment_test(spec: ProcessSpec, n: int, s: float, t: float, paths: int = DEFAULT_PATHS,
                            seed: int = 0, *, exact: bool = False, threads: int = 1) -> McReport:
    """Regress ``h_n(X_t)`` on ``h_0..h_n(X_s)``; target ``exp(-alpha_n (t-s))`` at ``h_n``, zero elsewhere."""
    return _conditional(spec, n, s, t, paths, seed, exact, threads, reverse=False)


def reversed_martingale_test(spec: ProcessSpec, n: int, s: float, t: float, paths: int = DEFAULT_PATHS,
                             seed: int = 0, *, exact: bool = False, threads: int = 1) -> McReport:
    """Regress ``h_n(X_s)`` on ``h_0..h_n(X_t)`` (conditioning on the future)."""
    return _conditional(spec, n, s, t, paths, seed, exact, threads, reverse=True)


def harness_regression_test(spec: ProcessSpec, s: float, t: float, u: float, paths: int = DEFAULT_PATHS,
                            seed: int = 0, *, exact: bool = False, threads: int = 1) -> McReport:
    """Regress ``h_1(X_t)`` on ``h_i(X_s) h_j(X_u)``, ``i, j <= min(v-1, 2)``.

    Target: ``aL`` on ``h_1(X_s)``, ``aR`` on ``h_1(X_u)``, zero on the other
    products.  A non-harness spec shows up as nonzero nuisance coefficients
    or a shifted ``(aL, aR)``.
    """
    if not s < t < u:
        raise ValueError("need s < t < u")
    _check_paths(paths, exact)
    d = int(min(spec.support.cardinality - 1, 2, spec.max_degree))
    if exact:
        xs, w = _chain_law(spec, [s, t, u])
        x_s, x_t, x_u = xs[:, 0], xs[:, 1], xs[:, 2]
    else:
        x_s, x_t, x_u = _observe(spec, [s, t, u], paths, seed, threads)
        w = None
    rec = spec.recurrence
    Hs = rec.evaluate(x_s, d, orthonormal=True)
    Hu = rec.evaluate(x_u, d, orthonormal=True)
    pairs = [(i, j) for i in range(d + 1) for j in range(d + 1)]
    X = np.column_stack([Hs[:, i] * Hu[:, j] for i, j in pairs])
    y = rec.evaluate(x_t, 1, orthonormal=True)[:, 1]
    beta, se = ols_sandwich(X, y, w)
    hc = harness_coefficients(float(spec.indices.values[1]), s, t, u)
    target = np.zeros(len(pairs))
    iL, iR = pairs.index((1, 0)), pairs.index((0, 1))
    target[iL], target[iR] = hc.aL, hc.aR
    labels = tuple(f"h{i}(Xs)h{j}(Xu)" for i, j in pairs)
    params = {"spec": spec.name, "s": s, "t": t, "u": u, "exact": exact}
    return McReport("harness", labels, tuple(map(float, beta)), tuple(map(float, se)), tuple(map(float, target)),
                    _zscores(beta, se, target), len(y) if not exact else 0, seed, (iL, iR), params)
