"""Core value types describing a stationary Markov process with polynomial
regression: its correlation indices, marginal recurrence and support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from ._numeric import all_exact, number_to_json, parse_number
from .errors import InvalidSpec, RecurrenceLengthError
from .polycore import MomentSequence, ThreeTermRecurrence, recurrence_to_moments

CONTINUOUS = "continuous"
DISCRETE = "discrete"


@dataclass(frozen=True)
class CorrelationIndices:
    """``alpha_0 .. alpha_N`` (continuous time) or ``rho_0 .. rho_N`` (discrete).

    ``alpha_0 = 0`` and ``rho_0 = 1`` always.
    """

    values: tuple
    time_kind: str = CONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        problems = self.violations()
        if problems:
            raise InvalidSpec(problems)

    def violations(self) -> list[str]:
        out = []
        v = self.values
        if self.time_kind not in (CONTINUOUS, DISCRETE):
            return [f"unknown time_kind {self.time_kind!r}"]
        if not v:
            return ["no correlation indices given"]
        if self.time_kind == CONTINUOUS:
            if v[0] != 0:
                out.append(f"alpha_0 must be 0, got {v[0]!r}")
            neg = [n for n in range(1, len(v)) if v[n] < 0]
            if neg:
                out.append(f"alpha_n must be >= 0, violated at n={neg}")
        else:
            if v[0] != 1:
                out.append(f"rho_0 must be 1, got {v[0]!r}")
            bad = [n for n in range(1, len(v)) if not -1 < v[n] < 1]
            if bad:
                out.append(f"rho_n must lie in (-1, 1), violated at n={bad}")
        return out

    @property
    def N(self) -> int:
        return len(self.values) - 1

    @property
    def exact(self) -> bool:
        return all_exact(self.values)

    @property
    def is_discrete(self) -> bool:
        return self.time_kind == DISCRETE

    def rate(self, n: int) -> float:
        """Continuous decay rate; for discrete time ``-log|rho_n|``."""
        v = self.values[n]
        if self.is_discrete:
            return math.inf if v == 0 else -math.log(abs(float(v)))
        return float(v)

    def decay(self, t, n: int | None = None) -> tuple:
        """Diagonal of ``Lambda_n(t)``: ``exp(-alpha_k t)`` or ``rho_k ** t``.

        Always computed from the stored indices, never from matrix logs.
        """
        n = self.N if n is None else n
        if n > self.N:
            raise RecurrenceLengthError(f"index {n} > stored {self.N}")
        if self.is_discrete:
            if int(t) != t:
                raise ValueError("discrete-time decay needs an integer time")
            t = int(t)
            return tuple(self.values[k] ** t for k in range(n + 1))
        return tuple(math.exp(-float(self.values[k]) * float(t)) for k in range(n + 1))


@dataclass(frozen=True)
class Support:
    """Support of the stationary law: an interval, the whole line, or points."""

    kind: str  # "interval" | "unbounded" | "points"
    lower: float = -math.inf
    upper: float = math.inf
    points: tuple = ()
    weights: tuple = ()

    @property
    def bounded(self) -> bool:
        return self.kind in ("interval", "points")

    @property
    def cardinality(self) -> float:
        return len(self.points) if self.kind == "points" else math.inf

    def contains(self, x, tol: float = 1e-9) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "unbounded":
            return np.isfinite(x)
        if self.kind == "interval":
            return (x >= self.lower - tol) & (x <= self.upper + tol)
        pts = np.asarray([float(p) for p in self.points])
        return np.any(np.abs(x[..., None] - pts) <= tol, axis=-1)

    def to_dict(self) -> dict:
        if self.kind == "points":
            return {"kind": "points", "points": [number_to_json(p) for p in self.points],
                    "weights": [number_to_json(w) for w in self.weights]}
        if self.kind == "interval":
            return {"kind": "interval", "lower": self.lower, "upper": self.upper}
        return {"kind": "unbounded"}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Support":
        kind = d.get("kind", "unbounded")
        if kind == "points":
            pts = tuple(parse_number(p) for p in d["points"])
            w = tuple(parse_number(p) for p in d.get("weights", ()))
            return cls("points", points=pts, weights=w)
        if kind == "interval":
            return cls("interval", float(d["lower"]), float(d["upper"]))
        return cls("unbounded")


@dataclass(frozen=True)
class ProcessSpec:
    """The pair ``(alpha_n, p_n)`` plus what is needed to simulate it.

    ``recurrence`` fixes the monic orthogonal family of the marginal and
    ``indices`` the decay of ``E(p_n(X_t) | X_s) = exp(-alpha_n (t-s)) p_n(X_s)``.
    """

    name: str
    recurrence: ThreeTermRecurrence
    indices: CorrelationIndices
    support: Support = Support("unbounded")
    params: Mapping[str, Any] = field(default_factory=dict, compare=False)

    __hash__ = None

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise InvalidSpec(problems)

    def violations(self) -> list[str]:
        out = list(self.indices.violations())
        if self.recurrence.length < self.indices.N:
            out.append(
                f"recurrence length {self.recurrence.length} < number of indices {self.indices.N}"
            )
        if self.support.kind == "points":
            v = len(self.support.points)
            if self.indices.N > v - 1:
                out.append(f"{v}-point support admits at most {v - 1} nontrivial indices")
        if not self.indices.is_discrete:
            vals = self.indices.values
            seen: dict = {}
            for n in range(1, len(vals)):
                seen.setdefault(vals[n], []).append(n)
            dup = [ns for ns in seen.values() if len(ns) > 1]
            if dup:
                out.append(f"repeated correlation indices at degrees {dup} (not diagonalizable)")
        return out

    @property
    def max_degree(self) -> int:
        """Largest ``n`` for which both ``p_n`` and ``alpha_n`` are known."""
        return min(self.recurrence.length, self.indices.N)

    @property
    def time_kind(self) -> str:
        return self.indices.time_kind

    @property
    def exact(self) -> bool:
        return self.recurrence.exact and self.indices.exact

    def check_degree(self, n: int) -> None:
        if n < 0 or n > self.max_degree:
            raise RecurrenceLengthError(f"degree {n} outside 0..{self.max_degree} for {self.name}")

    def moments(self, N: int) -> MomentSequence:
        """Stationary moments ``m_0 .. m_N``.

        A weighted point support gives every order; otherwise the recurrence
        limits ``N`` to twice its length.
        """
        sup = self.support
        if sup.kind == "points" and sup.weights:
            return MomentSequence(tuple(sum(w * x ** k for x, w in zip(sup.points, sup.weights))
                                        for k in range(N + 1)))
        return recurrence_to_moments(self.recurrence, N)

    def norms(self, N: int | None = None) -> tuple:
        return self.recurrence.norms(self.max_degree if N is None else N)

    def alpha(self, n: int):
        return self.indices.values[n]

    def to_dict(self) -> dict:
        key = "rho" if self.indices.is_discrete else "alpha"
        d = {
            "name": self.name,
            "time_kind": self.time_kind,
            key: [number_to_json(v) for v in self.indices.values],
            "recurrence": self.recurrence.to_dict(),
            "support": self.support.to_dict(),
        }
        if self.params:
            d["builtin"] = {"kind": self.name,
                            "params": {k: _param_json(v) for k, v in self.params.items()}}
        return d


def _param_json(v):
    if isinstance(v, (list, tuple)):
        return [number_to_json(x) for x in v]
    return number_to_json(v)


def indices_from_sequence(values: Sequence, time_kind: str = CONTINUOUS) -> CorrelationIndices:
    vals = [parse_number(v) for v in values]
    exact = all_exact(vals)
    return CorrelationIndices(tuple(parse_number(v, exact) for v in vals), time_kind)


def harness_indices(alpha, N: int, time_kind: str = CONTINUOUS) -> CorrelationIndices:
    """``alpha_n = n alpha`` (or ``rho_n = rho^n`` in discrete time)."""
    if time_kind == DISCRETE:
        return CorrelationIndices(tuple(alpha ** n for n in range(N + 1)), DISCRETE)
    zero = 0 * alpha
    return CorrelationIndices(tuple(zero + n * alpha for n in range(N + 1)), CONTINUOUS)

