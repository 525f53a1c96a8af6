"""Helpers shared by the exact (rational) and floating-point code paths.

Small-degree oracles run on :class:`fractions.Fraction`; everything else is
double precision.  Functions here accept either and never silently mix them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number
from typing import Iterable, Sequence

import numpy as np


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def all_exact(values: Iterable) -> bool:
    return all(is_exact(v) for v in values)


def parse_number(v, exact: bool | None = None):
    """Parse a JSON scalar (number or ``"p/q"`` string) into a number.

    Strings are read as rationals.  ``exact=False`` forces a float.
    """
    if isinstance(v, str):
        v = Fraction(v)
    elif isinstance(v, bool) or not isinstance(v, Number):
        raise TypeError(f"not a number: {v!r}")
    if exact is False:
        return float(v)
    if exact is True and not is_exact(v):
        return Fraction(v)
    return v


def number_to_json(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(v)


def to_array(rows, exact: bool) -> np.ndarray:
    if exact:
        return np.array(rows, dtype=object)
    return np.asarray(rows, dtype=float)


def eye(n: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.full((n, n), Fraction(0), dtype=object)
        for i in range(n):
            out[i, i] = Fraction(1)
        return out
    return np.eye(n)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape)


def lower_inverse(L: np.ndarray) -> np.ndarray:
    """Inverse of a lower-triangular matrix by forward substitution.

    Works for float and object (Fraction) arrays alike.
    """
    n = L.shape[0]
    exact = L.dtype == object
    inv = zeros((n, n), exact)
    for j in range(n):
        if L[j, j] == 0:
            raise ZeroDivisionError("singular triangular matrix")
        inv[j, j] = 1 / L[j, j] if not exact else Fraction(1) / L[j, j]
        for i in range(j + 1, n):
            acc = 0
            for k in range(j, i):
                acc += L[i, k] * inv[k, j]
            inv[i, j] = -acc / L[i, i]
    return inv


def binom(n: int, k: int) -> int:
    return math.comb(n, k)


def max_abs(values) -> float:
    arr = np.asarray(values, dtype=object).ravel()
    if arr.size == 0:
        return 0.0
    return float(max(abs(v) for v in arr))


def fmt17(x) -> str:
    """Round-trip-exact text for a double."""
    return format(float(x), ".17g")


def as_float_tuple(values: Sequence) -> tuple[float, ...]:
    return tuple(float(v) for v in values)
