import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite_e
from scipy import integrate, special

from smpr.errors import RecurrenceLengthError, UnboundedSupportError
from smpr.polycore import q_hermite_recurrence
from smpr.process_spec import CorrelationIndices, ProcessSpec, Support, harness_indices
from smpr.processes import mehler_kernel, ou_spec, q_mehler_series, q_ou_spec, two_point_spec
from smpr.semigroup import (
    HilbertSchmidtSum,
    KernelExpansion,
    L2Function,
    apply_generator,
    apply_Ut,
    feller_summability,
    hilbert_schmidt_sum,
    kernel_density,
    resolvent,
)

coeffs = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12).map(lambda c: L2Function(tuple(c)))
times = st.floats(0, 4, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(coeffs, times, times)
def test_semigroup_and_contraction(f, s, t):
    spec = q_ou_spec(1.3, 0.5, 16)
    both = apply_Ut(apply_Ut(f, spec, s), spec, t)
    once = apply_Ut(f, spec, s + t)
    assert np.allclose(both.coeffs, once.coeffs, rtol=1e-12, atol=1e-12)
    assert once.norm() <= f.norm() * (1 + 1e-15)


def test_ut_at_zero_and_negative_time():
    f = L2Function((1.0, -2.0, 0.5))
    assert apply_Ut(f, ou_spec(), 0).coeffs == f.coeffs
    with pytest.raises(ValueError):
        apply_Ut(f, ou_spec(), -1)


def test_generator_is_derivative_of_semigroup():
    spec = ou_spec(1, 10)
    f = L2Function((0.3, 1.0, -0.5, 0.2, 0.1))
    h = 1e-6
    fd = (np.asarray(apply_Ut(f, spec, h).coeffs) - np.asarray(f.coeffs)) / h
    assert np.allclose(fd, apply_generator(f, spec).coeffs, atol=1e-5)


def test_resolvent_is_laplace_transform():
    spec = q_ou_spec(0.7, 0.25, 10)
    f = L2Function((1.0, 0.5, -0.25, 2.0))
    lam = 1.5
    R = resolvent(f, spec, lam).coeffs
    for n, c in enumerate(f.coeffs):
        val, _ = integrate.quad(lambda t: math.exp(-lam * t) * apply_Ut(L2Function.basis(n, 3), spec, t).coeffs[n],
                                0, math.inf)
        assert R[n] == pytest.approx(c * val, rel=1e-9)
    # (lambda - G) R f = f
    back = np.asarray(lam * np.asarray(R)) - np.asarray(apply_generator(L2Function(R), spec).coeffs)
    assert np.allclose(back, f.coeffs, atol=1e-14)
    with pytest.raises(ValueError):
        resolvent(f, spec, 0.0)


def test_resolvent_needs_continuous_time_and_length():
    with pytest.raises(RecurrenceLengthError):
        apply_generator(L2Function.basis(5), two_point_spec())
    disc = ProcessSpec("d", q_hermite_recurrence(0.0, 3), CorrelationIndices((1, 0.5, 0.25, 0.1), "discrete"),
                       Support("interval", -2.0, 2.0))
    with pytest.raises(ValueError):
        resolvent(L2Function.basis(1), disc, 1.0)


def test_distance_from_identity():
    spec = ou_spec(2, 6)
    f = L2Function((0.0, 1.0, 1.0))
    d = (apply_Ut(f, spec, 0.5) - f).norm() ** 2
    assert d == pytest.approx((1 - math.exp(-1)) ** 2 + (1 - math.exp(-2)) ** 2, rel=1e-14)


def test_hilbert_schmidt_closed_form():
    hs = hilbert_schmidt_sum(harness_indices(1, 50), 1.0, 50)
    assert isinstance(hs, HilbertSchmidtSum)
    assert abs(hs.partial - hs.closed_form) <= 1e-12
    hs = hilbert_schmidt_sum(ou_spec(1, 80), math.log(2))
    assert hs.closed_form == pytest.approx(4 / 3, rel=1e-15)
    assert hilbert_schmidt_sum((0, 1, 5), 1.0).closed_form is None
    with pytest.raises(ValueError):
        hilbert_schmidt_sum(ou_spec(), 0.0)


def test_feller_checks():
    assert feller_summability(two_point_spec(1), 0.5).summable
    assert feller_summability(q_ou_spec(1, 0.5, 80), 0.5).summable
    with pytest.raises(UnboundedSupportError):
        feller_summability(ou_spec(), 1.0)
    # barely decaying indices on the semicircle family: sup|h_n| = n + 1, series diverges
    slow = CorrelationIndices(tuple(1e-3 * math.log1p(n) for n in range(81)))
    flat = ProcessSpec("flat", q_hermite_recurrence(0.0, 80), slow, Support("interval", -2.0, 2.0))
    assert not feller_summability(flat, 1.0).summable


def orthonormal_hermite(x, n):
    c = np.zeros(n + 1)
    c[n] = 1.0
    return hermite_e.hermeval(x, c) / math.sqrt(math.factorial(n))


@pytest.mark.parametrize("rho", [0.2, 0.4, 0.6])
def test_mehler_closed_form(rho):
    k = KernelExpansion(ou_spec(1, 80), -math.log(rho), 60)
    g = np.arange(-2, 2.0001, 0.25)
    X, Y = np.meshgrid(g, g, indexing="ij")
    val, err = kernel_density(k, X, Y)
    assert np.max(np.abs(val - mehler_kernel(rho, X, Y))) <= 1e-8
    assert np.all(err >= 0)
    # independent brute-force sum with numpy's Hermite_e
    brute = sum(rho ** n * orthonormal_hermite(X, n) * orthonormal_hermite(Y, n) for n in range(31))
    assert np.allclose(kernel_density(KernelExpansion(ou_spec(1, 80), -math.log(rho), 30), X, Y)[0], brute,
                       rtol=1e-10, atol=1e-12)


def test_kernel_symmetric_and_integrates_to_one():
    k = KernelExpansion(ou_spec(1, 80), 0.5, 60)
    x = np.linspace(-3, 3, 13)
    a, _ = kernel_density(k, x[:, None], x[None, :])
    assert np.array_equal(a, a.T)
    nodes, w = hermite_e.hermegauss(80)
    w = w / w.sum()
    for x0 in (-1.5, 0.0, 0.7):
        v, _ = kernel_density(k, x0, nodes)
        assert np.dot(w, v) == pytest.approx(1.0, abs=1e-12)


def test_q_zero_kernel_matches_chebyshev_oracle():
    rho = 0.5
    k = KernelExpansion(q_ou_spec(1, 0.0, 80), -math.log(rho), 60)
    x = np.linspace(-1.9, 1.9, 9)
    X, Y = np.meshgrid(x, x, indexing="ij")
    val, _ = kernel_density(k, X, Y)
    oracle = sum(rho ** n * special.eval_chebyu(n, X / 2) * special.eval_chebyu(n, Y / 2) for n in range(61))
    assert np.allclose(val, oracle, atol=1e-12)
    assert np.allclose(val, q_mehler_series(0.0, rho, X, Y, 60), atol=1e-12)


def test_q_mehler_positive_on_support():
    rho, q = 0.6, F(1, 2)
    edge = 2 / math.sqrt(1 - 0.5)
    x = np.linspace(-edge, edge, 41)
    K = q_mehler_series(q, rho, x[:, None], x[None, :], 80)
    assert np.all(K > 0)


def test_kernel_needs_positive_time():
    with pytest.raises(ValueError):
        KernelExpansion(ou_spec(), 0.0)
