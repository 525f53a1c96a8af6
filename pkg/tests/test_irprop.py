import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smpr.errors import InvalidSpec
from smpr.irprop import (
    CumulantSpec,
    MgfSeries,
    add_independent,
    bridge_is_levy,
    bridge_mgf,
    build_A1,
    build_W,
    increment_mgf,
    laguerre_mixture_decompose,
    levy_timechange_is_stationary,
    levy_timechange_mgf,
    mgf_series,
    moment_convolution,
    moments_of_mgf,
    ode_residual,
    series_div,
    series_exp,
    series_mul,
    stationary_moments,
)
from smpr.polycore import recurrence_to_moments, shifted_laguerre_recurrence

GAUSS = CumulantSpec((1, 0, -2))


def naive_exp_moments(deltas, N):
    """m_n = n! [y^n] sum_k S^k / k!  with  S = sum_j delta_j y^j / j!  (plain Taylor, no recursion)."""
    S = [F(0)] + [F(d) / math.factorial(j) for j, d in enumerate(deltas[:N], start=1)]
    S += [F(0)] * (N + 1 - len(S))
    total = [F(1)] + [F(0)] * N
    power = [F(1)] + [F(0)] * N
    for k in range(1, N + 1):
        nxt = [F(0)] * (N + 1)
        for i, a in enumerate(power):
            if a:
                for j in range(1, N + 1 - i):
                    nxt[i + j] += a * S[j]
        power = nxt
        total = [t + p / math.factorial(k) for t, p in zip(total, power)]
    return tuple(t * math.factorial(n) for n, t in enumerate(total))


def test_gaussian_moments():
    assert stationary_moments(GAUSS, 6).values == (1, 0, 1, 0, 3, 0, 15)
    assert moments_of_mgf(mgf_series(GAUSS, 6)).values == (1, 0, 1, 0, 3, 0, 15)
    W = build_W(GAUSS, 6)
    m = np.asarray(stationary_moments(GAUSS, 6).values, dtype=object)
    assert all(v == 0 for v in W.entries @ m)
    assert np.array_equal(W.raw, -W.entries)
    assert [W.raw[i, i] for i in range(7)] == list(range(7))


def test_skewed_example_and_deltas():
    cs = CumulantSpec((1, 0, -2, -3))
    assert cs.deltas() == (0, 1, 1)
    assert stationary_moments(cs, 3).values == (1, 0, 1, 1)
    assert cs.violations() == []


rational = st.fractions(-3, 3, max_denominator=9)


@settings(max_examples=20, deadline=None)
@given(st.fractions(F(1, 4), 4, max_denominator=9), st.lists(rational, min_size=8, max_size=8))
def test_generator_moments_equal_exp_series(d0, rest):
    cs = CumulantSpec((d0, *rest))
    m = stationary_moments(cs, 8).values
    assert m == moments_of_mgf(mgf_series(cs, 8)).values
    assert m == naive_exp_moments(cs.deltas(8), 8)
    W = build_W(cs, 8).entries
    assert all(v == 0 for v in W @ np.asarray(m, dtype=object))
    assert ode_residual(cs, 8) == 0


def test_exponential_oracles():
    # d_j = -j! gives delta_j = (j-1)!, the cumulants of Exp(1)
    expo = CumulantSpec(tuple([1] + [-math.factorial(j) for j in range(1, 9)]))
    assert stationary_moments(expo, 8).values == tuple(math.factorial(n) for n in range(9))
    centred = CumulantSpec(tuple([1, 0] + [-math.factorial(j) for j in range(2, 9)]))
    assert stationary_moments(centred, 8).values == recurrence_to_moments(shifted_laguerre_recurrence(4), 8).values


def test_violations():
    assert CumulantSpec((1, 0, 2)).violations()  # delta_2 < 0
    assert CumulantSpec((1, 0, 0, 1)).violations()  # delta_2 = 0 with delta_3 != 0
    assert any("degenerate" in v for v in CumulantSpec.from_deltas((0, 1, 1, 0, 1)).violations())
    assert any("inequality" in v for v in CumulantSpec.from_deltas((0, 1, 5, 1)).violations())
    bad = CumulantSpec.from_deltas((0, 1, 2, 1))  # |mu_1| = 2 > mu_2^(1/2) = 1
    assert any("inequality" in v for v in bad.violations())
    with pytest.raises(InvalidSpec):
        bad.validate()
    assert CumulantSpec.from_deltas((0, 1, F(1, 2), 1, F(1, 2), 1)).violations() == []
    with pytest.raises(InvalidSpec):
        CumulantSpec((0, 1))
    with pytest.raises(InvalidSpec):
        CumulantSpec(())


def test_add_independent_is_moment_convolution():
    a = CumulantSpec.from_deltas((F(1, 2), 1, F(1, 3)))
    b = CumulantSpec.from_deltas((F(-1, 2), 2, 0, 1))
    s = add_independent(a, b)
    assert stationary_moments(s, 6).values == moment_convolution(stationary_moments(a, 6),
                                                                 stationary_moments(b, 6)).values


def test_discrete_gaussian_is_stationary():
    rho = F(1, 2)
    v = 1 - rho * rho
    innov = CumulantSpec((1, 0, v, 0, 3 * v * v, 0, 15 * v ** 3), time_kind="discrete")
    m = stationary_moments(innov, 6, rho=rho)
    assert m.values == (1, 0, 1, 0, 3, 0, 15)
    A = build_A1(innov, 6, rho).entries
    assert list(A @ np.asarray(m.values, dtype=object)) == list(m.values)
    with pytest.raises(ValueError):
        build_A1(CumulantSpec((2, 0, 1)), 2, rho)


@pytest.mark.parametrize("tau", [0.25, 1.0, 3.0])
def test_increment_cumulants(tau):
    k = increment_mgf(GAUSS, tau, 4).kappa
    assert k[2] == pytest.approx(1 - math.exp(-2 * tau), rel=1e-14)
    assert k[1] == 0 and k[3] == 0 and k[4] == 0
    assert increment_mgf(GAUSS, tau, 2, rho=F(1, 2)).kappa == (0, 0, F(3, 4))


def test_bridge_cumulants_and_levy_detector():
    y, inc = bridge_mgf(GAUSS, 3.0, 1.0, 4)
    assert y.kappa[2] == pytest.approx(3.0) and inc.kappa[2] == pytest.approx(2.0)
    assert bridge_is_levy(GAUSS)
    with pytest.raises(ValueError):
        bridge_mgf(GAUSS, 1.0, 2.0)


@settings(max_examples=30, deadline=None)
@given(st.fractions(F(1, 10), 3, max_denominator=10), st.fractions(-2, 2, max_denominator=10).filter(lambda v: v != 0))
def test_nonzero_third_cumulant_is_not_levy(d2, d3):
    cs = CumulantSpec.from_deltas((0, d2, d3))
    assert not bridge_is_levy(cs)
    assert bridge_is_levy(CumulantSpec.from_deltas((0, d2)))


def test_levy_time_change():
    gauss_q = MgfSeries((0, 0, 1))
    k = levy_timechange_mgf(gauss_q, 2.0, 1.5).kappa
    assert k[2] == pytest.approx(2 - 2 * math.exp(-0.5), rel=1e-13)
    assert levy_timechange_is_stationary(gauss_q)
    assert not levy_timechange_is_stationary(MgfSeries((0, 0, 1, 1)))
    assert not levy_timechange_is_stationary(MgfSeries((0, 1, 0)))


@pytest.mark.parametrize("rho", [0.25, 0.5, 0.75])
def test_laguerre_mixture(rho):
    lm = laguerre_mixture_decompose(rho, 12)
    assert lm.residual <= 1e-14
    assert lm.point_weight + lm.exponential_weight == pytest.approx(1.0)
    # independent left side: numpy polynomial products truncated at order 12
    ex = np.array([(-(1 - rho)) ** n / math.factorial(n) for n in range(13)])
    lhs = np.convolve(np.convolve(ex, [1, -rho]), np.ones(13))[:13]
    assert np.allclose(lm.lhs, lhs, atol=1e-15)
    exact = laguerre_mixture_decompose(F(rho), 12)
    assert exact.residual == 0


def test_series_helpers():
    f = [F(1), F(2), F(3)]
    g = [F(1), F(-1)]
    assert series_div(series_mul(f, g, 4), g, 4)[:3] == f
    e = series_exp([F(0), F(1)], 6)
    assert e == [F(1, math.factorial(n)) for n in range(7)]
    with pytest.raises(ZeroDivisionError):
        series_div(f, [0, 1], 3)
