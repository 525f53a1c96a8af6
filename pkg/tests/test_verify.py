import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from smpr.errors import InsufficientPaths
from smpr.processes import finite_chain_spec, ou_spec, q_ou_spec, two_point_spec
from smpr.verify import (
    MIN_PATHS,
    conditional_moment_test,
    harness_regression_test,
    reversed_martingale_test,
)


def test_too_few_paths():
    with pytest.raises(InsufficientPaths):
        conditional_moment_test(ou_spec(), 1, 0.0, 1.0, paths=MIN_PATHS - 1)
    # exact enumeration does not sample
    conditional_moment_test(two_point_spec(), 1, 0.0, 1.0, paths=1, exact=True)


def test_bad_times():
    with pytest.raises(ValueError):
        conditional_moment_test(ou_spec(), 1, 1.0, 0.5, paths=MIN_PATHS)
    with pytest.raises(ValueError):
        harness_regression_test(ou_spec(), 0.0, 2.0, 1.0, paths=MIN_PATHS)


def test_equal_times_is_identity():
    rep = conditional_moment_test(ou_spec(), 2, 0.5, 0.5, paths=MIN_PATHS, seed=1)
    assert rep.target == (0.0, 0.0, 1.0)
    assert all(v == 0 for v in rep.standard_error)
    assert rep.passed()


def test_exact_two_point():
    rep = conditional_moment_test(two_point_spec(1), 1, 0.0, 0.5, exact=True)
    assert rep.estimate[1] == pytest.approx(math.exp(-0.5), abs=1e-14)
    assert rep.z == (0.0, 0.0) and rep.samples == 0
    rev = reversed_martingale_test(two_point_spec(1), 1, 0.0, 0.5, exact=True)
    assert rev.z == (0.0, 0.0)
    h = harness_regression_test(two_point_spec(1), 0.0, math.log(2), 2 * math.log(2), exact=True)
    assert h.labels[h.headline[0]] == "h1(Xs)h0(Xu)"
    assert h.estimate[h.headline[0]] == pytest.approx(0.4, abs=1e-14)
    assert h.passed()


def test_exact_detects_non_harness_chain():
    spec = finite_chain_spec((-1, 0, 1), (F(1, 4), F(1, 2), F(1, 4)), (3, 1))
    rep = harness_regression_test(spec, 0.0, 0.5, 1.0, exact=True)
    assert not rep.passed() and math.isinf(rep.max_abs_z)
    # the one-time identities still hold exactly
    assert conditional_moment_test(spec, 2, 0.0, 0.7, exact=True).passed()


def test_mc_detects_non_harness_chain():
    spec = finite_chain_spec((-1, 0, 1), (F(1, 4), F(1, 2), F(1, 4)), (3, 1))
    rep = harness_regression_test(spec, 0.0, 0.5, 1.0, paths=100_000, seed=3)
    assert rep.max_abs_z > 5


@pytest.mark.parametrize("spec", [ou_spec(1), q_ou_spec(1, 0.5), two_point_spec(1)], ids=["ou", "q_ou", "two"])
def test_mc_conditional_and_harness_pass(spec):
    n = min(2, spec.max_degree)
    assert conditional_moment_test(spec, n, 0.0, 0.6, paths=20_000, seed=5).passed(4.0)
    assert reversed_martingale_test(spec, n, 0.0, 0.6, paths=20_000, seed=6).passed(4.0)
    assert harness_regression_test(spec, 0.0, 0.4, 1.1, paths=20_000, seed=7).passed(4.0)


def test_reports_are_deterministic_and_serializable():
    a = conditional_moment_test(q_ou_spec(1, 0.5), 2, 0.0, 1.0, paths=5_000, seed=12)
    b = conditional_moment_test(q_ou_spec(1, 0.5), 2, 0.0, 1.0, paths=5_000, seed=12, threads=3)
    assert a == b
    doc = a.to_dict()
    assert doc["schema_version"] == 1 and doc["seed"] == 12
    json.dumps(doc)


def test_z_scores_are_calibrated():
    zs = []
    for seed in range(200):
        rep = conditional_moment_test(ou_spec(1), 1, 0.0, 0.5, paths=2_000, seed=seed)
        zs.extend(rep.z)
    zs = np.asarray(zs)
    assert np.mean(np.abs(zs) > 3) <= 0.01
    # roughly standard normal overall
    assert abs(np.mean(zs)) < 0.15 and 0.8 < np.std(zs) < 1.2
