import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kraichnan.inequalities import (
    SUITES,
    InequalityError,
    TestFunction,
    check_nonradial,
    check_weighted_nash,
    check_weighted_poincare,
    nash_exponent,
    nonradial_nash_exponent,
    run_suite,
)

COS1 = TestFunction.from_cosines({(1, 0): 1.0})


def test_exponent_identities():
    assert nash_exponent(2, 0.5) == 2 / 3
    assert nonradial_nash_exponent(0.5) == 0.25
    for beta in np.linspace(0.1, 0.9, 9):
        assert nash_exponent(2, beta) == 2 / (4 - 2 * beta)
    assert nash_exponent(2, 0.0) == pytest.approx(2 / 4)


def test_evaluate_matches_closed_form():
    g = TestFunction.from_cosines({(1, 0): 1.0, (2, -1): 0.5})
    f, fx, fy, X, Y, h = g.evaluate(32)
    np.testing.assert_allclose(f, np.cos(X) + 0.5 * np.cos(2 * X - Y), atol=1e-13)
    np.testing.assert_allclose(fx, -np.sin(X) - np.sin(2 * X - Y), atol=1e-13)
    np.testing.assert_allclose(fy, 0.5 * np.sin(2 * X - Y), atol=1e-13)
    # midpoint nodes avoid the singular axes
    assert np.abs(X).min() > 0 and np.abs(Y).min() > 0


def test_poincare_cosine_closed_form():
    # ||cos x||^2 = 2 pi^2 ; || |x| sin x ||^2 = int x^2 sin^2 x + y^2 sin^2 x
    r = check_weighted_poincare(COS1, 256)
    num = 2 * np.pi**2
    den = 2 * np.pi * (np.pi**3 / 3 - np.pi / 2) + (2 * np.pi**3 / 3) * np.pi
    assert r == pytest.approx(np.sqrt(num / den), rel=1e-4)


@pytest.mark.parametrize("check", [
    lambda g, m: check_weighted_poincare(g, m),
    lambda g, m: check_weighted_nash(g, 0.5, m),
    lambda g, m: check_nonradial(g, 0.0, "poincare", m),
    lambda g, m: check_nonradial(g, 0.5, "nash", m),
])
def test_cosine_stable_under_doubling(check):
    a, b = check(COS1, 64), check(COS1, 128)
    assert np.isfinite(a) and a > 0
    assert abs(a - b) / b < 0.01


def test_two_mode_finite():
    g = TestFunction.from_cosines({(1, 0): 1.0, (2, 0): 1.0})
    a, b = check_weighted_poincare(g, 64), check_weighted_poincare(g, 128)
    assert np.isfinite(a) and abs(a - b) / b < 0.01


def test_gamma_zero_is_classical():
    f, fx, fy, X, Y, h = COS1.evaluate(128)
    l2 = np.sqrt(np.sum(f**2) * h * h)
    mixed = np.sqrt(np.sum(fy**2) * h * h) + np.sqrt(np.sum(fx**2) * h * h)
    assert check_nonradial(COS1, 0.0, "poincare", 128) == pytest.approx(l2 / mixed, rel=1e-12)
    assert l2 / mixed == pytest.approx(1.0, rel=1e-10)


def test_nash_beta_sweep_continuous():
    g = TestFunction.random(4, np.random.default_rng(0))
    vals = np.array([check_weighted_nash(g, b, 64) for b in np.linspace(0.1, 0.9, 9)])
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)
    assert np.abs(np.diff(vals)).max() < 0.2 * vals.max()


def test_rejections():
    with pytest.raises(InequalityError):
        check_weighted_poincare(TestFunction(np.zeros((3, 3))), 32)
    const = TestFunction.from_cosines({(0, 0): 1.0}, degree=1, mean_zero=False)
    with pytest.raises(InequalityError):
        check_weighted_poincare(const, 32)
    with pytest.raises(InequalityError):
        check_weighted_poincare(TestFunction.random(8, np.random.default_rng(0)), 16)
    with pytest.raises(InequalityError):
        check_weighted_nash(COS1, 1.0, 32)
    with pytest.raises(InequalityError):
        check_nonradial(COS1, 1.0, "poincare", 32)
    with pytest.raises(InequalityError):
        check_nonradial(COS1, 0.5, "lq", 32, q=5.0)
    with pytest.raises(InequalityError):
        check_nonradial(COS1, 0.5, "sobolev", 32)


def test_mean_zero_flag():
    g = TestFunction.random(3, np.random.default_rng(1))
    assert g.coeffs[3, 3] == 0
    h = TestFunction.random(3, np.random.default_rng(1), mean_zero=False)
    assert h.coeffs[3, 3] != 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.sampled_from([2.0, -3.0, 0.01, 17.5]))
def test_scaling_invariance(seed, lam):
    g = TestFunction.random(3, np.random.default_rng(seed))
    s = TestFunction(lam * g.coeffs)
    for fn in (lambda t: check_weighted_poincare(t, 24),
               lambda t: check_weighted_nash(t, 0.3, 24),
               lambda t: check_nonradial(t, 0.5, "poincare", 24),
               lambda t: check_nonradial(t, 0.5, "nash", 24),
               lambda t: check_nonradial(t, 0.5, "lq", 24, 3.0)):
        assert fn(s) == pytest.approx(fn(g), rel=1e-10)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_quadrature_convergence(seed):
    g = TestFunction.random(4, np.random.default_rng(seed))
    for suite in ("poincare", "nash"):
        a, b = check_nonradial(g, 0.5, suite, 32), check_nonradial(g, 0.5, suite, 64)
        assert abs(a - b) / b < 0.01
    a, b = check_weighted_poincare(g, 32), check_weighted_poincare(g, 64)
    assert abs(a - b) / b < 0.01


def test_run_suite_single_matches_check():
    rep = run_suite("weighted_poincare", n_samples=1, degree=3, seed=5)
    g = TestFunction.random(3, np.random.default_rng(5))
    assert rep.max_ratio == pytest.approx(check_weighted_poincare(g, 24), rel=1e-14)


def test_run_suite_deterministic():
    a = run_suite("nonradial_nash", n_samples=20, degree=4, seed=9)
    b = run_suite("nonradial_nash", n_samples=20, degree=4, seed=9)
    assert a.to_json(with_ratios=True) == b.to_json(with_ratios=True)
    data = json.loads(a.to_json())
    assert {"suite", "samples", "max_ratio", "median_ratio", "refinement_delta"} <= set(data)


@pytest.mark.parametrize("suite", SUITES)
def test_suites_small_batch(suite):
    rep = run_suite(suite, n_samples=30, degree=4, seed=0)
    assert np.isfinite(rep.max_ratio) and rep.max_ratio > 0
    assert rep.refinement_delta < 0.05
    assert rep.median_ratio <= rep.max_ratio


def test_run_suite_errors():
    with pytest.raises(InequalityError):
        run_suite("weighted_poincare", n_samples=0)
    with pytest.raises(InequalityError):
        run_suite("hardy", n_samples=1)
