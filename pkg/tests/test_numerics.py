import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from passage_lab.numerics import (
    ConvergenceError,
    QuadSpec,
    gauss_legendre_panels,
    integrate,
    integrate_log,
    integrate_strict,
    std_normal_cdf,
    std_normal_pdf,
)

finite = st.floats(min_value=-30, max_value=30, allow_nan=False)


def test_pdf_values():
    assert std_normal_pdf(0) == pytest.approx(0.3989422804, abs=1e-10)
    assert std_normal_pdf(1) == pytest.approx(0.2419707245, abs=1e-10)
    assert std_normal_pdf(-1) == std_normal_pdf(1)


def test_cdf_values_against_mpmath():
    assert std_normal_cdf(0) == 0.5
    assert std_normal_cdf(1) == pytest.approx(0.8413447461, abs=1e-10)
    assert std_normal_cdf(-1) == pytest.approx(0.1586552539, abs=1e-10)
    for z in np.linspace(-8, 8, 161):
        assert abs(std_normal_cdf(z) - float(mp.ncdf(z))) <= 1e-15


def test_cdf_deep_left_tail_relative_accuracy():
    for z in (-10.0, -20.0, -30.0):
        assert std_normal_cdf(z) == pytest.approx(float(mp.ncdf(z)), rel=1e-13)


@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_non_finite_rejected(bad):
    with pytest.raises(ValueError):
        std_normal_pdf(bad)
    with pytest.raises(ValueError):
        std_normal_cdf(bad)


def test_cdf_complement_symmetry():
    for z in np.arange(0.1, 5.01, 0.1):
        assert std_normal_cdf(z) + std_normal_cdf(-z) == pytest.approx(1.0, abs=1e-12)


@given(st.lists(finite, min_size=2, max_size=40))
def test_cdf_monotone(zs):
    zs = sorted(zs)
    vals = [std_normal_cdf(z) for z in zs]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert all(0.0 <= v <= 1.0 for v in vals)


@given(finite)
def test_pdf_positive_and_even(z):
    if abs(z) < 38:
        assert std_normal_pdf(z) > 0
    assert std_normal_pdf(z) == std_normal_pdf(-z)


def test_quadspec_validation():
    with pytest.raises(ValueError):
        QuadSpec(abs_tol=0)
    with pytest.raises(ValueError):
        QuadSpec(rel_tol=-1)
    with pytest.raises(ValueError):
        QuadSpec(max_subdivisions=0)


def test_arcsine_both_endpoints_singular():
    spec = QuadSpec(singular_left=True, singular_right=True)
    r = integrate(lambda u: 1.0 / (math.pi * math.sqrt(u * (1 - u))), 0.0, 1.0, spec)
    assert r.converged
    assert r.value == pytest.approx(1.0, abs=1e-9)


def test_exponential_half_line():
    r = integrate(lambda t: math.exp(-t), 0.0, math.inf)
    assert r.converged
    assert r.value == pytest.approx(1.0, abs=1e-9)


def test_inverse_gaussian_normalizes():
    def f(s):
        return std_normal_pdf(1.0 / math.sqrt(s)) / s**1.5

    r = integrate(f, 0.0, math.inf, QuadSpec(rel_tol=1e-10))
    assert r.converged
    assert r.value == pytest.approx(1.0, abs=1e-8)


def test_left_singularity_substitution():
    r = integrate(lambda t: 1.0 / math.sqrt(t - 2.0), 2.0, 6.0, QuadSpec(singular_left=True))
    assert r.value == pytest.approx(4.0, abs=1e-10)
    r = integrate(lambda t: 1.0 / math.sqrt(6.0 - t), 2.0, 6.0, QuadSpec(singular_right=True))
    assert r.value == pytest.approx(4.0, abs=1e-10)


def test_reversed_and_negative_half_line():
    fwd = integrate(math.exp, -math.inf, 0.0).value
    assert fwd == pytest.approx(1.0, abs=1e-9)
    assert integrate(lambda t: t * t, 1.0, 0.0).value == pytest.approx(-1.0 / 3.0)
    assert integrate(lambda t: math.exp(-t * t), -math.inf, math.inf).value == pytest.approx(math.sqrt(math.pi))


def test_converged_implies_error_within_tolerance():
    spec = QuadSpec()
    r = integrate(lambda t: math.exp(-t) * math.sin(t) ** 2, 0.0, math.inf, spec)
    assert r.converged
    assert r.error_estimate <= max(spec.abs_tol, spec.rel_tol * abs(r.value))


def test_non_convergence_is_reported_not_silent():
    spec = QuadSpec(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=1)
    r = integrate(lambda t: math.sin(1.0 / t), 1e-4, 1.0, spec)
    assert not r.converged
    with pytest.raises(ConvergenceError) as info:
        integrate_strict(lambda t: math.sin(1.0 / t), 1e-4, 1.0, spec, what="oscillatory test")
    assert info.value.result is not None


@given(
    st.floats(min_value=-3, max_value=3),
    st.floats(min_value=-3, max_value=3),
    st.floats(min_value=0.1, max_value=5),
)
def test_linearity(alpha, beta, hi):
    f = lambda t: math.exp(-t) * (1 + t)
    g = lambda t: math.cos(t) ** 2
    lhs = integrate(lambda t: alpha * f(t) + beta * g(t), 0.0, hi)
    rf, rg = integrate(f, 0.0, hi), integrate(g, 0.0, hi)
    tol = lhs.error_estimate + abs(alpha) * rf.error_estimate + abs(beta) * rg.error_estimate + 1e-12
    assert abs(lhs.value - (alpha * rf.value + beta * rg.value)) <= tol


@given(st.floats(min_value=0.01, max_value=0.99))
def test_splitting_invariance(frac):
    spec = QuadSpec(singular_left=True, singular_right=True)
    f = lambda u: 1.0 / math.sqrt(u * (1 - u))
    whole = integrate(f, 0.0, 1.0, spec)
    left = integrate(f, 0.0, frac, QuadSpec(singular_left=True))
    right = integrate(f, frac, 1.0, QuadSpec(singular_right=True))
    assert abs(whole.value - left.value - right.value) <= whole.error_estimate + left.error_estimate + right.error_estimate + 1e-12


def test_integrate_log_spans_decades():
    # int_0^inf dt / (sqrt(t) (1 + t)) = pi
    assert integrate_log(lambda t: 1.0 / (math.sqrt(t) * (1.0 + t))) == pytest.approx(math.pi, rel=1e-10)
    with pytest.raises(ValueError):
        integrate_log(lambda t: 1.0, center=0.0)


def test_gauss_legendre_panels_exact_for_polynomials():
    nodes, weights = gauss_legendre_panels(np.array([0.0, 0.5, 2.0, 3.0]), order=8)
    assert np.dot(weights, nodes**7) == pytest.approx(3.0**8 / 8)
