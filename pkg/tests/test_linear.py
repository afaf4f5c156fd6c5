import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from passage_lab.linear import (
    PassageProblem,
    first_passage_cdf,
    first_passage_density,
    first_passage_law,
    first_passage_mean,
    hit_probability,
    last_passage_cdf,
    last_passage_density,
    last_passage_mass,
    never_return_probability,
    no_zero_probability,
    salminen_density_numeric,
)
from passage_lab.numerics import integrate

mp.mp.dps = 30

slopes = st.floats(min_value=-3, max_value=3, allow_nan=False)
horizons = st.floats(min_value=0.05, max_value=20)
fractions = st.floats(min_value=0.01, max_value=0.99)
coords = st.floats(min_value=-5, max_value=5)


def mp_bachelier_levy(x, a, b, t):
    x, a, b, t = map(mp.mpf, (x, a, b, t))
    if x > a:  # mirror image: start below the line
        x, a, b = -x, -a, -b
    d = a - x
    return 1 - mp.ncdf(d / mp.sqrt(t) + b * mp.sqrt(t)) + mp.exp(-2 * b * d) * mp.ncdf(b * mp.sqrt(t) - d / mp.sqrt(t))


# --- problem type -------------------------------------------------------------


def test_problem_validation_and_predicates():
    with pytest.raises(ValueError):
        PassageProblem(math.nan, 1.0, 0.0)
    p = PassageProblem(0.0, 1.0, -1.0)
    assert p.recurrent and p.distance == 1.0
    assert not PassageProblem(0.0, 1.0, 0.5).recurrent
    assert PassageProblem(2.0, 1.0, 0.5).recurrent
    assert PassageProblem.from_drift(1.0, 0.3) == PassageProblem(1.0, 0.0, -0.3)
    with pytest.raises(ValueError):
        PassageProblem(1.0, 1.0, 0.0).require_off_boundary()
    with pytest.raises(ValueError):
        PassageProblem(0.0, 1.0, 1.0).require_recurrent()


# --- first passage ------------------------------------------------------------


def test_density_examples():
    assert first_passage_density(PassageProblem(0, 1, 0), 1.0) == pytest.approx(0.2419707245, abs=1e-10)
    assert first_passage_density(PassageProblem(0, 1, -1), 1.0) == pytest.approx(0.3989422804, abs=1e-10)
    with pytest.raises(ValueError):
        first_passage_density(PassageProblem(0, 1, 0), 0.0)


def test_density_normalizes_in_recurrent_case():
    p = PassageProblem(0, 1, -1)
    r = integrate(lambda t: first_passage_density(p, t), 0.0, math.inf)
    assert r.value == pytest.approx(1.0, abs=1e-8)


def test_cdf_examples():
    assert first_passage_cdf(PassageProblem(0, 1, 0), 1.0) == pytest.approx(0.3173105079, abs=1e-10)
    assert first_passage_cdf(PassageProblem(0, 1, 0.5), math.inf) == pytest.approx(math.exp(-1))
    assert first_passage_cdf(PassageProblem(0, 1, -1), math.inf) == 1.0
    assert first_passage_cdf(PassageProblem(0, 1, -1), 0.0) == 0.0
    with pytest.raises(ValueError):
        first_passage_cdf(PassageProblem(0, 1, -1), -1.0)


@given(coords, coords, slopes, st.floats(min_value=1e-3, max_value=50))
def test_cdf_against_mpmath(x, a, b, t):
    assume(abs(a - x) > 1e-3)
    p = PassageProblem(x, a, b)
    assert first_passage_cdf(p, t) == pytest.approx(float(mp_bachelier_levy(x, a, b, t)), abs=1e-12)


@given(coords, slopes)
def test_cdf_nondecreasing_and_limit(x, b):
    assume(abs(1 - x) > 1e-2)
    p = PassageProblem(x, 1.0, b)
    vals = [first_passage_cdf(p, t) for t in np.geomspace(1e-3, 1e4, 60)]
    assert all(v2 >= v1 - 1e-15 for v1, v2 in zip(vals, vals[1:]))
    assert first_passage_cdf(p, 1e14) == pytest.approx(hit_probability(p), abs=1e-5)


def test_cdf_derivative_is_density():
    p = PassageProblem(0.0, 1.0, -0.7)
    for t in np.linspace(0.1, 6.0, 30):
        h = 1e-5
        fd = (first_passage_cdf(p, t + h) - first_passage_cdf(p, t - h)) / (2 * h)
        assert fd == pytest.approx(first_passage_density(p, t), abs=1e-6)


def test_mean_and_hit_probability():
    assert first_passage_mean(PassageProblem(0, 1, -1)) == 1.0
    assert first_passage_mean(PassageProblem(0, 1, -0.5)) == 2.0
    assert first_passage_mean(PassageProblem(0, 1, 0)) == math.inf
    with pytest.raises(ValueError):
        first_passage_mean(PassageProblem(0, 1, 1))
    assert hit_probability(PassageProblem(0, 1, 1)) == pytest.approx(math.exp(-2))
    assert hit_probability(PassageProblem(0, 1, -2)) == 1.0
    assert hit_probability(PassageProblem(2, 1, -1)) == pytest.approx(math.exp(-2))


def test_defective_law_atom():
    law = first_passage_law(PassageProblem(0, 1, 0.5))
    assert law.atom_at_infinity == pytest.approx(1 - math.exp(-1))
    assert law.cdf(1e8) == pytest.approx(1 - law.atom_at_infinity, abs=1e-6)


@given(coords, coords, slopes, st.floats(min_value=1e-2, max_value=20))
def test_reflection_invariance(x, a, b, t):
    assume(abs(a - x) > 1e-3)
    p = PassageProblem(x, a, b)
    q = p.reflected()
    assert first_passage_density(p, t) == pytest.approx(first_passage_density(q, t), rel=1e-12, abs=1e-300)
    assert first_passage_cdf(p, t) == pytest.approx(first_passage_cdf(q, t), rel=1e-12, abs=1e-300)
    assert hit_probability(p) == pytest.approx(hit_probability(q), rel=1e-12)


# --- last passage -------------------------------------------------------------


def mp_psi(b, t, u):
    b, t, u = map(mp.mpf, (b, t, u))
    v = t - u
    bracket = mp.exp(-b * b * v / 2) + b / 2 * mp.sqrt(2 * mp.pi * v) * (2 * mp.ncdf(b * mp.sqrt(v)) - 1)
    return mp.exp(-b * b * u / 2) / (mp.pi * mp.sqrt(u * v)) * bracket


def test_last_passage_examples():
    assert last_passage_density(0.0, 1.0, 0.5) == pytest.approx(2 / math.pi, rel=1e-14)
    # frozen from a 30-digit mpmath evaluation of the closed form
    assert last_passage_density(-1.0, 2.0, 1.0) == pytest.approx(0.2822905341, abs=1e-10)
    assert float(mp_psi(-1, 2, 1)) == pytest.approx(0.2822905341, abs=1e-10)
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            last_passage_density(0.0, 1.0, bad)


@given(slopes, horizons, fractions)
def test_last_passage_against_mpmath(b, t, frac):
    u = frac * t
    assert last_passage_density(b, t, u) == pytest.approx(float(mp_psi(b, t, u)), rel=1e-11)


@given(slopes, horizons, fractions)
def test_psi_even_in_slope(b, t, frac):
    u = frac * t
    assert last_passage_density(b, t, u) == pytest.approx(last_passage_density(-b, t, u), rel=1e-14)


@given(horizons, fractions)
def test_arcsine_reduction(t, frac):
    u = frac * t
    assert last_passage_density(0.0, t, u) == pytest.approx(1 / (math.pi * math.sqrt(u * (t - u))), rel=1e-13)


@pytest.mark.parametrize("b,t", [(-2.0, 0.5), (-1.0, 2.0), (0.5, 5.0), (2.5, 1.0)])
def test_psi_nonnegative_on_fine_grid(b, t):
    u = np.linspace(0, t, 1002)[1:-1]
    assert all(last_passage_density(b, t, ui) >= 0 for ui in u)


@pytest.mark.parametrize("b,t,u", [(0.0, 1.0, 0.5), (-1.0, 2.0, 1.0), (-0.5, 4.0, 1.0), (1.5, 3.0, 0.2)])
def test_integral_form_matches_closed_form(b, t, u):
    assert salminen_density_numeric(b, t, u) == pytest.approx(last_passage_density(b, t, u), abs=1e-6)


@given(st.floats(min_value=-2, max_value=2), st.floats(min_value=0.2, max_value=5), st.floats(min_value=0.05, max_value=0.95))
def test_integral_form_property(b, t, frac):
    u = frac * t
    assert abs(salminen_density_numeric(b, t, u) - last_passage_density(b, t, u)) <= 1e-6


@pytest.mark.parametrize("b", [0.0, -0.3, -1.0, 2.0, -4.0])
def test_last_passage_mass_reported(b):
    # Not an invariant claimed anywhere; observed to hold numerically.
    assert last_passage_mass(b, 3.0) == pytest.approx(1.0, abs=1e-9)


def test_last_passage_cdf_against_direct_quadrature():
    b, t, u = -1.0, 2.0, 1.0
    direct = mp.quad(lambda y: mp_psi(b, t, y), [0, u])
    assert last_passage_cdf(b, t, u) == pytest.approx(float(direct), abs=1e-10)


# --- no-zero probabilities ----------------------------------------------------


def test_no_zero_examples():
    assert no_zero_probability(0.0, 1.0, 3.0) == pytest.approx(1 / 3, abs=1e-14)
    assert no_zero_probability(0.0, 2.0, 0.0) == 1.0
    assert no_zero_probability(-1.0, 1.0, 1e6) == pytest.approx(0.6826894921, abs=1e-3)
    with pytest.raises(ValueError):
        no_zero_probability(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        no_zero_probability(0.0, 1.0, -1.0)


@given(slopes, st.floats(min_value=0.1, max_value=10))
def test_no_zero_nonincreasing_in_gap(b, s):
    vals = [no_zero_probability(b, s, g) for g in np.geomspace(1e-3, 1e5, 12)]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(v2 <= v1 + 1e-12 for v1, v2 in zip(vals, vals[1:]))


@pytest.mark.parametrize("b", [-2.0, -1.0, -0.5, 0.7])
def test_no_zero_converges_to_never_return(b):
    assert no_zero_probability(b, 1.0, 1e6) == pytest.approx(never_return_probability(b, 1.0), abs=1e-3)
    # the closed-form switch beyond 1e8 * s is continuous with the quadrature
    assert no_zero_probability(b, 1.0, 1.01e8) == pytest.approx(never_return_probability(b, 1.0), abs=1e-6)


def test_never_return_examples():
    assert never_return_probability(0.0, 3.0) == 0.0
    assert never_return_probability(-1.0, 1.0) == pytest.approx(0.6826894921, abs=1e-10)
    assert never_return_probability(1.0, 1.0) == never_return_probability(-1.0, 1.0)
    assert never_return_probability(-2.0, 0.7) == pytest.approx(float(2 * (mp.ncdf(2 * mp.sqrt(0.7)) - 0.5)), abs=1e-15)
