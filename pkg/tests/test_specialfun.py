import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from hyperconv.errors import DomainError
from hyperconv.quadrature import integrate_adaptive
from hyperconv.specialfun import (
    agm,
    beta_fn,
    elliptic_k,
    elliptic_k_complement,
    gauss_2f1,
    ln_gamma,
    sphere_area,
)


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (0.5, 0.5 * math.log(math.pi)), (5.0, math.log(24.0))])
def test_ln_gamma_examples(x, expected):
    assert ln_gamma(x) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_ln_gamma_matches_scipy_on_range():
    xs = np.geomspace(1e-3, 1e3, 400)
    ref = special.gammaln(xs)
    got = np.array([ln_gamma(x) for x in xs])
    # gammaln crosses zero at 1 and 2, so compare with an absolute floor there
    assert np.all(np.abs(got - ref) <= 1e-12 * np.maximum(np.abs(ref), 1.0))


def test_ln_gamma_recurrence():
    for x in np.linspace(0.01, 50, 500):
        assert ln_gamma(x + 1) == pytest.approx(ln_gamma(x) + math.log(x), rel=1e-12, abs=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_ln_gamma_domain(x):
    with pytest.raises(DomainError):
        ln_gamma(x)


def test_beta_examples():
    assert beta_fn(1, 1) == pytest.approx(1.0, rel=1e-14)
    assert beta_fn(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)


def test_beta_half_quarter_against_quadrature():
    # int_0^1 u^(-1/2) (1-u)^(-3/4) du, endpoint singularities declared
    val = integrate_adaptive(lambda u: u**-0.5 * (1 - u) ** -0.75, (-0.5, -0.75))
    assert beta_fn(0.5, 0.25) == pytest.approx(val, rel=1e-9)
    assert beta_fn(0.5, 0.25) == pytest.approx(float(mpmath.beta(0.5, 0.25)), rel=1e-13)


@pytest.mark.parametrize("a, b", [(0, 1), (1, -2), (-0.1, -0.1)])
def test_beta_domain(a, b):
    with pytest.raises(DomainError):
        beta_fn(a, b)


def test_2f1_examples():
    assert gauss_2f1(0.5, 0.5, 1, 0) == 1.0
    assert gauss_2f1(0.5, 0.5, 1, 0.25) == pytest.approx(2 / math.pi * elliptic_k(0.5), rel=1e-12)
    assert gauss_2f1(1, 1, 2, 0.5) == pytest.approx(-math.log(0.5) / 0.5, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(-2.0, 3.0),
    b=st.floats(0.05, 3.0),
    gap=st.floats(0.05, 3.0),
    z=st.floats(0.0, 0.995),
)
def test_2f1_matches_mpmath(a, b, gap, z):
    c = b + gap
    ref = float(mpmath.hyp2f1(a, b, c, z))
    got = gauss_2f1(a, b, c, z)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-12 * abs(ref) + 1e-300)


def test_2f1_euler_integral_consistency():
    gen = np.random.default_rng(7)
    for _ in range(20):
        b = gen.uniform(0.2, 2.0)
        c = b + gen.uniform(0.2, 2.0)
        a = gen.uniform(-1.0, 2.0)
        z = gen.uniform(0.0, 0.98)
        lhs = beta_fn(b, c - b) * gauss_2f1(a, b, c, z)
        rhs = integrate_adaptive(
            lambda u: u ** (b - 1) * (1 - u) ** (c - b - 1) * (1 - z * u) ** (-a), (b - 1, c - b - 1)
        )
        assert lhs == pytest.approx(rhs, rel=1e-8)


def test_2f1_at_unit_argument():
    # Gauss summation when c - a - b > 0, divergence otherwise
    assert gauss_2f1(0.25, 0.5, 1.5, 1.0) == pytest.approx(float(mpmath.hyp2f1(0.25, 0.5, 1.5, 1)), rel=1e-12)
    assert gauss_2f1(0.5, 0.5, 1.0, 1.0) == math.inf


@pytest.mark.parametrize("a, b, c, z", [(1, 0, 1, 0.5), (1, 1, 0.5, 0.5), (1, 0.5, 1, -0.1), (1, 0.5, 1, 1.5)])
def test_2f1_domain(a, b, c, z):
    with pytest.raises(DomainError):
        gauss_2f1(a, b, c, z)


def test_elliptic_examples():
    assert elliptic_k(0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert elliptic_k(1) == math.inf
    k = 1 / math.sqrt(2)
    assert elliptic_k(k) == pytest.approx(math.pi / 2 * gauss_2f1(0.5, 0.5, 1, 0.5), rel=1e-12)


def test_elliptic_matches_scipy():
    # scipy takes m = k^2; ellipkm1 takes 1 - m, which (1 - k)(1 + k) gives without cancellation
    for k in np.concatenate([np.linspace(0, 0.99, 60), 1 - np.geomspace(1e-2, 1e-11, 20)]):
        assert elliptic_k(k) == pytest.approx(special.ellipkm1((1 - k) * (1 + k)), rel=1e-12)


def test_elliptic_complement_near_unit():
    with mpmath.workdps(50):
        for kp in np.geomspace(1e-12, 1, 30):
            ref = float(mpmath.ellipk(1 - mpmath.mpf(kp) ** 2))
            assert elliptic_k_complement(kp) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.9])
def test_legendre_spot_check(k):
    assert elliptic_k(k) == pytest.approx(math.pi / 2 * gauss_2f1(0.5, 0.5, 1, k * k), rel=1e-9)


@pytest.mark.parametrize("k", [-0.1, 1.0001])
def test_elliptic_domain(k):
    with pytest.raises(DomainError):
        elliptic_k(k)


def test_agm():
    assert agm(1.0, 1.0) == 1.0
    assert agm(1.0, 0.0) == 0.0
    assert agm(24.0, 6.0) == pytest.approx(13.458171481725615, rel=1e-14)


@pytest.mark.parametrize("d, expected", [(0, 2.0), (1, 2 * math.pi), (2, 4 * math.pi), (3, 2 * math.pi**2)])
def test_sphere_area(d, expected):
    assert sphere_area(d) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("d", [-1, 1.5])
def test_sphere_area_domain(d):
    with pytest.raises(DomainError):
        sphere_area(d)
