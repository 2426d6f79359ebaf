import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from hyperconv.errors import AccuracyError, DomainError
from hyperconv.quadrature import ReducedIntegrand, integrate_adaptive, integrate_reduced
from hyperconv.specialfun import beta_fn, gauss_2f1


def test_adaptive_examples():
    assert integrate_adaptive(lambda u: np.ones_like(u)) == pytest.approx(1.0, rel=1e-12)
    assert integrate_adaptive(lambda u: u**-0.5, (-0.5, 0.0)) == pytest.approx(2.0, rel=1e-10)
    val = integrate_adaptive(lambda u: u**-0.5 * (1 - u) ** -0.75, (-0.5, -0.75))
    assert val == pytest.approx(beta_fn(0.5, 0.25), rel=1e-8)


def test_adaptive_complement_mode_keeps_right_endpoint_accurate():
    # (1-u)^(-0.9) has almost all of its mass within 1e-10 of u = 1
    val = integrate_adaptive(lambda u, v: v**-0.9, (0.0, -0.9), complement=True)
    assert val == pytest.approx(10.0, rel=1e-9)


def test_adaptive_rejects_nonintegrable_exponents():
    with pytest.raises(DomainError):
        integrate_adaptive(lambda u: 1 / u, (-1.0, 0.0))


def test_adaptive_budget_exhaustion_is_accuracy_error():
    # a wildly oscillating integrand cannot be resolved with a handful of panels
    with pytest.raises(AccuracyError):
        integrate_adaptive(lambda u: np.sin(1e6 * u) + 1.0, max_panels=4, rtol=1e-14)


def test_adaptive_matches_scipy_quad():
    f = lambda u: u**-0.3 * (1 - u) ** 0.7 * np.exp(u)  # noqa: E731
    ref, _ = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
    assert integrate_adaptive(f, (-0.3, 0.0)) == pytest.approx(ref, rel=1e-9)


def test_reduced_examples():
    assert integrate_reduced(ReducedIntegrand(1, 0.5, 0.5, 0.5, 0.0)) == pytest.approx(math.pi, rel=1e-12)
    assert integrate_reduced(ReducedIntegrand(1, 0.5, 0.5, 0.5, 1.0)) == math.inf
    val = integrate_reduced(ReducedIntegrand(1, 0.5, 0.5, 0.5, 0.96))
    ref = math.pi * gauss_2f1(0.5, 0.5, 1, 0.96)
    assert val == pytest.approx(ref, rel=1e-8)
    # scipy as a second, unrelated oracle
    assert val == pytest.approx(math.pi * special.hyp2f1(0.5, 0.5, 1, 0.96), rel=1e-8)


def test_reduced_convergent_at_unit_beta():
    # q - s > 0 keeps the integral finite at beta = 1: B(p, q - s)
    f = ReducedIntegrand(2.0, 0.75, 1.0, 0.25, 1.0)
    assert integrate_reduced(f) == pytest.approx(2.0 * beta_fn(0.75, 0.75), rel=1e-12)


def test_reduced_snaps_beta_near_one():
    f = ReducedIntegrand(1, 0.5, 0.5, 0.5, 1.0 - 1e-13)
    assert integrate_reduced(f) == math.inf


def test_reduced_rejects_beta_outside_unit_interval():
    with pytest.raises(DomainError):
        ReducedIntegrand(1, 0.5, 0.5, 0.5, 1.2)


@settings(max_examples=40, deadline=None)
@given(
    p=st.floats(0.1, 3.0),
    q=st.floats(0.1, 3.0),
    s=st.floats(0.0, 2.0),
    beta=st.floats(0.0, 0.999),
)
def test_reduced_euler_identity(p, q, s, beta):
    val = integrate_reduced(ReducedIntegrand(1.5, p, q, s, beta))
    ref = 1.5 * beta_fn(p, q) * gauss_2f1(s, p, p + q, beta)
    assert val == pytest.approx(ref, rel=1e-7)


def test_reduced_monotone_in_beta():
    betas = np.linspace(0, 0.999, 40)
    vals = [integrate_reduced(ReducedIntegrand(1, 0.7, 0.4, 0.6, b)) for b in betas]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_refinement_is_consistent():
    f = ReducedIntegrand(1, 0.3, 0.6, 0.8, 0.99)
    coarse = integrate_reduced(f, rtol=1e-6)
    fine = integrate_reduced(f, rtol=5e-7)
    assert abs(fine - coarse) <= 1e-6 * abs(fine)
