import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperconv.errors import StructureError
from hyperconv.forms import (
    Family,
    FormSpec,
    Status,
    classify,
    dilation_normalize,
    homogeneity_power,
    make_form,
)


def test_theta_admissible_example():
    adm = classify(make_form("ThetaAlpha", 3, (1.5,), w_norm=1.0))
    assert adm.status is Status.ADMISSIBLE
    assert adm.homogeneity_power == 2.0


def test_lambda2_inadmissible():
    adm = classify(make_form(Family.LAMBDA_N, 2, w_norm=1.0))
    assert adm.status is Status.INADMISSIBLE
    assert "unbounded" in adm.reason


def test_theta_boundary():
    assert classify(make_form(Family.THETA_ALPHA, 3, (1.0,), w_norm=1.0)).status is Status.BOUNDARY
    assert classify(make_form(Family.THETA_ALPHA, 3, (2.0,), w_norm=1.0)).status is Status.BOUNDARY
    assert classify(make_form(Family.THETA_ALPHA, 3, (2.5,), w_norm=1.0)).status is Status.INADMISSIBLE


@pytest.mark.parametrize(
    "family, n, alphas, lam, status",
    [
        (Family.THETA_ALPHA_LAMBDA, 3, (1.0,), 1.5, Status.ADMISSIBLE),
        (Family.THETA_ALPHA_LAMBDA, 3, (1.0,), 1.0, Status.BOUNDARY),  # alpha + lambda = n - 1
        (Family.THETA_ALPHA_LAMBDA, 3, (1.0,), 0.5, Status.INADMISSIBLE),
        (Family.LAMBDA_N_ALPHA, 3, (1.5,), None, Status.ADMISSIBLE),  # 2 - 2/3 < 1.5 < 2
        (Family.LAMBDA_N_ALPHA, 3, (1.2,), None, Status.INADMISSIBLE),
        (Family.LAMBDA_N_ALPHA, 2, (0.75,), None, Status.INADMISSIBLE),  # needs n >= 3
        (Family.LAMBDA_N, 3, (), None, Status.ADMISSIBLE),
        (Family.DELTA_N, 2, (), None, Status.ADMISSIBLE),
    ],
)
def test_classify_table(family, n, alphas, lam, status):
    assert classify(make_form(family, n, alphas, lam, w_norm=0.5)).status is status


def test_lambda_alpha_lambda_pivot_tie_break():
    # both alphas qualify; the smallest index is the pivot
    spec = make_form(Family.LAMBDA_ALPHA_LAMBDA, 3, (1.5, 1.5), 1.2, w_norm=1.0)
    adm = classify(spec)
    assert adm.pivot == 0
    # rho = 2 + 1.5 + 1.5 + 1.2 - 6 = 0.2
    assert adm.homogeneity_power == pytest.approx(0.2)
    assert adm.status is Status.ADMISSIBLE
    only_second = make_form(Family.LAMBDA_ALPHA_LAMBDA, 3, (2.5, 1.5), 1.2, w_norm=1.0)
    assert classify(only_second).pivot == 1


@settings(max_examples=200, deadline=None)
@given(data=st.data(), n=st.integers(3, 6))
def test_pivot_condition_forces_rho_below_n(data, n):
    """pivot + lambda < 2(n-1) and the other n-2 exponents < n give rho < n."""
    alphas = tuple(data.draw(st.floats(0.01, n - 0.01)) for _ in range(n - 1))
    lam = data.draw(st.floats(0.01, 2 * n))
    adm = classify(make_form(Family.LAMBDA_ALPHA_LAMBDA, n, alphas, lam, w_norm=1.0))
    if adm.pivot is not None:
        assert adm.homogeneity_power < n
    if adm.homogeneity_power >= n:
        assert adm.status is Status.INADMISSIBLE


def _exact_power(family, n, a, lam):
    a, lam = Fraction(a), Fraction(lam)
    return {
        Family.THETA_ALPHA: 2 * a + 2 - n,
        Family.THETA_ALPHA_LAMBDA: a + lam + 2 - n,
        Family.LAMBDA_N_ALPHA: 2 + n * (a - n + 1),
        Family.LAMBDA_N: Fraction(2),
        Family.DELTA_N: Fraction(n - 1),
    }[family]


def test_homogeneity_power_random_specs():
    gen = np.random.default_rng(3)
    fams = [Family.THETA_ALPHA, Family.THETA_ALPHA_LAMBDA, Family.LAMBDA_N_ALPHA, Family.LAMBDA_N, Family.DELTA_N]
    for _ in range(100):
        fam = fams[gen.integers(len(fams))]
        n = int(gen.integers(2, 9))
        # dyadic exponents are exact in binary, so the float result must be exact too
        a = int(gen.integers(1, 64)) / 16
        lam = int(gen.integers(1, 64)) / 16
        alphas = () if fam in (Family.LAMBDA_N, Family.DELTA_N) else (a,)
        spec = make_form(fam, n, alphas, lam if fam is Family.THETA_ALPHA_LAMBDA else None, w_norm=1.0)
        assert Fraction(homogeneity_power(spec)) == _exact_power(fam, n, a, lam)
        assert classify(spec) == classify(spec)


def test_dilation_examples():
    spec = make_form(Family.THETA_ALPHA, 2, (0.75,), tau=4.0, w_norm=2.0)
    norm, scale = dilation_normalize(spec)
    assert norm.tau == 1.0 and norm.w_norm == pytest.approx(1.0)
    assert scale.scale == 2.0
    unit = make_form(Family.THETA_ALPHA, 2, (0.75,), w_norm=2.0)
    assert dilation_normalize(unit)[0] is unit
    spec = FormSpec(Family.THETA_ALPHA, 3, (1.5,), tau=9.0, w=(3.0, 0.0, 0.0))
    assert dilation_normalize(spec)[0].w == (1.0, 0.0, 0.0)


def test_dilation_idempotent():
    spec = make_form(Family.DELTA_N, 4, tau=2.5, w=(1.0, -2.0, 0.5, 3.0))
    once, _ = dilation_normalize(spec)
    twice, _ = dilation_normalize(once)
    assert once == twice


def test_classify_depends_on_norm_only():
    a = make_form(Family.THETA_ALPHA, 3, (1.5,), w=(1.0, 0.0, 0.0))
    b = make_form(Family.THETA_ALPHA, 3, (1.5,), w=(0.0, 0.6, 0.8))
    assert classify(a) == classify(b)


def test_json_round_trip():
    spec = make_form(Family.LAMBDA_ALPHA_LAMBDA, 3, (1.5, 1.25), 1.2, tau=2.0, w=(1.0, 2.0, 3.0))
    d = json.loads(spec.to_json())
    assert set(d) == {"family", "n", "alphas", "lambda", "tau", "w"}
    assert FormSpec.from_json(spec.to_json()) == spec
    kernel = make_form(Family.KERNEL_H, 2, (0.75,), w=(1.0, 0.0), v=(0.0, 1.0))
    assert FormSpec.from_dict(kernel.to_dict()) == kernel


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family=Family.THETA_ALPHA, n=1, alphas=(0.5,), w=(1.0,)),
        dict(family=Family.THETA_ALPHA, n=2, alphas=(0.75,), tau=0.0, w=(1.0, 0.0)),
        dict(family=Family.THETA_ALPHA, n=2, alphas=(0.75,), w=(1.0,)),
        dict(family=Family.THETA_ALPHA, n=2, alphas=(), w=(1.0, 0.0)),
        dict(family=Family.THETA_ALPHA_LAMBDA, n=2, alphas=(0.75,), w=(1.0, 0.0)),
        dict(family=Family.LAMBDA_N, n=3, alphas=(1.0,), w=(1.0, 0.0, 0.0)),
        dict(family=Family.KERNEL_H, n=2, alphas=(0.75,), w=(1.0, 0.0)),
        dict(family=Family.DELTA_N, n=2, w=(1.0, 0.0), v=(0.0, 1.0)),
        dict(family=Family.DELTA_N, n=2, w=(math.nan, 0.0)),
    ],
)
def test_structural_errors(kwargs):
    with pytest.raises(StructureError):
        FormSpec(**kwargs)


def test_from_dict_rejects_unknown_and_missing_fields():
    with pytest.raises(StructureError):
        FormSpec.from_dict({"family": "DeltaN", "n": 2, "w": [1, 0], "colour": "red"})
    with pytest.raises(StructureError):
        FormSpec.from_dict({"family": "DeltaN", "n": 2})


def test_kernel_shift_exponents():
    assert make_form(Family.KERNEL_H, 3, (1.5,), w_norm=1, v=(0, 1, 0)).shift_exponent() == 2.0
    assert make_form(Family.KERNEL_K, 3, w_norm=1, v=(0, 1, 0)).shift_exponent() == 2.0
    assert make_form(Family.KERNEL_K_ALPHA, 3, (1.5,), w_norm=1, v=(0, 1, 0)).shift_exponent() == 2.75
    assert make_form(Family.KERNEL_J, 3, w_norm=1, v=(0, 1, 0)).shift_exponent() == 2.0
    with pytest.raises(StructureError):
        make_form(Family.DELTA_N, 3, w_norm=1).shift_exponent()
