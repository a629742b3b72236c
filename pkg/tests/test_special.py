import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sps

from robiniso.special import (
    bessel_i,
    bessel_i_array,
    bessel_i_prime,
    bessel_ie,
    bessel_ie_prime,
    order_for_dimension,
    switch_point,
)


@pytest.mark.parametrize("n, nu", [(2, 0.0), (3, 0.5), (4, 1.0), (7, 2.5)])
def test_order_for_dimension(n, nu):
    assert order_for_dimension(n) == nu


def test_order_rejects_dimension_one():
    with pytest.raises(ValueError):
        order_for_dimension(1)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("z", [1e-6, 0.1, 1.0, 5.0, 19.9, 20.1, 40.0, 100.0, 500.0])
def test_scaled_matches_reference(nu, z):
    assert bessel_ie(nu, z) == pytest.approx(sps.ive(nu, z), rel=1e-12)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 2.0])
@pytest.mark.parametrize("z", [0.3, 2.0, 15.0, 60.0])
def test_derivative_matches_reference(nu, z):
    assert bessel_i_prime(nu, z) == pytest.approx(sps.ivp(nu, z), rel=1e-12)
    assert bessel_ie_prime(nu, z) == pytest.approx(sps.ivp(nu, z) * math.exp(-z), rel=1e-12)


def test_known_values():
    # I_0(0) = 1, I_1(0) = 0, I_{1/2}(z) = sqrt(2/(πz)) sinh z
    assert bessel_i(0, 0.0) == 1.0
    assert bessel_i(1, 0.0) == 0.0
    for z in (0.5, 3.0, 30.0):
        assert bessel_i(0.5, z) == pytest.approx(math.sqrt(2 / (math.pi * z)) * math.sinh(z), rel=1e-13)


def test_branch_switch_is_continuous():
    for nu in (0.0, 1.0, 2.5):
        zs = switch_point(nu)
        lo, hi = bessel_ie(nu, zs * (1 - 1e-12)), bessel_ie(nu, zs * (1 + 1e-12))
        assert abs(lo - hi) / lo < 1e-11


def test_overflow_returns_inf_but_scaled_is_finite():
    assert bessel_i(0, 800.0) == math.inf
    assert math.isfinite(bessel_ie(0, 800.0))


@pytest.mark.parametrize("nu, z", [(-1.0, 1.0), (0.0, -1.0), (float("nan"), 1.0)])
def test_invalid_arguments(nu, z):
    with pytest.raises(ValueError):
        bessel_ie(nu, z)


def test_array_form():
    z = np.linspace(0.0, 30.0, 11)
    np.testing.assert_allclose(bessel_i_array(1, z), sps.iv(1, z), rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0]), st.floats(1e-3, 200.0))
def test_recurrence(nu, z):
    # I_{ν-1} - I_{ν+1} = (2ν/z) I_ν, in scaled form; ν+1 keeps orders valid
    a, b, c = bessel_ie(nu, z), bessel_ie(nu + 1, z), bessel_ie(nu + 2, z)
    assert a - c == pytest.approx(2 * (nu + 1) / z * b, rel=1e-10, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([0.0, 1.0, 2.0]), st.floats(1e-2, 100.0))
def test_monotone_in_argument(nu, z):
    assert bessel_i(nu, z * 1.01) > bessel_i(nu, z)
