from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundkde.errors import OrderTooLarge
from boundkde.legendre_kernels import (
    HILBERT_MAX_ORDER,
    hilbert_coeffs,
    kernel_eval,
    kernel_lp_norm,
    legendre_phi,
    make_w,
)


def gauss01(npts):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def test_legendre_phi_examples():
    assert legendre_phi(0, 0.3) == 1.0
    assert legendre_phi(1, 0.0) == pytest.approx(-math.sqrt(3), abs=1e-15)
    # Q_2(x) = (3x^2 - 1)/2 evaluated directly at x = 0
    assert legendre_phi(2, 0.5) == pytest.approx(math.sqrt(5) * -0.5, abs=1e-15)
    assert legendre_phi(2, 0.5) == pytest.approx(-1.1180340, abs=1e-7)


@pytest.mark.parametrize("r", range(8))
def test_legendre_phi_endpoint_and_orthonormality(r):
    assert legendre_phi(r, 0.0) == pytest.approx((-1) ** r * math.sqrt(2 * r + 1), rel=1e-14)
    u, w = gauss01(r + 8)
    for s in range(r + 1):
        inner = np.dot(w, legendre_phi(r, u) * legendre_phi(s, u))
        assert inner == pytest.approx(float(r == s), abs=1e-13)


def test_make_w_small_orders():
    assert make_w(0).coeffs == (1.0,)
    assert make_w(1).coeffs == (4.0, -6.0)
    assert make_w(2).coeffs == (9.0, -36.0, 30.0)


def test_w1_direct_moments():
    # int_0^1 (4 - 6u) du = 1, int_0^1 u (4 - 6u) du = 0
    assert Fraction(4) - Fraction(6, 2) == 1
    assert Fraction(4, 2) - Fraction(6, 3) == 0


def test_hilbert_examples():
    np.testing.assert_array_equal(hilbert_coeffs(0), [1.0])
    np.testing.assert_array_equal(hilbert_coeffs(1), [4.0, -6.0])
    np.testing.assert_array_equal(hilbert_coeffs(2), [9.0, -36.0, 30.0])


@pytest.mark.parametrize("m", range(HILBERT_MAX_ORDER + 1))
def test_legendre_route_matches_hilbert_solve(m):
    np.testing.assert_allclose(make_w(m).coeffs, hilbert_coeffs(m), rtol=1e-6, atol=0)


def test_order_limits():
    with pytest.raises(OrderTooLarge):
        hilbert_coeffs(HILBERT_MAX_ORDER + 1)
    with pytest.raises(OrderTooLarge):
        make_w(41)
    with pytest.raises(OrderTooLarge):
        make_w(5, m_max=4)
    assert make_w(40).order == 40


@pytest.mark.parametrize("m", range(13))
def test_kernel_invariants(m):
    k = make_w(m)
    u, w = gauss01(m + 8)
    vals = kernel_eval(k, u)
    assert abs(np.dot(w, vals) - 1.0) < 1e-12
    for r in range(1, m + 1):
        assert abs(np.dot(w, vals * u ** r)) < 1e-9
    assert kernel_eval(k, 0.0) == pytest.approx((m + 1) ** 2, abs=1e-9)
    grid = np.linspace(0.0, 1.0, 1001)
    assert np.max(np.abs(kernel_eval(k, grid))) <= (m + 1) ** 2 + 1e-9
    assert math.sqrt(np.dot(w, vals ** 2)) == pytest.approx(m + 1, abs=1e-8)
    assert kernel_lp_norm(k, 2) == pytest.approx(m + 1, abs=1e-8)
    assert k.sup_norm == (m + 1) ** 2 and k.l2_norm == m + 1


@pytest.mark.parametrize("m", [20, 30, 40])
def test_high_orders_stay_accurate(m):
    k = make_w(m)
    u, w = gauss01(m + 8)
    vals = kernel_eval(k, u)
    assert abs(np.dot(w, vals) - 1.0) < 1e-10
    assert max(abs(np.dot(w, vals * u ** r)) for r in range(1, m + 1)) < 1e-10
    # w_m(1) = sum_r (-1)^r (2r + 1) = (-1)^m (m + 1)
    assert kernel_eval(k, 1.0) == pytest.approx((-1) ** m * (m + 1), abs=1e-9)


def test_kernel_eval_examples():
    w1, w2 = make_w(1), make_w(2)
    assert kernel_eval(w1, 0.0) == 4.0
    assert kernel_eval(w1, 1.0) == -2.0
    assert kernel_eval(w2, 1.5) == 0.0
    assert kernel_eval(w2, -1e-12) == 0.0
    assert kernel_eval(w2, 1.0) == 3.0


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 7.0])
def test_lp_norm_w0_is_one(p):
    assert kernel_lp_norm(make_w(0), p) == pytest.approx(1.0, abs=1e-14)


def test_lp_norm_examples():
    assert kernel_lp_norm(make_w(1), 2) == pytest.approx(2.0, abs=1e-14)
    assert kernel_lp_norm(make_w(2), 2) == pytest.approx(3.0, abs=1e-14)
    # |4 - 6u| integrates to 4/3 + 1/3 over its two signed pieces
    assert kernel_lp_norm(make_w(1), 1) == pytest.approx(5.0 / 3.0, abs=1e-13)


@pytest.mark.parametrize("m,p", [(1, 3.0), (2, 1.0), (3, 4.0), (5, 2.5), (12, 3.0)])
def test_lp_norm_against_brute_force(m, p):
    k = make_w(m)
    u = (np.arange(400000) + 0.5) / 400000
    brute = np.mean(np.abs(kernel_eval(k, u)) ** p) ** (1.0 / p)
    assert kernel_lp_norm(k, p) == pytest.approx(brute, rel=1e-6)


def test_lp_norm_quadrature_route_agrees_at_p2():
    for m in range(8):
        k = make_w(m)
        near_two = kernel_lp_norm(k, 2.0 + 1e-9)
        assert near_two == pytest.approx(m + 1, rel=1e-7)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(0, 12), u=st.floats(0.0, 1.0))
def test_sup_bound_property(m, u):
    assert abs(kernel_eval(make_w(m), u)) <= (m + 1) ** 2 + 1e-9


@settings(max_examples=60, deadline=None)
@given(m=st.integers(0, 12), u=st.one_of(st.floats(-10, -1e-9), st.floats(1 + 1e-9, 10)))
def test_zero_outside_support(m, u):
    assert kernel_eval(make_w(m), u) == 0.0
