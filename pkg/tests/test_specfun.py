import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hst
from scipy.special import binom, eval_genlaguerre

from thinspec.specfun import (
    MAX_ORDER,
    LogWeight,
    SpecialFunctionOverflow,
    hermite,
    laguerre_assoc,
    laguerre_assoc_scaled,
    log_factorial,
    log_factorials,
)

complex_disk = hst.builds(
    lambda r, th: r * complex(math.cos(th), math.sin(th)),
    hst.floats(0, 5),
    hst.floats(-math.pi, math.pi),
)


def hermite_monomial(n, z):
    """Explicit sum n! sum_m (-1)^m (2z)^(n-2m) / (m! (n-2m)!) and its absolute-term scale."""
    terms = [
        (-1) ** m * math.factorial(n) / (math.factorial(m) * math.factorial(n - 2 * m)) * (2 * z) ** (n - 2 * m)
        for m in range(n // 2 + 1)
    ]
    return sum(terms), sum(abs(t) for t in terms)


def laguerre_monomial(n, k, x):
    terms = [(-1) ** i * binom(n + k, n - i) * x**i / math.factorial(i) for i in range(n + 1)]
    return sum(terms), sum(abs(t) for t in terms)


# log_factorial

@pytest.mark.parametrize("n, expected", [(0, 0.0), (1, 0.0), (10, math.log(3628800))])
def test_log_factorial_examples(n, expected):
    assert log_factorial(n) == pytest.approx(expected, rel=1e-15, abs=0)


def test_log_factorial_ten_digits():
    assert log_factorial(10) == pytest.approx(15.104412573075516, rel=1e-14)


@pytest.mark.parametrize("n", [31, 170, 171, 500, 3000, 20000])
def test_log_factorial_against_exact_integer(n):
    exact = math.log(math.factorial(n))
    assert abs(log_factorial(n) - exact) <= 1e-13 * exact


def test_log_factorial_million():
    # Stirling series with three correction terms as an independent reference
    n = 10**6
    ref = n * math.log(n) - n + 0.5 * math.log(2 * math.pi * n) + 1 / (12 * n) - 1 / (360 * n**3)
    assert abs(log_factorial(n) - ref) <= 1e-13 * ref


def test_log_factorial_rejects_negative():
    with pytest.raises(ValueError):
        log_factorial(-1)


def test_log_factorials_table_is_cumulative_and_frozen():
    table = log_factorials(50)
    assert table.shape == (51,)
    assert np.allclose(np.diff(table), np.log(np.arange(1, 51)), rtol=1e-13)
    with pytest.raises(ValueError):
        table[0] = 1.0


# hermite

def test_hermite_examples():
    assert hermite(0, 3.3 - 2j) == 1
    assert hermite(1, 2 + 0j) == 4 + 0j
    assert hermite(3, 1 + 0j) == -4


@given(hst.integers(0, 12), complex_disk)
def test_hermite_matches_monomial_expansion(n, z):
    ref, scale = hermite_monomial(n, z)
    assert abs(hermite(n, z) - ref) <= 1e-9 * max(scale, 1.0)


@given(hst.integers(0, 30), complex_disk)
def test_hermite_parity(n, z):
    a, b = hermite(n, -z), (-1) ** n * hermite(n, z)
    assert abs(a - b) <= 1e-12 * max(abs(a), abs(b), 1.0)


def test_hermite_overflow_is_signaled():
    with pytest.raises(SpecialFunctionOverflow):
        hermite(MAX_ORDER, 50.0)


def test_hermite_order_limits():
    with pytest.raises(ValueError):
        hermite(-1, 0.0)
    with pytest.raises(ValueError):
        hermite(MAX_ORDER + 1, 0.0)


# laguerre

def test_laguerre_examples():
    assert laguerre_assoc(0, 5, 3.7) == 1.0
    assert laguerre_assoc(1, 0, 2.0) == -1.0
    # x^2/2 - 3x + 3 at x = 1
    assert laguerre_assoc(2, 1, 1.0) == pytest.approx(0.5, abs=1e-15)


@given(hst.integers(0, 12), hst.integers(-3, 8), hst.floats(0, 5))
def test_laguerre_matches_monomial_expansion(n, k, x):
    if n + k < 0:
        return
    ref, scale = laguerre_monomial(n, k, x)
    assert abs(laguerre_assoc(n, k, x) - ref) <= 1e-9 * max(scale, 1.0)


@given(hst.integers(0, 40), hst.integers(0, 30), hst.floats(0, 60))
def test_laguerre_matches_scipy(n, k, x):
    ref = eval_genlaguerre(n, k, x)
    assert laguerre_assoc(n, k, x) == pytest.approx(ref, rel=1e-9, abs=1e-9 * max(1.0, abs(ref)))


@given(hst.integers(1, 12), hst.integers(0, 5), hst.floats(0.1, 10))
def test_laguerre_derivative_identity(n, k, x):
    h = 1e-5
    fd = (laguerre_assoc(n, k, x + h) - laguerre_assoc(n, k, x - h)) / (2 * h)
    exact = -laguerre_assoc(n - 1, k + 1, x)
    scale = max(abs(exact), abs(laguerre_assoc(n, k, x)), 1.0)
    assert abs(fd - exact) <= 1e-6 * scale


def test_laguerre_domain_checks():
    with pytest.raises(ValueError):
        laguerre_assoc(1, -2, 1.0)
    with pytest.raises(ValueError):
        laguerre_assoc(2, 0, -1.0)


def test_laguerre_overflow_is_signaled():
    with pytest.raises(SpecialFunctionOverflow):
        laguerre_assoc(4000, 4000, 1e4)


def test_scaled_laguerre_agrees_where_representable():
    degrees = np.array([0, 3, 10, 25, 40])
    orders = np.array([2, 0, 5, -3, 7])
    mant, scale = laguerre_assoc_scaled(degrees, orders, 4.5)
    direct = [laguerre_assoc(int(n), int(k), 4.5) for n, k in zip(degrees, orders)]
    assert np.allclose(mant * np.exp(scale), direct, rtol=1e-12)


def test_scaled_laguerre_survives_orders_that_overflow():
    mant, scale = laguerre_assoc_scaled(np.array([3000]), np.array([3000]), 0.5)
    assert np.all(np.abs(mant) < 1e151) and scale[0] > 0
    # log L_n^(n)(0) = log C(2n, n); x = 0.5 is close for the leading growth
    assert scale[0] + math.log(abs(mant[0])) == pytest.approx(math.log(math.comb(6000, 3000)), rel=1e-3)


# LogWeight

@given(hst.floats(-300, 300), hst.floats(-50, 50))
def test_logweight_roundtrip(log_mag, phase):
    w = LogWeight(log_mag, phase)
    assert -math.pi < w.phase <= math.pi
    back = LogWeight.from_complex(w.to_complex())
    assert abs(back.log_magnitude - log_mag) <= 1e-12 * max(1.0, abs(log_mag))


def test_logweight_zero_and_products():
    zero = LogWeight.from_complex(0)
    assert zero.log_magnitude == -math.inf and zero.to_complex() == 0
    a = LogWeight.from_complex(2j)
    b = LogWeight.from_complex(-3)
    assert (a * b).to_complex() == pytest.approx(-6j)
    assert (a / b).to_complex() == pytest.approx(2j / -3)
    assert a.pow(3).to_complex() == pytest.approx((2j) ** 3)
    assert a.pow(0).to_complex() == 1


def test_logweight_phase_boundary():
    assert LogWeight(0.0, -math.pi).phase == math.pi
    assert LogWeight(0.0, 3 * math.pi).phase == pytest.approx(math.pi)
