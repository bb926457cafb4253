import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drivenqubit.errors import DomainError
from drivenqubit.special import (bessel_j, bessel_j_asymptotic, bessel_j_orders, cdt_driving_ratio,
                                 truncation_order)

# 40-digit mpmath values
J3_AT_7_5 = -0.25806091319346031166
J1_AT_30_75PI = 0.081179807627856397223
ASYM1_AT_30_75PI = 0.081178788387450629649


def test_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert abs(bessel_j(0, 2.4048)) < 5e-5


def test_against_frozen_oracle():
    assert bessel_j(3, 7.5) == pytest.approx(J3_AT_7_5, abs=1e-14)
    assert bessel_j(1, 30.75 * math.pi) == pytest.approx(J1_AT_30_75PI, abs=1e-14)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17, 60, 150, 999, 10_000])
@pytest.mark.parametrize("x", [1e-3, 0.7, 2.0, 9.99, 12.5, 48.0, 100 * math.pi, 999.0])
def test_against_mpmath(n, x):
    ref = float(mpmath.besselj(n, x))
    assert abs(bessel_j(n, x) - ref) <= 1e-12
    assert abs(bessel_j(-n, -x) - float(mpmath.besselj(-n, -x))) <= 1e-12


def test_orders_vector_matches_scalar():
    x = 37.3
    vals = bessel_j_orders(80, x)
    for n in (0, 13, 37, 80):
        assert vals[n] == pytest.approx(bessel_j(n, x), abs=1e-14)


def test_domain_errors():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(DomainError):
            bessel_j(0, bad)
    with pytest.raises(DomainError):
        bessel_j(10_001, 1.0)
    with pytest.raises(DomainError):
        bessel_j_asymptotic(0, 0.0)
    with pytest.raises(DomainError):
        bessel_j_asymptotic(0, -1.0)
    with pytest.raises(DomainError):
        cdt_driving_ratio(0)


@given(n=st.integers(-20, 20), x=st.floats(0.0, 100.0))
@settings(max_examples=300, deadline=None)
def test_reflection(n, x):
    assert abs(bessel_j(-n, x) - (-1) ** n * bessel_j(n, x)) < 1e-12


@given(n=st.integers(1, 40), x=st.floats(0.1, 100.0))
@settings(max_examples=300, deadline=None)
def test_three_term_recurrence(n, x):
    lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x)
    rhs = 2 * n / x * bessel_j(n, x)
    scale = max(abs(lhs), abs(rhs), abs(bessel_j(n - 1, x)), abs(bessel_j(n + 1, x)))
    assert abs(lhs - rhs) <= 1e-10 * scale + 1e-300


@pytest.mark.parametrize("x", [0.5, 3.0, 10.0, 33.3, 100.0])
def test_normalisation_sum(x):
    kmax = int(math.ceil(2 * x + 40))
    j = bessel_j_orders(kmax, x)
    assert abs(j[0] ** 2 + 2 * np.sum(j[1:] ** 2) - 1.0) < 1e-8


@given(x=st.floats(50.0, 1000.0))
@settings(max_examples=100, deadline=None)
def test_asymptotic_close_for_large_x(x):
    envelope = math.sqrt(2 / (math.pi * x))
    assert abs(bessel_j_asymptotic(0, x) - bessel_j(0, x)) < 0.02 * envelope


def test_asymptotic_formula():
    x = 30.75 * math.pi
    assert bessel_j_asymptotic(1, x) == pytest.approx(ASYM1_AT_30_75PI, abs=1e-15)
    assert abs(bessel_j_asymptotic(1, x) - bessel_j(1, x)) < 1e-5
    for m in (1, 3, 7, 31):
        assert abs(bessel_j_asymptotic(0, cdt_driving_ratio(m))) < 1e-14
    x = 100 * math.pi - math.pi / 4
    assert abs(bessel_j_asymptotic(0, x) - bessel_j(0, x)) < 1e-3 * math.sqrt(2 / (math.pi * x))


def test_cdt_driving_ratio():
    assert cdt_driving_ratio(1) == pytest.approx(0.75 * math.pi)
    assert cdt_driving_ratio(7) == pytest.approx(6.75 * math.pi)
    assert cdt_driving_ratio(31) == pytest.approx(30.75 * math.pi)
    # gap to the true first zero of J0 shrinks with m
    gaps = [abs(cdt_driving_ratio(m) - float(mpmath.besseljzero(0, m))) for m in (1, 2, 5, 10)]
    assert gaps == sorted(gaps, reverse=True)


def test_truncation_order():
    for x in (0.1, 10.0, 100.0):
        n = truncation_order(x)
        assert n <= math.ceil(2 * x) + 60
        tail = np.abs(bessel_j_orders(n + 20, x)[n + 1:])
        assert np.all(tail < 1e-14)
