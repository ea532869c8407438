from fractions import Fraction
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from mumops.series import RationalSeries, SeriesError, format_series, hadamard, revert

from conftest import series

T = 12


def S(*cs, T=None):
    return RationalSeries(cs, T)


def test_coefficients_are_exact_fractions_in_lowest_terms():
    s = RationalSeries([Fraction(2, 4), 3, "6/8"])
    assert s.coeffs == (Fraction(1, 2), Fraction(3), Fraction(3, 4))
    assert all(isinstance(c, Fraction) for c in s.coeffs)


def test_beyond_truncation_is_unknown_not_zero():
    s = RationalSeries([1, 2], 3)
    assert s[3] == 0
    with pytest.raises(IndexError):
        s[4]


def test_binary_ops_take_minimum_truncation():
    a = RationalSeries.one(10)
    b = RationalSeries.variable(4)
    for r in (a + b, a - b, a * b):
        assert r.truncation == 4


def test_exp_log_inverse_pair():
    f = S(1, 1, T=T)
    assert f.log().exp() == f


def test_pow_central_binomial():
    got = S(1, -4, T=T).pow(Fraction(-1, 2))
    assert got.coeffs == tuple(Fraction(comb(2 * n, n)) for n in range(T + 1))


def test_inv_geometric():
    assert S(1, -1, T=T).inv() == RationalSeries([1] * (T + 1), T)


@pytest.mark.parametrize(
    "call, message",
    [
        (lambda: S(0, 1, T=4).inv(), "inv"),
        (lambda: S(0, 1, T=4).log(), "log"),
        (lambda: S(1, 1, T=4).exp(), "exp"),
    ],
)
def test_primitive_errors_name_the_primitive(call, message):
    with pytest.raises(SeriesError, match=message):
        call()


def catalan_fixed_point(T):
    g = RationalSeries.zero(T)
    q = RationalSeries.variable(T)
    for _ in range(T + 1):
        g = q + g * g
    return g


def test_revert_catalan_against_fixed_point_oracle():
    g = revert(S(0, 1, -1, T=T))
    assert g == catalan_fixed_point(T)
    assert g.coeffs[:5] == (0, 1, 1, 2, 5)


def test_revert_identity():
    q = RationalSeries.variable(T)
    assert revert(q) == q


def test_revert_hauptmodul_roundtrip():
    f = S(0, 1, -12, 66, -220, T=4)
    g = revert(f)
    assert f.compose(g) == RationalSeries.variable(4)


def test_revert_needs_linear_term():
    with pytest.raises(SeriesError):
        revert(S(0, 0, 1, T=4))


def factorial_sequence(T):
    return [Fraction(comb(2 * m, m) * factorial(3 * m), factorial(m) ** 3) for m in range(T + 1)]


def test_hadamard_factorial_oracle():
    a = RationalSeries([comb(2 * m, m) for m in range(T + 1)], T)
    b = RationalSeries([factorial(3 * m) // factorial(m) ** 3 for m in range(T + 1)], T)
    h = hadamard(a, b)
    assert h.coeffs == tuple(factorial_sequence(T))
    assert h.coeffs[:3] == (1, 12, 540)


def test_hadamard_identity_and_absorber():
    f = S(3, -1, Fraction(2, 7), 5, T=3)
    assert hadamard(f, RationalSeries([1] * 4, 3)) == f
    assert hadamard(f, RationalSeries.zero(3)).is_zero()


def test_shift_keeps_truncation_and_divide_loses_it():
    f = S(1, 2, 3, T=2)
    assert f.shift(1) == S(0, 1, 2, T=2)
    g = S(0, 0, 5, 7, T=3)
    assert g.divide_by_t(2) == S(5, 7, T=1)
    with pytest.raises(SeriesError):
        f.divide_by_t(1)


def test_theta_and_derivative():
    f = S(1, 1, 1, 1, T=3)
    assert f.theta() == S(0, 1, 2, 3, T=3)
    assert f.derivative() == S(1, 2, 3, T=2)


def test_format_series():
    assert format_series(S(1, -7, Fraction(1, 2), T=2), "q") == "1 - 7*q + (1/2)*q^2 + O(q^3)"


# ---------------------------------------------------------------- properties


@given(series(constant=0, linear=1))
def test_revert_is_an_involution(f):
    assert revert(revert(f)) == f


@given(series(), st.integers(1, 3))
def test_revert_roundtrip_any_nonzero_linear(f, lin):
    f = RationalSeries([0, lin] + list(f.coeffs[2:]), f.truncation)
    g = revert(f)
    x = RationalSeries.variable(f.truncation)
    assert f.compose(g) == x and g.compose(f) == x


@given(series(), st.sampled_from([1, -2, Fraction(1, 3)]))
def test_mul_inv_is_one(f, c0):
    f = RationalSeries([c0] + list(f.coeffs[1:]), f.truncation)
    assert f * f.inv() == RationalSeries.one(f.truncation)


@given(series(truncation=6, constant=0), series(truncation=6, constant=0))
def test_exp_is_additive(f, g):
    assert (f + g).exp() == f.exp() * g.exp()


@given(series(truncation=5), series(truncation=5), series(truncation=5), st.integers(-3, 3))
def test_hadamard_commutative_associative_bilinear(f, g, h, c):
    assert hadamard(f, g) == hadamard(g, f)
    assert hadamard(hadamard(f, g), h) == hadamard(f, hadamard(g, h))
    assert hadamard(f * c + g, h) == hadamard(f, h) * c + hadamard(g, h)


@given(series(constant=1), st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3)))
def test_pow_matches_exp_log(f, r):
    assert f.pow(r) == (f.log() * r).exp()


@given(series(truncation=6), series(truncation=6, constant=0))
def test_compose_is_a_ring_map(f, g):
    one = RationalSeries.one(6)
    assert (f * f).compose(g) == f.compose(g) * f.compose(g)
    assert one.compose(g) == one
