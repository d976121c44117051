from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from twoparabolic.arith import (
    NotReducibleError,
    format_rational,
    in_z_inv_p,
    int_valuation,
    is_power_of,
    p_free_part,
    p_valuation,
    parse_rational,
    rat,
    reduce_mod,
)

nonzero = st.integers(-10**6, 10**6).filter(bool)
rationals = st.builds(Fraction, st.integers(-10**6, 10**6), nonzero)
nonzero_rationals = st.builds(Fraction, nonzero, nonzero)


def test_rat_ops():
    assert rat(3, 2) + rat(1, 2) == 2
    assert rat(7, 2) * rat(2, 7) == 1
    assert rat("41/12") - 2 == Fraction(17, 12)


def test_parse_and_format_round_trip():
    for text in ("0", "-5", "3/2", "-41/12", "1393/408"):
        assert format_rational(parse_rational(text)) == text
    assert parse_rational(" 6/4 ") == Fraction(3, 2)


@pytest.mark.parametrize("bad", ["", "1/", "/2", "1.5", "a/b", "1/-2"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_parse_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        parse_rational("1/0")


def test_rat_refuses_floats():
    with pytest.raises(TypeError):
        rat(0.5)


@pytest.mark.parametrize(
    "x, p, v, unit",
    [(Fraction(1, 4), 2, -2, 1), (12, 2, 2, 3), (Fraction(16, 9), 3, -2, 16)],
)
def test_p_valuation_examples(x, p, v, unit):
    pv = p_valuation(x, p)
    assert (pv.v, pv.unit) == (v, unit)
    assert pv.value == x


def test_p_valuation_zero():
    with pytest.raises(ValueError):
        p_valuation(0, 2)


def test_int_valuation_large_power():
    assert int_valuation(3**500 * 7, 3) == 500
    assert int_valuation(-(2**1000), 2) == 1000


@pytest.mark.parametrize("x, want", [(Fraction(3, 2), True), (Fraction(41, 12), False), (Fraction(-5, 4), True)])
def test_in_z_inv_p(x, want):
    assert in_z_inv_p(x, 2) is want


def test_is_power_of():
    assert is_power_of(1, 5) and is_power_of(125, 5)
    assert not is_power_of(0, 5) and not is_power_of(50, 5)


@pytest.mark.parametrize("x, r, want", [(Fraction(3, 2), 5, 4), (Fraction(7, 3), 1, 0), (Fraction(5, 2), 5, 0)])
def test_reduce_mod_examples(x, r, want):
    assert reduce_mod(x, r) == want


def test_reduce_mod_not_invertible():
    with pytest.raises(NotReducibleError):
        reduce_mod(Fraction(1, 2), 4)


def test_p_free_part():
    assert p_free_part(Fraction(-12, 5), 2) == 3


@given(st.integers(-1000, 1000), nonzero, nonzero)
def test_normalization_idempotent(n, d, k):
    assert Fraction(k * n, k * d) == Fraction(n, d)


@given(rationals, rationals, rationals)
def test_field_laws(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    if x:
        assert x * (1 / x) == 1


@given(
    st.integers(-10**6, 10**6),
    st.integers(0, 8),
    st.integers(-10**6, 10**6),
    st.integers(0, 8),
    st.sampled_from([3, 5, 7, 9, 11, 25]),
)
def test_reduce_mod_ring_homomorphism(n1, e1, n2, e2, r):
    # denominators are powers of 2, invertible mod odd r
    x, y = Fraction(n1, 2**e1), Fraction(n2, 2**e2)
    assert reduce_mod(x + y, r) == (reduce_mod(x, r) + reduce_mod(y, r)) % r
    assert reduce_mod(x * y, r) == reduce_mod(x, r) * reduce_mod(y, r) % r


@given(nonzero_rationals, nonzero_rationals, st.sampled_from([2, 3, 5, 7]))
def test_valuation_multiplicative(x, y, p):
    assert p_valuation(x * y, p).v == p_valuation(x, p).v + p_valuation(y, p).v
