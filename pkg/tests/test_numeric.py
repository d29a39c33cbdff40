import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from sagame.numeric import common_denominator, rat_of_string, rat_to_string


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


@pytest.mark.parametrize("text, expected", [("1/2", Fraction(1, 2)), ("4/8", Fraction(1, 2)),
                                            ("2", Fraction(2)), ("-6/4", Fraction(-3, 2))])
def test_rat_of_string(text, expected):
    assert rat_of_string(text) == expected


def test_negative_literal_reduced_by_independent_gcd():
    g = _gcd(6, 4)
    value = rat_of_string("-6/4")
    assert (value.numerator, value.denominator) == (-6 // g, 4 // g)


@pytest.mark.parametrize("text", ["", "1/", "/2", "0.5", "1e3", "1/-2", "a/b", "1//2"])
def test_rat_of_string_rejects_malformed(text):
    with pytest.raises(ValueError):
        rat_of_string(text)


def test_rat_of_string_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        rat_of_string("3/0")


def test_format_roundtrip():
    assert rat_to_string(Fraction(3, 1)) == "3"
    assert rat_to_string(Fraction(-3, 7)) == "-3/7"
    assert rat_of_string(rat_to_string(Fraction(22, 7))) == Fraction(22, 7)


@pytest.mark.parametrize("values, expected", [
    ([Fraction(1, 2), Fraction(1, 3)], 6),
    ([Fraction(2), Fraction(5)], 1),
    ([Fraction(1, 4), Fraction(3, 8), Fraction(1, 6)], 24),
])
def test_common_denominator(values, expected):
    assert common_denominator(values) == expected


def test_common_denominator_matches_direct_lcm():
    assert common_denominator([Fraction(1, 4), Fraction(3, 8), Fraction(1, 6)]) == math.lcm(4, 8, 6)


def test_common_denominator_empty():
    with pytest.raises(ValueError):
        common_denominator([])


small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@given(st.lists(small, min_size=1, max_size=8))
def test_common_denominator_clears_all(values):
    d = common_denominator(values)
    assert all((v * d).denominator == 1 for v in values)


@given(small, small, small)
def test_field_axioms(a, b, c):
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0
    if a != 0:
        assert a * (1 / a) == 1


@given(small)
def test_string_roundtrip(a):
    assert rat_of_string(rat_to_string(a)) == a
