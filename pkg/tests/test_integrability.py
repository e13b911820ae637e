import math
from fractions import Fraction

import pytest

from hypme.errors import ParseError, PreconditionError
from hypme.integrability import (
    exp_power,
    parse_function,
    poly_plus,
    power,
    table_function,
)


def test_power_exact():
    phi = power(2)
    assert phi.eval_exact(Fraction(3)) == 9
    assert phi.eval_exact(Fraction(3, 2)) == Fraction(9, 4)
    assert phi.is_exact()


def test_scale_mechanism():
    phi = power(2, scale=Fraction(1, 2))
    assert phi.eval_exact(Fraction(4)) == 4  # (4/2)^2


def test_exp_power_bounds_bracket_true_value():
    phi = exp_power(1)
    lo, hi = phi.eval_bounds(Fraction(3))
    assert float(lo) <= math.exp(3) <= float(hi)
    assert float(hi) - float(lo) < 1e-6
    assert not phi.is_exact()


def test_poly_plus_numeric():
    psi = poly_plus(1)  # t^2
    assert abs(float(psi.eval_numeric(3)) - 9.0) < 1e-12
    psi = poly_plus(2)  # t^(3/2)
    assert abs(float(psi.eval_numeric(4)) - 8.0) < 1e-12


@pytest.mark.parametrize(
    "fn,y,expected",
    [
        (power(2), 9, 3.0),
        (poly_plus(1), 9, 3.0),
        (poly_plus(2), 8, 4.0),
        (exp_power(1), math.e**2, 2.0),
    ],
)
def test_generalized_inverse_closed_forms(fn, y, expected):
    assert abs(float(fn.inverse_numeric(y)) - expected) < 1e-9


@pytest.mark.parametrize("fn", [power(1), power(3), poly_plus(1), exp_power(1)])
def test_inverse_property_on_samples(fn):
    for y in (Fraction(1), Fraction(5), Fraction(50), Fraction(1000)):
        t = fn.inverse_numeric(y)
        assert float(fn.eval_numeric(t)) >= float(y) * (1 - 1e-20)


def test_table_function():
    tab = table_function([(0, 0), (1, 1), (2, 4), (3, 9)])
    assert tab.eval_exact(Fraction(5, 2)) == 4
    assert tab.eval_exact(Fraction(3)) == 9
    assert float(tab.inverse_numeric(4)) == 2.0
    # generalized inverse satisfies psi(psi^-1(y)) >= y on sample values
    for _, v in tab.table:
        if v > 0:
            t = tab.inverse_numeric(v)
            assert tab.eval_exact(Fraction(str(t))) >= v


def test_table_monotonicity_enforced():
    with pytest.raises(PreconditionError):
        table_function([(0, 5), (1, 1)])


def test_parse_function():
    phi = parse_function("power:2")
    assert phi.family == "power" and phi.param == 2
    psi = parse_function("exp_power:1@1/2")
    assert psi.scale == Fraction(1, 2)
    assert parse_function("poly_plus:3/2").param == Fraction(3, 2)
    with pytest.raises(ParseError):
        parse_function("gauss:1")
    with pytest.raises(ParseError):
        parse_function("power")


def test_nonpositive_parameters_rejected():
    with pytest.raises(PreconditionError):
        power(0)
    with pytest.raises(PreconditionError):
        power(1, scale=0)
