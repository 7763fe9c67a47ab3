"""Exact rational polynomial helpers and rigorous ranges/roots."""

from fractions import Fraction as F

import pytest

from rigdens.intervals import Interval
from rigdens.polys import (
    monotone_root_bracket,
    poly_compose,
    poly_derivative,
    poly_eval,
    poly_eval_iv,
    poly_mul,
    poly_range,
)


def test_eval_exact():
    p = [F(1, 8), F(3), F(2)]  # 1/8 + 3x + 2x^2
    assert poly_eval(p, F(1, 4)) == F(1)
    assert poly_eval(p, F(0)) == F(1, 8)


def test_eval_interval_contains_exact():
    p = [F(1, 3), F(-2), F(5, 7)]
    x = F(9, 11)
    exact = poly_eval(p, x)
    enc = poly_eval_iv(p, Interval(float(x), float(x)))
    assert F(enc.lo) <= exact <= F(enc.hi)


def test_derivative():
    assert poly_derivative([F(1), F(2), F(3)]) == [F(2), F(6)]
    assert poly_derivative([F(5)]) == [F(0)]


def test_compose_quadratics():
    inner = [F(0), F(5, 2), F(-1, 2)]
    comp = poly_compose(inner, inner)
    # degree 4, matching a point evaluation
    assert len(comp) == 5
    x = F(1, 3)
    assert poly_eval(comp, x) == poly_eval(inner, poly_eval(inner, x))


def test_mul():
    assert poly_mul([F(1), F(1)], [F(1), F(-1)]) == [F(1), F(0), F(-1)]


def test_range_contains_samples():
    p = [F(0), F(-1), F(1)]  # x^2 - x: min -1/4 at 1/2
    rng = poly_range(p, Interval(0.0, 1.0))
    assert rng.lo <= -0.25 <= rng.hi
    assert rng.lo >= -0.251  # tight to the advertised relative tolerance
    assert rng.hi >= 0.0


def test_root_bracket_linear_exact():
    lo, hi = monotone_root_bracket([F(0), F(3)], F(1), F(0), F(1))
    assert lo == hi == F(1, 3)


def test_root_bracket_quadratic():
    # 2.5x - 0.5x^2 = 1 has the root (5 - sqrt(17))/2 in [0, 1]
    p = [F(0), F(5, 2), F(-1, 2)]
    lo, hi = monotone_root_bracket(p, F(1), F(0), F(1))
    assert hi - lo <= F(1, 10**14)
    assert poly_eval(p, lo) <= 1 <= poly_eval(p, hi)


def test_root_bracket_requires_sign_change():
    with pytest.raises(ValueError):
        monotone_root_bracket([F(0), F(1), F(1)], F(10), F(0), F(1))
