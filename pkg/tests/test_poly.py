import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from becbound.poly import (CapMismatch, LeadingTerm, TruncatedPoly, UnknownBeyond, from_int_coeffs,
                           or_combine)

coeff_lists = st.lists(st.integers(-5, 5), min_size=0, max_size=8)
probs = st.floats(0.0, 1.0)


def test_constructors():
    assert TruncatedPoly.eps(4).coeffs.tolist() == [0.0, 1.0]
    assert TruncatedPoly.monomial(3, 2.0, cap=5).coeffs.tolist() == [0, 0, 0, 2.0]
    assert TruncatedPoly.bernoulli_weight(2, 2, cap=8).coeffs.tolist() == [0, 0, 1, -2, 1]


def test_monomial_beyond_cap_is_truncated():
    p = TruncatedPoly.monomial(5, cap=3)
    assert p.truncated and p.degree == -1
    assert p.leading_term() == UnknownBeyond(3)


def test_truncation_flag_on_spill():
    p = TruncatedPoly([0, 1, 1], cap=3)
    q = p * p
    assert q.truncated
    assert q.coeffs.tolist() == [0, 0, 1, 2]
    assert not (p * TruncatedPoly.constant(2.0, 3)).truncated


def test_cap_mismatch():
    with pytest.raises(CapMismatch):
        TruncatedPoly.eps(3) + TruncatedPoly.eps(4)


def test_or_combine_of_independent_events():
    e = TruncatedPoly.eps(8)
    p = or_combine(e * e, e * e * e)
    assert p.coeffs.tolist() == [0, 0, 1, 1, 0, -1]


def test_leading_term_and_zero():
    assert from_int_coeffs([0, 0, 0, 2, 2, -5, 2]).leading_term() == LeadingTerm(3, 2.0)
    z = TruncatedPoly([], cap=4)
    lt = z.leading_term()
    assert math.isinf(lt.order) and lt.multiplicity == 0


def test_evaluate_rejects_out_of_range():
    with pytest.raises(ValueError):
        TruncatedPoly.eps().evaluate(1.5)


def test_dict_round_trip():
    p = TruncatedPoly([0, 0, 1, -2, 1], cap=6, truncated=True)
    assert TruncatedPoly.from_dict(p.to_dict()) == p


@given(coeff_lists, coeff_lists, probs)
def test_ring_operations_match_numpy(a, b, x):
    cap = 20
    p, q = TruncatedPoly(a, cap), TruncatedPoly(b, cap)
    pa = np.polynomial.Polynomial(a or [0])
    pb = np.polynomial.Polynomial(b or [0])
    assert (p + q).evaluate(x) == pytest.approx((pa + pb)(x), abs=1e-9)
    assert (p * q).evaluate(x) == pytest.approx((pa * pb)(x), abs=1e-9)
    assert (p - q).evaluate(x) == pytest.approx((pa - pb)(x), abs=1e-9)


@given(st.integers(0, 6), st.integers(0, 6), probs)
def test_bernoulli_weight_values(ones, zeros, x):
    p = TruncatedPoly.bernoulli_weight(ones, zeros, cap=12)
    assert p.evaluate(x) == pytest.approx(x ** ones * (1 - x) ** zeros, abs=1e-12)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), probs)
def test_or_combine_stays_a_probability(degrees, x):
    acc = TruncatedPoly([], cap=32)
    for d in degrees:
        acc = acc.or_combine(TruncatedPoly.monomial(d, cap=32))
    v = acc.evaluate(x)
    assert -1e-12 <= v <= 1 + 1e-12
    assert v >= x ** min(degrees) - 1e-12
