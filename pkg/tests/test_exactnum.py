import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from quadreg.exactnum import (ONE, ZERO, ExactMatrix, FieldMismatch, NotSplitOverField, QuadNum,
                              char_poly_roots, common_field, exact_gram_parts, integer_split,
                              is_square, poly_roots, sqrt_int, sqrt_rational,
                              squarefree_decomposition)

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@given(st.integers(0, 10**6))
def test_squarefree_decomposition(n):
    s, D = squarefree_decomposition(n)
    assert s * s * D == n
    assert D == 1 or all(D % (p * p) for p in range(2, math.isqrt(D) + 1))


@given(st.integers(0, 10**5))
def test_sqrt_int_squares_back(n):
    r = sqrt_int(n)
    assert r * r == n
    assert r.sign() >= 0


@given(st.fractions(min_value=0, max_value=100, max_denominator=50))
def test_sqrt_rational(x):
    r = sqrt_rational(x)
    assert r * r == x


def test_sqrt_examples():
    assert sqrt_int(16) == 4
    assert sqrt_int(8) == QuadNum(0, 2, 2)
    assert str(sqrt_int(12)) in {"2*sqrt(3)", "2√3"} or sqrt_int(12) == QuadNum(0, 2, 3)
    assert is_square(144) and not is_square(6) and not is_square(-4)


@settings(max_examples=200)
@given(st.sampled_from([2, 3, 5]), small, small, small, small)
def test_order_agrees_with_floats(D, a1, b1, a2, b2):
    x, y = QuadNum(a1, b1, D), QuadNum(a2, b2, D)
    if x == y:
        assert not (x < y) and x <= y
    elif abs(float(x) - float(y)) > 1e-9:
        assert (x < y) == (float(x) < float(y))
        assert x.sign() == int(np.sign(float(x))) or abs(float(x)) < 1e-9


@given(st.sampled_from([2, 3, 5]), small, small)
def test_conjugate_and_norm(D, a, b):
    x = QuadNum(a, b, D)
    assert x * x.conjugate() == x.norm()
    assert hash(QuadNum(a, 0, D)) == hash(QuadNum(a))


def test_field_mismatch():
    with pytest.raises(FieldMismatch):
        sqrt_int(2) + sqrt_int(3)
    with pytest.raises(FieldMismatch):
        common_field([sqrt_int(2), sqrt_int(3)])
    assert common_field([ONE, sqrt_int(5), QuadNum(3)]) == 5


def test_immutable_and_exact_only():
    with pytest.raises(AttributeError):
        ONE.a = 3
    with pytest.raises(TypeError):
        QuadNum(0.5)


def test_zero_division():
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


def test_tuple_round_trip():
    x = QuadNum(Fraction(-3, 7), Fraction(5, 2), 3)
    assert QuadNum.from_tuple(x.to_tuple()) == x


# ---------------------------------------------------------------------------
# matrices


def _sym(M):
    return sympy.Matrix([[sympy.Rational(x.a.numerator, x.a.denominator) for x in row] for row in M.tolist()])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n),
                                                       min_size=n, max_size=n)))
def test_det_inverse_char_poly_against_sympy(rows):
    M = ExactMatrix(rows)
    S = sympy.Matrix(rows)
    assert M.det() == QuadNum(Fraction(int(S.det())))
    cp = S.charpoly().all_coeffs()[::-1]
    assert [c for c in M.char_poly()] == [QuadNum(Fraction(int(c))) for c in cp]
    if S.det() != 0:
        assert M @ M.inverse() == ExactMatrix.identity(len(rows))
    assert M.rank() == S.rank()


def test_char_poly_roots_quadratic_field():
    # eigenvalues 1 +- sqrt(2)
    M = ExactMatrix([[1, 2], [1, 1]])
    assert char_poly_roots(M) == [1 + sqrt_int(2), 1 - sqrt_int(2)]


def test_poly_roots_irreducible_cubic():
    with pytest.raises(NotSplitOverField):
        poly_roots([-2, 0, 0, 1])  # t^3 - 2


def test_poly_roots_repeated():
    # (t - 1)^2 (t^2 - 5)
    roots = poly_roots([-5, 10, -4, -2, 1])
    assert sorted(roots, reverse=True) == [sqrt_int(5), ONE, ONE, -sqrt_int(5)]


def test_nullspace_and_rref():
    M = ExactMatrix([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    ns = M.nullspace()
    assert len(ns) == 1
    assert all(v == 0 for v in M.apply(ns[0]))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=3, max_size=3),
                min_size=1, max_size=5))
def test_exact_gram_parts_matches_pairwise(rows):
    vecs = [[QuadNum(a, b, 3) for a, b in r] for r in rows]
    ga, gb, den = exact_gram_parts(vecs, 3)
    for i, u in enumerate(vecs):
        for j, v in enumerate(vecs):
            ip = sum((x * y for x, y in zip(u, v)), ZERO)
            assert QuadNum(Fraction(int(ga[i, j]), den), Fraction(int(gb[i, j]), den), 3) == ip


def test_integer_split_falls_back_to_objects():
    big = QuadNum(Fraction(2**40, 3))
    A, B, den = integer_split([[big, ONE]], 1)
    assert A.dtype == object and den == 3
