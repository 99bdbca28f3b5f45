from fractions import Fraction
import random

import pytest
from hypothesis import given, strategies as st

from liouvmat.config import DEFAULT
from liouvmat.errors import BudgetExceeded, DimensionMismatch, ParseError
from liouvmat.identities import (
    HALL,
    NcPolynomial,
    hall_check,
    nc_eval,
    random_matrix,
    standard_polynomial,
    weak_independence_sample,
)
from liouvmat.matrix import ExactMatrix

from oracles import mat_mul

E12 = [[0, 1], [0, 0]]
E21 = [[0, 0], [1, 0]]
ints = st.integers(-4, 4)
mat2 = st.lists(st.lists(ints, min_size=2, max_size=2), min_size=2, max_size=2)


def word_product(word, bind, n):
    out = [[int(i == j) for j in range(n)] for i in range(n)]
    for x in word:
        out = mat_mul(out, bind[x])
    return out


def test_parse_and_text():
    P = NcPolynomial.parse("5*X^2*Y^3*X - 5*X^3*Y^3")
    assert P.terms == {("X", "X", "Y", "Y", "Y", "X"): 5, ("X", "X", "X", "Y", "Y", "Y"): -5}
    assert NcPolynomial.parse(P.text()) == P
    assert NcPolynomial.parse("X*Y - Y*X + Y*X - X*Y").is_zero()
    assert NcPolynomial.parse("1/2*(X + Y)^2").terms[("X", "Y")] == Fraction(1, 2)
    with pytest.raises(ParseError):
        NcPolynomial.parse("X + * Y")


def test_commutator_on_diagonal():
    P = NcPolynomial.parse("X*Y - Y*X")
    assert nc_eval(P, [[[2, 0], [0, 3]], [[5, 0], [0, -1]]]) == ExactMatrix.zeros(2)


def test_single_variable():
    A = [[1, 2], [3, 4]]
    assert nc_eval(NcPolynomial.var("X"), [A]) == ExactMatrix(A)


@pytest.mark.xfail(strict=True, reason="X = E12 squares to 0, so both words vanish")
def test_nilpotent_example_nonzero():
    P = NcPolynomial.parse("5*X^2*Y^3*X - 5*X^3*Y^3")
    assert nc_eval(P, [E12, E21]) != ExactMatrix.zeros(2)


def test_nilpotent_example_and_nonzero_instance():
    P = NcPolynomial.parse("5*X^2*Y^3*X - 5*X^3*Y^3")
    assert not P.is_zero()
    assert nc_eval(P, [E12, E21]) == ExactMatrix.zeros(2)
    X, Y = [[1, 1], [0, 1]], [[1, 0], [1, 1]]
    ref = [[5 * a - 5 * b for a, b in zip(r1, r2)]
           for r1, r2 in zip(word_product("XXYYYX", {"X": X, "Y": Y}, 2),
                             word_product("XXXYYY", {"X": X, "Y": Y}, 2))]
    assert nc_eval(P, [X, Y]) == ExactMatrix(ref) != ExactMatrix.zeros(2)


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        nc_eval(NcPolynomial.parse("X*Y"), [E12])
    with pytest.raises(DimensionMismatch):
        nc_eval(NcPolynomial.parse("X*Y"), [E12, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]])


@given(mat2, mat2, st.fractions(-3, 3, max_denominator=5), st.fractions(-3, 3, max_denominator=5))
def test_eval_linear_and_multiplicative(X, Y, a, b):
    P, Q = NcPolynomial.parse("X*Y*X - Y"), NcPolynomial.parse("Y^2 + 3*X")
    args = [X, Y]
    lin = nc_eval(a * P + b * Q, args)
    sep = nc_eval(P, args)
    sep2 = nc_eval(Q, args)
    assert lin == ExactMatrix([[a * u + b * v for u, v in zip(r, s)] for r, s in zip(sep.rows, sep2.rows)])
    assert nc_eval(P * Q, args) == nc_eval(P, args) @ nc_eval(Q, args)


# -- Hall -------------------------------------------------------------------------

def test_hall_example():
    res = hall_check(E12, E12, E21)
    C = ExactMatrix(E12) @ ExactMatrix(E21) - ExactMatrix(E21) @ ExactMatrix(E12)
    assert C == ExactMatrix([[1, 0], [0, -1]]) and C @ C == ExactMatrix.identity(2)
    assert res.holds and res.lhs == res.rhs == ExactMatrix(E12)


def test_hall_identity_matrices():
    I = ExactMatrix.identity(2)
    res = hall_check(I, I, I)
    assert res.holds and res.lhs == ExactMatrix.zeros(2)


def test_hall_random():
    rng = random.Random(7)
    assert all(hall_check(*(random_matrix(rng, 2, 9) for _ in range(3))).holds for _ in range(100))


def test_hall_fails_on_3x3_polynomial_level():
    rng = random.Random(1)
    vals = [nc_eval(HALL, [random_matrix(rng, 3, 3) for _ in range(3)]) for _ in range(5)]
    assert any(v != ExactMatrix.zeros(3) for v in vals)
    with pytest.raises(DimensionMismatch):
        hall_check(*([[[1, 0, 0], [0, 1, 0], [0, 0, 1]]] * 3))


# -- standard polynomials ------------------------------------------------------------

def test_s2():
    assert standard_polynomial(2) == NcPolynomial.parse("X1*X2 - X2*X1")
    assert nc_eval(standard_polynomial(2), [E12, E21]) == ExactMatrix([[1, 0], [0, -1]])


def test_sk_term_count_and_cap():
    assert len(standard_polynomial(5).terms) == 120
    with pytest.raises(BudgetExceeded):
        standard_polynomial(9)
    assert len(standard_polynomial(9, DEFAULT.with_(nc_degree_cap=9)).terms) == 362880


@given(st.lists(mat2, min_size=3, max_size=3), st.integers(0, 2))
def test_sk_alternating(ms, i):
    s = standard_polynomial(3)
    swapped = list(ms)
    swapped[i], swapped[(i + 1) % 3] = swapped[(i + 1) % 3], swapped[i]
    assert nc_eval(s, swapped) == -nc_eval(s, ms)


def test_amitsur_levitzki_samples():
    rng = random.Random(3)
    s4, s6 = standard_polynomial(4), standard_polynomial(6)
    assert all(nc_eval(s4, [random_matrix(rng, 2, 9) for _ in range(4)]) == ExactMatrix.zeros(2)
               for _ in range(100))
    assert all(nc_eval(s6, [random_matrix(rng, 3, 5) for _ in range(6)]) == ExactMatrix.zeros(3)
               for _ in range(20))


@pytest.mark.parametrize("k, n", [(3, 2), (5, 3)])
def test_odd_standard_polynomials_have_witnesses(k, n):
    v = weak_independence_sample(standard_polynomial(k), n, 10)
    assert v.kind == "nonzero-witness" and v.trials <= 10
    assert nc_eval(standard_polynomial(k), v.witness) == v.value != ExactMatrix.zeros(n)


# -- sampling --------------------------------------------------------------------------

def test_sampling_examples():
    assert weak_independence_sample(standard_polynomial(4), 2, 50).kind == "all-zero-on-sample"
    v = weak_independence_sample(NcPolynomial.parse("X*Y - Y*X"), 2, 10)
    assert v.kind == "nonzero-witness" and v.trials <= 3
    hall2 = HALL.substitute({"Z": NcPolynomial.var("Y")})
    assert hall2.is_zero() or weak_independence_sample(hall2, 2, 30).kind == "all-zero-on-sample"
    hall_xy = HALL.substitute({"Z": NcPolynomial.var("X")})
    assert weak_independence_sample(hall_xy, 2, 30).kind == "all-zero-on-sample"


def test_sampling_deterministic():
    P = NcPolynomial.parse("X*Y*X - Y*X*X")
    a, b = (weak_independence_sample(P, 2, 10, seed=5) for _ in range(2))
    assert a == b
