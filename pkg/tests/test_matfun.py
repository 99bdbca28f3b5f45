from fractions import Fraction
import math

import pytest
import sympy
from hypothesis import given, strategies as st

from liouvmat.errors import DomainError, NonInvertible, NotPolynomial, OutsideRadius, ParseError
from liouvmat.matfun import (
    EXP,
    LOG1P,
    MoebiusParams,
    curve_degeneracy_test,
    eval_series,
    eval_series_enclosure,
    finite_entries,
    moebius_apply,
    moebius_series,
    parse_series,
    poly_series,
    ratfun_series,
    sect9_powers,
    thm1_block_image,
)
from liouvmat.matrix import ExactMatrix, ExprMatrix, diag_blocks, exact_inverse
from liouvmat.numerics import expr as E

EPS = Fraction(1, 2 ** 50)
N = ExactMatrix([[0, 1], [0, 0]])


def close(F, G, eps=EPS):
    a, b = (eval_series_enclosure_like(M, eps) for M in (F, G))
    return all(x.intersects(y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def eval_series_enclosure_like(M, eps):
    if isinstance(M, ExactMatrix):
        from liouvmat.numerics.interval import Interval
        return [[Interval(x) for x in r] for r in M.rows]
    return M.enclose(eps)


# -- catalogue -------------------------------------------------------------------

@pytest.mark.parametrize("text, radius", [("exp", None), ("log1p", 1), ("poly:[1,2,3]", None),
                                          ("ratfun:[1]/[2,1]", 2), ("moebius:1,0,1,3", 3),
                                          ("ratfun:[1]/[1,0,1]", 1)])
def test_catalogue_radii(text, radius):
    f = parse_series(text)
    if radius is None:
        assert f.radius is None
    else:
        assert abs(float(f.radius) - radius) < 1e-6 and f.radius <= radius


@pytest.mark.parametrize("text", ["sin", "poly:1,2", "ratfun:[1]", "moebius:1,2,3", "moebius:1,2,2,4"])
def test_catalogue_errors(text):
    with pytest.raises((ParseError, DomainError)):
        parse_series(text)


def test_coefficients():
    assert [EXP.coeff(k) for k in range(4)] == [1, 1, Fraction(1, 2), Fraction(1, 6)]
    assert [LOG1P.coeff(k) for k in range(4)] == [0, 1, Fraction(-1, 2), Fraction(1, 3)]
    f = ratfun_series([1], [1, -1])  # 1/(1-z)
    assert [f.coeff(k) for k in range(5)] == [1] * 5
    g = moebius_series(MoebiusParams(0, 1, 1, 2))  # 1/(z+2)
    assert [g.coeff(k) for k in range(4)] == [Fraction((-1) ** k, 2 ** (k + 1)) for k in range(4)]


# -- eval_series --------------------------------------------------------------------

def test_exp_of_zero():
    assert eval_series(EXP, ExactMatrix.zeros(3)) == ExactMatrix.identity(3)


def test_log_of_unipotent_terminates():
    I = ExactMatrix.identity(2)
    # log(I + N) = log1p(N) = N exactly (N^2 = 0)
    assert eval_series(LOG1P, N) == N
    assert all(all(r) for r in finite_entries(N.to_expr()))
    assert I + N == ExactMatrix([[1, 1], [0, 1]])


def test_square_of_thm1_shape():
    a, b = E.sqrt(2), E.Liouville(10)
    F = eval_series(poly_series([0, 0, 1]), ExprMatrix([[a, b], [0, 0]]))
    assert E.provably_zero(E.add(F[0, 0], E.Const(-2)))
    assert E.provably_zero(E.add(F[0, 1], E.neg(E.mul(a, b))))
    assert F[1, 0].text() == "0" and F[1, 1].text() == "0"


def test_exp_matches_scalar():
    A = ExprMatrix([["1/3", 0], [0, "sqrt(2)/4"]])
    encs = eval_series_enclosure(EXP, A, EPS)
    assert abs(float(encs[0][0].mid) - math.exp(1 / 3)) < 1e-14
    assert abs(float(encs[1][1].mid) - math.exp(2 ** 0.5 / 4)) < 1e-14
    assert encs[0][1].mid == 0 and encs[0][1].rad == 0


def test_exp_general_matrix_against_sympy():
    A = ExactMatrix([[Fraction(1, 2), Fraction(1, 3)], [Fraction(-1, 4), Fraction(1, 5)]])
    ref = sympy.Matrix([[sympy.Rational(1, 2), sympy.Rational(1, 3)],
                        [sympy.Rational(-1, 4), sympy.Rational(1, 5)]]).exp()
    encs = eval_series_enclosure(EXP, A, EPS)
    for i in range(2):
        for j in range(2):
            assert abs(encs[i][j].mid - Fraction(str(sympy.N(ref[i, j], 40)))) <= EPS + Fraction(1, 10 ** 35)


def test_outside_radius():
    with pytest.raises(OutsideRadius):
        eval_series(LOG1P, ExprMatrix([["sqrt(2)", 0], [0, 0]]))
    with pytest.raises(OutsideRadius):
        eval_series(LOG1P, ExprMatrix([["1/2", "1/2"], ["1/2", "1/2"]]))


def test_block_consistency():
    for f in (EXP, LOG1P, moebius_series(MoebiusParams(1, 1, 1, 3)), poly_series([2, -1, 5])):
        F = eval_series(f, ExprMatrix([["1/3", "sqrt(2)/5"], [0, 0]]))
        assert F[1, 0].text() == "0"
        c0 = E.eval_enclosure(F[1, 1], EPS)
        assert c0.contains(f.coeff(0))


@given(st.fractions(-1, 1, max_denominator=20), st.fractions(-1, 1, max_denominator=20),
       st.fractions(-1, 1, max_denominator=20))
def test_diagonal_functoriality(x, y, z):
    A = ExactMatrix([[x / 2, y / 2], [0, z / 2]])
    B = ExprMatrix([["sqrt(2)/3"]])
    lhs = eval_series(EXP, diag_blocks([A.to_expr(), B]))
    rhs = diag_blocks([as_expr(eval_series(EXP, A)), as_expr(eval_series(EXP, B))])
    assert close(lhs, rhs)


def as_expr(M):
    return M.to_expr() if isinstance(M, ExactMatrix) else M


# -- Moebius ---------------------------------------------------------------------------

def test_moebius_identity():
    A = ExactMatrix([[1, 2], [3, 4]])
    assert moebius_apply(MoebiusParams(1, 0, 0, 1), A) == A


def test_moebius_reciprocal_shift():
    out = moebius_apply(MoebiusParams(0, 1, 1, 2), N)
    assert out == ExactMatrix([[Fraction(1, 2), Fraction(-1, 4)], [0, Fraction(1, 2)]])
    assert out == exact_inverse(N + ExactMatrix([[2, 0], [0, 2]]))


def test_moebius_singular_denominator():
    with pytest.raises(NonInvertible):
        moebius_apply(MoebiusParams(0, 1, 1, -1), ExactMatrix.identity(2))


@pytest.mark.parametrize("params", [(0, 1, 1, 2), (1, 2, 1, 3), (2, -1, -1, 4), (1, 0, 3, 5)])
def test_moebius_matches_series(params):
    p = MoebiusParams(*params)
    A = ExprMatrix([["sqrt(2)/8", "1/5"], ["-1/7", "cbrt(3)/9"]])
    direct = moebius_apply(p, A)
    series = eval_series(moebius_series(p), A)
    assert close(direct, series, Fraction(1, 2 ** 40))


def test_moebius_series_on_half_norm():
    A = ExactMatrix([[Fraction(1, 4), Fraction(1, 4)], [0, Fraction(1, 2)]])
    p = MoebiusParams(0, 1, 1, 2)
    assert close(moebius_apply(p, A), eval_series(moebius_series(p), A))


# -- block image ------------------------------------------------------------------------

def test_block_image_square():
    a, b = sympy.symbols("a b")
    img = thm1_block_image(poly_series([0, 0, 1]), E.sqrt(3), E.cbrt(2))
    assert E.provably_zero(E.add(img.r, E.Const(-3)))
    assert E.provably_zero(E.add(img.s, E.neg(E.mul(E.cbrt(2), E.sqrt(3)))))
    assert img.c0.value == 0
    # symbolic shift identity r(z) - c0 = s(z) z / b
    z = sympy.Symbol("z")
    cs = [3, -2, 5, 7]
    r = sum(c * z ** k for k, c in enumerate(cs))
    s = b * sum(c * z ** k for k, c in enumerate(cs[1:]))
    assert sympy.expand(r - cs[0] - s * z / b) == 0


def test_block_image_exp_at_zero():
    img = thm1_block_image(EXP, 0, E.sqrt(2))
    r, s, c0 = img.enclose(EPS)
    assert r.contains(1) and c0.contains(1)
    assert s.intersects(E.eval_enclosure(E.sqrt(2), EPS))


@pytest.mark.parametrize("f", [EXP, LOG1P, poly_series([1, 2, 0, 3])])
def test_block_image_equals_series(f):
    # the row-sum norm |a| + |b| must stay below the radius for eval_series
    a, b = E.Const(Fraction(1, 3)), E.div(E.sqrt(2), 4)
    img = thm1_block_image(f, a, b).matrix()
    F = eval_series(f, ExprMatrix([[a, b], [0, 0]]))
    assert close(as_expr(F), img)


# -- power recursion ------------------------------------------------------------------

def test_sect9_small():
    a, b, c = sympy.symbols("a b c")
    P = sect9_powers(a, b, c, 3)
    assert P[0] == (1, 0) and P[1] == (a, b)
    assert sympy.expand(P[2][0] - (a ** 2 + b * c)) == 0 and sympy.expand(P[2][1] - a * b) == 0
    assert sympy.expand(P[3][0] - (a ** 3 + 2 * a * b * c)) == 0
    assert sympy.expand(P[3][1] - (a ** 2 * b + b ** 2 * c)) == 0


def test_sect9_matches_powers():
    a, b, c = sympy.symbols("a b c")
    M = sympy.Matrix([[a, b], [c, 0]])
    for j, (v, w) in enumerate(sect9_powers(a, b, c, 12)):
        Mj = M ** j
        assert sympy.expand(v - Mj[0, 0]) == 0 and sympy.expand(w - Mj[0, 1]) == 0


def test_sect9_negative():
    with pytest.raises(ValueError):
        sect9_powers(1, 1, 1, -1)


# -- degeneracy ---------------------------------------------------------------------------

def test_degeneracy_examples():
    v = curve_degeneracy_test(poly_series([3, 5]))
    assert v.degenerate and v.note == "affine"
    assert curve_degeneracy_test(poly_series([7])).note == "constant"
    v = curve_degeneracy_test(poly_series([0, 0, 1]))
    assert not v.degenerate and v.W == (-2,)


def test_degeneracy_sampled_exp():
    v = curve_degeneracy_test(EXP, "sampled", degree=6)
    assert not v.degenerate
    assert curve_degeneracy_test(poly_series([1, 1]), "sampled").degenerate


def test_degeneracy_not_polynomial():
    with pytest.raises(NotPolynomial):
        curve_degeneracy_test(EXP)


@given(st.lists(st.fractions(-5, 5, max_denominator=7), min_size=1, max_size=7))
def test_degeneracy_iff_degree_at_most_one(cs):
    while len(cs) > 1 and cs[-1] == 0:
        cs = cs[:-1]
    v = curve_degeneracy_test(poly_series(cs))
    assert v.degenerate == (len(cs) <= 2)
    if not v.degenerate:
        # independent symbolic W at the witness
        z = sympy.Symbol("z")
        r = sum(sympy.Rational(c.numerator, c.denominator) * z ** k for k, c in enumerate(cs))
        s = sympy.expand((r - r.subs(z, 0)) / z)
        W = sympy.diff(s, z, 2) * sympy.diff(r, z) - sympy.diff(s, z) * sympy.diff(r, z, 2)
        assert W.subs(z, sympy.Rational(v.witness.numerator, v.witness.denominator)) != 0
