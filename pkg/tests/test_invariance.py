from fractions import Fraction
import json

import pytest
import sympy
from hypothesis import given, strategies as st

from liouvmat.diophantine import ApproxPair, enumerate_best_pairs, goodness_check, nearest_residual
from liouvmat.errors import DimensionMismatch, NonInvertible, ParseError
from liouvmat.invariance import (
    RationalOp,
    apply_op,
    certified_residual,
    constants,
    expand,
    parse_ops,
    transport_pair,
    verify_preservation,
)
from liouvmat.matrix import ExactMatrix, ExprMatrix, exact_inverse
from liouvmat.numerics import expr as E
from liouvmat.numerics.interval import Interval

from demos_fixture import thm1_sqrt2


def I(n, s=1):
    return ExactMatrix([[Fraction(s) if i == j else 0 for j in range(n)] for i in range(n)])


A2 = ExprMatrix([["sqrt(2)", "cbrt(3)"], ["1/5", "sqrt(7)/3"]])


def test_apply_add_half_identity():
    out = apply_op(RationalOp.add(I(2, Fraction(1, 2))), A2)
    assert E.provably_zero(E.add(out[0, 0], E.add(E.neg(E.sqrt(2)), E.Const(Fraction(-1, 2)))))


def test_swap_conjugation_is_involution():
    S = ExactMatrix([[0, 1], [1, 0]])
    ops = [RationalOp.left_mul(S), RationalOp.right_mul(S)] * 2
    out = apply_op(ops, A2)
    assert [x.text() for x in out.entries()] == [x.text() for x in A2.entries()]


def test_moebius_inverse_equivalence():
    A = ExactMatrix([[2, 1], [1, 1]])
    assert apply_op(RationalOp.mobius(0, 1, 1, 0), A) == apply_op(RationalOp.inverse(), A) == exact_inverse(A)


def test_left_mul_needs_invertible():
    with pytest.raises(NonInvertible):
        RationalOp.left_mul([[1, 2], [2, 4]])


def test_inverse_needs_square():
    with pytest.raises(DimensionMismatch):
        apply_op(RationalOp.inverse(), ExprMatrix([["sqrt(2)", 1]]))


def test_ops_json_roundtrip():
    doc = [{"kind": "add", "T": [["1/2", "0"], ["0", "0"]]}, {"kind": "inverse"},
           {"kind": "left-mul", "R": [["2", "0"], ["1", "1"]]}, {"kind": "moebius", "params": ["1", "2", "0", "3"]}]
    ops = parse_ops(json.dumps(doc))
    assert [o.to_json() for o in ops] == [
        {"kind": "add", "T": [["1/2", "0/1"], ["0/1", "0/1"]]}, {"kind": "inverse"},
        {"kind": "left-mul", "R": [["2/1", "0/1"], ["1/1", "1/1"]]},
        {"kind": "moebius", "params": ["1/1", "2/1", "0/1", "3/1"]}]
    with pytest.raises(ParseError):
        parse_ops('{"kind": "twist"}')
    with pytest.raises(ParseError):
        parse_ops('{"kind": "add"}')


# -- transport -----------------------------------------------------------------------

def test_add_transport_example():
    T = ExactMatrix([[Fraction(1, 2), 0], [0, 0]])
    pair = nearest_residual(A2, (3, -1))
    out = transport_pair(RationalOp.add(T), pair, A2)
    assert out.q == (6, -2)
    assert out.p == (3 + 2 * pair.p[0], 2 * pair.p[1])
    # exact symbolic identity (A+T)(2q) - (T'q + 2p) = 2 (A q - p)
    a11, a12, a21, a22, q1, q2, p1, p2 = sympy.symbols("a11 a12 a21 a22 q1 q2 p1 p2")
    A = sympy.Matrix([[a11, a12], [a21, a22]])
    Ts, Tp = sympy.Matrix([[sympy.Rational(1, 2), 0], [0, 0]]), sympy.Matrix([[1, 0], [0, 0]])
    q, p = sympy.Matrix([q1, q2]), sympy.Matrix([p1, p2])
    assert sympy.expand((A + Ts) * (2 * q) - (Tp * q + 2 * p) - 2 * (A * q - p)) == sympy.zeros(2, 1)
    assert out.upper <= 2 * pair.upper and out.lower >= 2 * pair.lower - Fraction(1, 2 ** 60)


def test_printed_translation_rule_does_not_cancel():
    # (N'T'p + N'p, N'q) from the text leaves a residual depending on p
    a, t, q, p = sympy.symbols("a t q p")
    Tn, Np = 1, 2  # T = 1/2
    lhs = (a + t) * (Np * q) - (Np * Tn * p + Np * p)
    assert sympy.expand(lhs.subs(t, sympy.Rational(1, 2)) - Np * (a * q - p)) != 0


def test_left_mul_identity_keeps_pair():
    pair = nearest_residual(A2, (2, 5))
    out = transport_pair(RationalOp.left_mul(I(2)), pair, A2)
    assert (out.q, out.p) == (pair.q, pair.p)


def test_inverse_exact_scalar():
    A = ExactMatrix([[2]])
    pair = ApproxPair((1,), (2,), Interval(0), 1)
    out = transport_pair(RationalOp.inverse(), pair, A)
    assert out.q == (2,) and out.p == (1,) and out.upper == 0


OPS = [RationalOp.add(ExactMatrix([[Fraction(1, 3), 0], [Fraction(2, 5), 1]])),
       RationalOp.left_mul(ExactMatrix([[2, 1], [0, Fraction(1, 3)]])),
       RationalOp.right_mul(ExactMatrix([[1, Fraction(1, 2)], [0, 3]])),
       RationalOp.inverse(),
       RationalOp.mobius(1, 2, 1, 3),
       RationalOp.mobius(2, 1, 0, 3)]


@pytest.mark.parametrize("op", OPS, ids=lambda o: o.kind)
def test_transport_soundness_expr(op):
    t = enumerate_best_pairs(A2, 12)
    C = constants(op, A2)
    for pair in t.rows:
        out = transport_pair(op, pair, A2)
        assert any(out.q)
        assert out.lower <= C.residual_factor * pair.upper
        assert out.height <= C.height_factor * pair.height


exact_entries = st.fractions(-3, 3, max_denominator=9)


@given(st.lists(exact_entries, min_size=4, max_size=4), st.integers(0, 5),
       st.lists(st.integers(-6, 6), min_size=2, max_size=2))
def test_transport_soundness_exact(entries, k, q):
    A = ExactMatrix([entries[:2], entries[2:]])
    ops = [o for o in OPS if o.kind != "inverse" and o.kind != "moebius"]
    if A.det() != 0:
        ops.append(RationalOp.inverse())
    op = ops[k % len(ops)]
    if not any(q):
        q = [1, 0]
    pair = nearest_residual(A, q)
    C = constants(op, A)
    out = transport_pair(op, pair, A)
    B = apply_op(op, A)
    r = max(abs(x - y) for x, y in zip(B.apply(out.q), out.p))
    assert r == out.upper <= C.residual_factor * pair.upper


def test_composition_equals_sequential():
    ops = [OPS[0], OPS[1], OPS[3]]
    pair = nearest_residual(A2, (4, -3))
    once = transport_pair(ops, pair, A2)
    B, p = A2, pair
    for o in ops:
        p = transport_pair(o, p, B)
        B = apply_op(o, B)
    assert (once.q, once.p) == (p.q, p.p)


def test_goodness_preserved():
    op = OPS[1]
    assert goodness_check(A2, 8).kind == "good"
    t = enumerate_best_pairs(A2, 8)
    B = apply_op(op, A2)
    for pair in t.rows:
        out = transport_pair(op, pair, A2)
        assert out.lower > 0
    assert certified_residual(B, out.q, out.p).lo > 0


# -- preservation reports --------------------------------------------------------------

def test_left_mul_two_ratio_exact():
    A = ExactMatrix([[Fraction(355, 1130), Fraction(1, 7)], [Fraction(2, 9), Fraction(5, 11)]])
    rep = verify_preservation(RationalOp.left_mul(I(2, 2)), A, 6)
    ratios = [r.ratio for r in rep.rows if r.ratio is not None]
    assert ratios and all(x == 2.0 for x in ratios)
    assert rep.all_within


def test_inverse_report_on_exact_relation():
    A = ExactMatrix([[2, 1], [1, 1]])
    t = enumerate_best_pairs(A, 3)
    assert t.exact_relation is not None
    inv = exact_inverse(A)
    tinv = enumerate_best_pairs(inv, 3)
    assert tinv.exact_relation is not None
    out = transport_pair(RationalOp.inverse(), t.exact_relation, A)
    assert out.upper == 0


def test_preservation_thm1_add_third():
    A = thm1_sqrt2()
    rep = verify_preservation(RationalOp.add(I(2, Fraction(1, 3))), A, 1000)
    assert rep.constants.residual_factor == 3 and rep.constants.height_factor == 3
    assert rep.all_within and rep.exponents_ok
    assert rep.source_omega == pytest.approx(5.0363, abs=1e-3)


@pytest.mark.xfail(strict=True, reason="max-over-records estimate is set by small heights; "
                                       "tripling heights under add(I/3) lowers it below 0.95x")
def test_preservation_thm1_add_third_ratio():
    A = thm1_sqrt2()
    op = RationalOp.add(I(2, Fraction(1, 3)))
    rep = verify_preservation(op, A, 1000)
    img = enumerate_best_pairs(apply_op(op, A), 1000)
    from liouvmat.diophantine import estimate_from_rows
    assert estimate_from_rows(img.rows).omega_hat >= 0.95 * rep.source_omega


def test_expand_moebius():
    assert [o.kind for o in expand(RationalOp.mobius(1, 2, 0, 3), 2)] == ["left-mul", "add"]
    assert [o.kind for o in expand(RationalOp.mobius(1, 2, 1, 3), 2)] == \
        ["left-mul", "add", "inverse", "left-mul", "add"]
