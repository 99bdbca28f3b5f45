"""Transport of approximation pairs under rational matrix operations.

For each operation the new pair is built so that the new residual vector
is a fixed rational linear image of the old one:

    add(T), T = T'/N'      q' = N'q,          p' = T'q + N'p      r' = N' r
    left-mul(R)            q' = D q,          p' = D R p          r' = D R r
    right-mul(R)           q' = D R^-1 q,     p' = D p            r' = D r
    inverse                q' = p,            p' = q              r' = -A^-1 r

where D is the common denominator of the rational matrix involved.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import json
import math

from .config import DEFAULT
from .diophantine import (
    ApproxPair,
    enumerate_best_pairs,
    estimate_from_rows,
    residual_exprs,
)
from .errors import DegeneratePair, DimensionMismatch, NonInvertible, ParseError
from .matfun import MoebiusParams, moebius_apply
from .matrix import (
    ExactMatrix,
    exact_inverse,
    expr_inverse,
    mat_add,
    mat_mul,
    operator_norm_upper,
)
from .numerics import expr as E
from .numerics.interval import Interval

KINDS = ("left-mul", "right-mul", "add", "inverse", "moebius")


@dataclass(frozen=True)
class RationalOp:
    kind: str
    R: ExactMatrix | None = None
    moebius: MoebiusParams | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParseError(f"unknown op kind {self.kind!r}")
        if self.kind in ("left-mul", "right-mul", "add") and self.R is None:
            raise ParseError(f"{self.kind} needs a rational matrix")
        if self.kind in ("left-mul", "right-mul"):
            if not self.R.is_square() or self.R.det() == 0:
                raise NonInvertible(f"{self.kind} operand must be invertible")
        if self.kind == "moebius" and self.moebius is None:
            raise ParseError("moebius op needs parameters")

    @classmethod
    def add(cls, T):
        return cls("add", _exact(T))

    @classmethod
    def left_mul(cls, R):
        return cls("left-mul", _exact(R))

    @classmethod
    def right_mul(cls, R):
        return cls("right-mul", _exact(R))

    @classmethod
    def inverse(cls):
        return cls("inverse")

    @classmethod
    def mobius(cls, a, b, c, d):
        return cls("moebius", moebius=MoebiusParams(a, b, c, d))

    def to_json(self):
        if self.kind == "inverse":
            return {"kind": "inverse"}
        if self.kind == "moebius":
            p = self.moebius
            return {"kind": "moebius", "params": [_ft(p.a), _ft(p.b), _ft(p.c), _ft(p.d)]}
        key = "T" if self.kind == "add" else "R"
        return {"kind": self.kind, key: [[_ft(x) for x in r] for r in self.R.rows]}

    @classmethod
    def from_json(cls, doc):
        try:
            kind = doc["kind"]
            if kind == "inverse":
                return cls("inverse")
            if kind == "moebius":
                return cls("moebius", moebius=MoebiusParams(*doc["params"]))
            key = "T" if kind == "add" else "R"
            return cls(kind, ExactMatrix(doc[key]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed op: {exc}") from None


def _ft(x):
    return f"{x.numerator}/{x.denominator}"


def _exact(M):
    return M if isinstance(M, ExactMatrix) else ExactMatrix(M)


def parse_ops(doc):
    """An op, or an ordered list of ops, from JSON (text or decoded)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if isinstance(doc, dict):
        doc = [doc]
    return [RationalOp.from_json(d) for d in doc]


def _scalar(n, s):
    return ExactMatrix([[Fraction(s) if i == j else Fraction(0) for j in range(n)] for i in range(n)])


def expand(op: RationalOp, n: int):
    """Primitive op list equivalent to ``op`` (Moebius maps decompose)."""
    if op.kind != "moebius":
        return [op]
    a, b, c, d = op.moebius.a, op.moebius.b, op.moebius.c, op.moebius.d
    if c == 0:
        return [RationalOp.left_mul(_scalar(n, a / d)), RationalOp.add(_scalar(n, b / d))]
    # (aA+b)/(cA+d) = a/c + ((bc - ad)/c) (cA + d)^-1
    return [RationalOp.left_mul(_scalar(n, c)), RationalOp.add(_scalar(n, d)), RationalOp.inverse(),
            RationalOp.left_mul(_scalar(n, (b * c - a * d) / c)), RationalOp.add(_scalar(n, a / c))]


def apply_op(op, A, config=None):
    """The transformed matrix; ``op`` may be a list applied in order."""
    if isinstance(op, (list, tuple)):
        for o in op:
            A = apply_op(o, A, config)
        return A
    if op.kind == "add":
        return mat_add(A, op.R)
    if op.kind == "left-mul":
        return mat_mul(op.R, A)
    if op.kind == "right-mul":
        return mat_mul(A, op.R)
    if op.kind == "inverse":
        if not A.is_square():
            raise DimensionMismatch("inverse of a non-square matrix")
        if isinstance(A, ExactMatrix):
            return expr_inverse(A).as_exact()
        return expr_inverse(A, config)
    return moebius_apply(op.moebius, A, config)


@dataclass(frozen=True)
class Constants:
    """residual' <= residual_factor * residual, height' <= height_factor * height."""

    residual_factor: Fraction
    height_factor: Fraction


def constants(op, A, config=None) -> Constants:
    ops = op if isinstance(op, (list, tuple)) else [op]
    C, H = Fraction(1), Fraction(1)
    for o in ops:
        for prim in expand(o, A.n):
            c = _prim_constants(prim, A, config)
            C, H = C * c.residual_factor, H * c.height_factor
            A = apply_op(prim, A, config)
    return Constants(C, H)


def _prim_constants(op, A, config):
    if op.kind == "add":
        D = op.R.common_denominator()
        return Constants(Fraction(D), Fraction(D))
    if op.kind == "left-mul":
        D = op.R.common_denominator()
        return Constants(D * op.R.rowsum_norm(), Fraction(D))
    if op.kind == "right-mul":
        inv = exact_inverse(op.R)
        D = inv.common_denominator()
        return Constants(Fraction(D), D * inv.rowsum_norm())
    # inverse: |p| <= ||A|| |q| + residual, residual < 1 for records
    inv = apply_op(op, A, config)
    return Constants(operator_norm_upper(inv, config=config), operator_norm_upper(A, config=config) + 1)


def _transport_prim(op, q, p, A, config):
    if op.kind == "add":
        D = op.R.common_denominator()
        Tp = [[int(x * D) for x in r] for r in op.R.rows]
        q2 = tuple(D * x for x in q)
        p2 = tuple(sum(t * x for t, x in zip(row, q)) + D * y for row, y in zip(Tp, p))
    elif op.kind == "left-mul":
        D = op.R.common_denominator()
        DR = [[int(x * D) for x in r] for r in op.R.rows]
        q2 = tuple(D * x for x in q)
        p2 = tuple(sum(t * y for t, y in zip(row, p)) for row in DR)
    elif op.kind == "right-mul":
        inv = exact_inverse(op.R)
        D = inv.common_denominator()
        Di = [[int(x * D) for x in r] for r in inv.rows]
        q2 = tuple(sum(t * x for t, x in zip(row, q)) for row in Di)
        p2 = tuple(D * y for y in p)
    elif op.kind == "inverse":
        if not A.is_square():
            raise DimensionMismatch("inverse of a non-square matrix")
        q2, p2 = tuple(p), tuple(q)
    else:
        raise ValueError("composite op must be expanded first")
    if all(x == 0 for x in q2):
        raise DegeneratePair(f"{op.kind} maps the pair to q' = 0")
    return q2, p2


def certified_residual(A, q, p, eps=Fraction(1, 2**64), config=None) -> Interval:
    """Enclosure of ||A q - p||_inf for the given (not necessarily nearest) p."""
    if isinstance(A, ExactMatrix):
        v = max(abs(x - y) for x, y in zip(A.apply(q), p))
        return Interval(v)
    encs = E.enclose_many(residual_exprs(A, q, p), eps, config)
    lo = max(iv.mignitude() for iv in encs)
    hi = max(iv.magnitude() for iv in encs)
    return Interval.from_bounds(lo, hi)


def transport_pair(op, pair: ApproxPair, A, config=None) -> ApproxPair:
    """Pair for apply_op(op, A) derived from a pair of A; residual recomputed on the image."""
    ops = op if isinstance(op, (list, tuple)) else [op]
    q, p = tuple(pair.q), tuple(pair.p)
    B = A
    for o in ops:
        for prim in expand(o, B.n if B.is_square() else 0):
            q, p = _transport_prim(prim, q, p, B, config)
            B = apply_op(prim, B, config)
    target = apply_op(ops, A, config)
    res = certified_residual(target, q, p, config=config)
    return ApproxPair(q, p, res, max(abs(x) for x in q))


@dataclass
class PreservationRow:
    source: ApproxPair
    image: ApproxPair
    bound: Fraction
    within: bool
    ratio: float | None
    w_source: float | None
    w_image: float | None
    w_floor: float | None

    def to_json(self):
        return {"q": list(self.source.q), "height": self.source.height,
                "residual": float(self.source.upper), "q_image": list(self.image.q),
                "height_image": self.image.height, "residual_image": float(self.image.upper),
                "bound": float(self.bound), "within": self.within, "ratio": self.ratio,
                "w": self.w_source, "w_image": self.w_image, "w_floor": self.w_floor}


@dataclass
class PreservationReport:
    constants: Constants
    rows: list = field(default_factory=list)
    source_omega: float | None = None
    image_omega: float | None = None

    @property
    def all_within(self):
        return all(r.within for r in self.rows)

    @property
    def exponents_ok(self):
        return all(r.w_image is None or r.w_image >= r.w_floor - 1e-9 for r in self.rows)

    def to_json(self):
        return {"residual_factor": str(self.constants.residual_factor),
                "height_factor": str(self.constants.height_factor),
                "all_within": self.all_within, "exponents_ok": self.exponents_ok,
                "source_omega": self.source_omega, "image_omega": self.image_omega,
                "rows": [r.to_json() for r in self.rows]}


def _ln(x: Fraction):
    return math.log(x.numerator) - math.log(x.denominator)


def verify_preservation(op, A, qmax: int, config=None, table=None) -> PreservationReport:
    """Transport every record pair of A and compare against the predicted constants.

    A sample with residual r at height h (w = log(1/r)/log h) must map to
    w' >= (w log h - log C) / (log h + log C'), the floor implied by the
    constants C (residual) and C' (height).
    """
    config = config or DEFAULT
    table = table or enumerate_best_pairs(A, qmax, config=config)
    consts = constants(op, A, config)
    report = PreservationReport(consts)
    lnC, lnH = _ln(consts.residual_factor), _ln(consts.height_factor)
    for pair in table.rows:
        img = transport_pair(op, pair, A, config)
        bound = consts.residual_factor * pair.upper
        within = img.lower <= bound
        ratio = float(img.upper / pair.upper) if pair.upper > 0 else None
        ws = wi = wf = None
        if pair.height >= 2 and pair.upper > 0 and img.upper > 0:
            lh = math.log(pair.height)
            ws = -_ln(pair.upper) / lh
            wi = -_ln(img.upper) / math.log(img.height)
            wf = (ws * lh - lnC) / (lh + lnH)
        report.rows.append(PreservationRow(pair, img, bound, within, ratio, ws, wi, wf))
    try:
        report.source_omega = estimate_from_rows(table.rows).omega_hat
    except ValueError:
        report.source_omega = math.inf
    ws = [r.w_image for r in report.rows if r.w_image is not None]
    report.image_omega = max(ws) if ws else None
    return report
