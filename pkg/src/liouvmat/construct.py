"""Explicit matrix families, digit splits and counterexample maps."""

from dataclasses import dataclass, field
from fractions import Fraction
import math

from .config import DEFAULT
from .diophantine import (
    enumerate_best_pairs,
    estimate_from_rows,
    goodness_check,
    nearest_residual,
)
from .errors import DimensionMismatch, DomainError
from .matrix import ExprMatrix, as_expr_matrix, diag_blocks
from .numerics import expr as E
from .numerics.schedule import Schedule


def _lift(x):
    if isinstance(x, str):
        from .numerics.grammar import parse_expr
        return parse_expr(x)
    return E.lift(x)


def thm1_matrix(a, b, n=2, pad=None) -> ExprMatrix:
    """[[a, b], [0, 0]]; for n > 2 the block-diagonal diag([[a,b],[0,0]], pad).

    ``pad`` defaults to b times the identity of size n - 2.
    """
    a, b = _lift(a), _lift(b)
    A = ExprMatrix([[a, b], [0, 0]])
    if n == 2:
        return A
    if n < 2:
        raise DimensionMismatch("n >= 2")
    if pad is None:
        pad = ExprMatrix([[b if i == j else E.Const(0) for j in range(n - 2)] for i in range(n - 2)])
    if pad.shape != (n - 2, n - 2):
        raise DimensionMismatch(f"pad block must be {(n - 2, n - 2)}")
    return diag_blocks([A, as_expr_matrix(pad)])


def sect9_matrix(a, b, c) -> ExprMatrix:
    return ExprMatrix([[_lift(a), _lift(b)], [_lift(c), 0]])


def diag_compose(blocks) -> ExprMatrix:
    return as_expr_matrix(diag_blocks(blocks))


# -- Hauser-style row/column analysis ----------------------------------------------

def _budget_qmax(qmax, n, config):
    q = qmax
    while (2 * q + 1) ** n > config.enum_budget:
        q = int((config.enum_budget ** (1 / n) - 1) // 2)
        q = max(1, min(q, qmax - 1))
        while (2 * q + 1) ** n > config.enum_budget and q > 1:
            q -= 1
    return q


@dataclass
class HauserFinding:
    index: int
    kind: str  # row: dependent | high-exponent | neither; column: estimate
    qmax: int
    omega_hat: float | None = None
    relation: tuple | None = None

    def to_json(self):
        return {"index": self.index, "kind": self.kind, "qmax": self.qmax,
                "omega_hat": self.omega_hat,
                "relation": None if self.relation is None else [list(x) for x in self.relation]}


@dataclass
class HauserReport:
    rows: list = field(default_factory=list)
    columns: list = field(default_factory=list)
    good: str = ""
    flag: str | None = None

    def to_json(self):
        return {"rows": [r.to_json() for r in self.rows], "columns": [c.to_json() for c in self.columns],
                "goodness": self.good, "flag": self.flag}


def _omega(M, qmax, config):
    # small heights are dominated by accidents of tiny coefficients, so only
    # records of height >= sqrt(qmax) enter
    table = enumerate_best_pairs(M, qmax, config=config)
    try:
        return estimate_from_rows(table.rows, math.isqrt(qmax)).omega_hat
    except ValueError:
        return math.inf


def hauser_analysis(A, qmax: int, row_high=None, column_large=2.0, config=None) -> HauserReport:
    """Row-wise dependence/exponent findings and column-wise exponent estimates.

    A 1 x n row is "dependent" when an integer relation with 1 is found (or
    cannot be excluded), "high-exponent" when its estimate reaches
    ``row_high`` (default n + 1). Estimates use records of height at least
    sqrt(qmax). Heights are reduced to fit the enumeration budget; the
    height actually used is reported.
    """
    config = config or DEFAULT
    A = as_expr_matrix(A)
    m, n = A.shape
    row_high = n + 1 if row_high is None else row_high
    rep = HauserReport()
    for i in range(m):
        R = A.row(i)
        q = _budget_qmax(qmax, n, config)
        v = goodness_check(R, q, config=config)
        if v.kind != "good":
            rep.rows.append(HauserFinding(i, "dependent", q, None, (v.q, v.p)))
            continue
        w = _omega(R, q, config)
        rep.rows.append(HauserFinding(i, "high-exponent" if w >= row_high else "neither", q, w))
    for j in range(n):
        Cm = A.col(j)
        q = _budget_qmax(qmax, 1, config)
        v = goodness_check(Cm, q, config=config)
        if v.kind != "good":
            rep.columns.append(HauserFinding(j, "dependent", q, None, (v.q, v.p)))
            continue
        w = _omega(Cm, q, config)
        rep.columns.append(HauserFinding(j, "large" if w >= column_large else "estimate", q, w))
    qa = _budget_qmax(qmax, n, config)
    rep.good = goodness_check(A, qa, config=config).kind
    if rep.good == "good" and any(c.kind == "large" for c in rep.columns):
        rep.flag = "sufficient condition for Liouville behavior at tested heights"
    return rep


# -- digit-interleaving split ------------------------------------------------------------

def _split_entry(x, base, cuts, part):
    if isinstance(x, E.Const) and x.value == 0:
        return E.Const(0)
    return E.Blocks(x, base, cuts, part)


def erdos_split(A, cuts, base: int = 10):
    """(B, C) with B + C = A entrywise by interleaving base-``base`` digit blocks.

    Digit positions are counted after the point from 0. With cuts
    c1 < c2 < ..., C takes [0, c1) and every even block [c_{2i}, c_{2i+1}),
    B takes the integer part and every odd block [c_{2i-1}, c_{2i}).
    """
    if base < 2:
        raise DomainError("base >= 2")
    if not isinstance(cuts, Schedule):
        cuts = Schedule("list", values=tuple(cuts))
    A = as_expr_matrix(A)
    B = ExprMatrix([[_split_entry(x, base, cuts, "B") for x in r] for r in A.rows])
    C = ExprMatrix([[_split_entry(x, base, cuts, "C") for x in r] for r in A.rows])
    return B, C


@dataclass(frozen=True)
class SplitWitness:
    part: str
    Q: int
    block: tuple  # zero digit range [lo, hi) of this part
    bound: Fraction  # m * base**-(hi - lo)
    pair: object

    def to_json(self):
        return {"part": self.part, "Q": str(self.Q), "block": list(self.block),
                "bound": str(self.bound), "q0_exp": None,
                "residual_upper": str(self.pair.upper), "residual_lower": str(self.pair.lower)}


def split_witnesses(A, cuts, base: int = 10, depth: int = 3, config=None):
    """Witness pairs q = (base**c_j, 0, ..., 0) for j = 1..depth.

    Block j = [c_j, c_{j+1}) belongs to B for odd j, so C vanishes there and
    gets the witness; for even j it is the other way round.
    """
    if not isinstance(cuts, Schedule):
        cuts = Schedule("list", values=tuple(cuts))
    A = as_expr_matrix(A)
    B, C = erdos_split(A, cuts, base)
    out = []
    for j in range(1, depth + 1):
        lo, hi = cuts(j), cuts(j + 1)  # ScheduleTooShort past a finite list
        part, M = ("C", C) if j % 2 == 1 else ("B", B)
        Q = base ** lo
        q = (Q,) + (0,) * (A.n - 1)
        pair = nearest_residual(M, q, Fraction(1, base ** (hi - lo + 8)), config)
        out.append(SplitWitness(part, Q, (lo, hi), Fraction(1, base ** (hi - lo)), pair))
    return out


def digit_stream(x, base, depth, config=None):
    """First ``depth`` digits after the point of a real x (certified floor)."""
    x = E.lift(x)
    if isinstance(x, E.Blocks) and x.base == base:
        # mask the argument's digits; the parts are base-adic rationals on finite cut lists
        full = digit_stream(x.arg, base, depth, config)
        bounds = [0] + x.cut_positions(depth)
        keep = [False] * depth
        for j, lo in enumerate(bounds):
            hi = bounds[j + 1] if j + 1 < len(bounds) else depth
            mine = (j % 2 == 1) if x.part == "B" else (j % 2 == 0)
            for k in range(lo, min(hi, depth)):
                keep[k] = mine
        return [d if k else 0 for d, k in zip(full, keep)]
    scale = base ** depth
    bits = (scale.bit_length() + 16)
    config = config or DEFAULT
    while True:
        iv = x.enclose(bits) if not isinstance(x, E.Const) else None
        lo, hi = (x.value, x.value) if iv is None else (iv.lo, iv.hi)
        f_lo, f_hi = math.floor(lo * scale), math.floor(hi * scale)
        if f_lo == f_hi:
            frac = f_lo - math.floor(lo) * scale
            return [int(d) for d in str(frac).zfill(depth)] if base == 10 else _digits(frac, base, depth)
        if bits > config.bits_cap:
            raise DomainError("digit boundary not resolved (value may be a base-adic rational)")
        bits *= 2


def _digits(v, base, depth):
    out = []
    for _ in range(depth):
        v, d = divmod(v, base)
        out.append(d)
    return out[::-1]


# -- counterexample maps -------------------------------------------------------------------

def ier_map(A) -> ExprMatrix:
    """Matrix of the shape of A with every entry equal to a_11."""
    A = as_expr_matrix(A)
    if A.shape == (1, 1):
        raise DomainError("ier_map needs (m, n) != (1, 1)")
    a = A[0, 0]
    return ExprMatrix([[a] * A.n for _ in range(A.m)])


@dataclass(frozen=True)
class MordellParams:
    N: int = 6
    height_bound: int = 50


def analog_map(a, params: MordellParams = MordellParams()) -> ExprMatrix:
    """(a_1, ..., a_{m-1}, cbrt(a_{m-1}^2 - N))^T."""
    a = [_lift(x) for x in a]
    if len(a) < 2:
        raise DimensionMismatch("m >= 2")
    last = E.cbrt(E.add(E.power(a[-2], 2), E.Const(-params.N)))
    return ExprMatrix([[x] for x in a[:-1]] + [[last]])


def variety_residual(M: ExprMatrix, params: MordellParams):
    """X_m^3 + N - X_{m-1}^2 as an expression (zero on the variety)."""
    x, y = M[M.m - 2, 0], M[M.m - 1, 0]
    return E.add(E.add(E.power(y, 3), E.Const(params.N)), E.neg(E.power(x, 2)))


@dataclass(frozen=True)
class MordellVerdict:
    found: bool
    points: tuple = ()

    def to_json(self):
        return {"verdict": "point-found" if self.found else "no-point-found",
                "points": [[str(x), str(y)] for x, y in self.points]}


def mordell_sanity(params: MordellParams) -> MordellVerdict:
    """Rational points of Y^2 = X^3 + N with numerators and denominators <= bound."""
    Bd = params.height_bound
    if Bd < 1:
        raise ValueError("height_bound >= 1")
    pts = []
    for d in range(1, Bd + 1):
        for num in range(-Bd, Bd + 1):
            if math.gcd(num, d) != 1:
                continue
            X = Fraction(num, d)
            rhs = X ** 3 + params.N
            if rhs < 0:
                continue
            yn, yd = math.isqrt(rhs.numerator), math.isqrt(rhs.denominator)
            if yn * yn != rhs.numerator or yd * yd != rhs.denominator:
                continue
            if yn > Bd or yd > Bd:
                continue
            Y = Fraction(yn, yd)
            pts.append((X, Y))
            if Y:
                pts.append((X, -Y))
    pts.sort()
    return MordellVerdict(bool(pts), tuple(pts))
