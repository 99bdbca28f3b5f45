"""Exact rational matrices and matrices of computable reals.

Coordinates are row-major everywhere (row 0 first), which fixes the
identification of m x n matrices with vectors of length m*n.
"""

from fractions import Fraction
import json

from .config import DEFAULT
from .errors import DimensionMismatch, NonInvertible, ParseError, SingularMatrix
from .numerics import expr as E
from .numerics.grammar import expr_from_json, parse_expr
from .numerics.interval import Interval


class _Matrix:
    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(self._coerce(x) for x in row) for row in rows)
        if not rows or not rows[0]:
            raise DimensionMismatch("matrices need at least one row and column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatch("ragged rows")
        self.rows = rows

    @staticmethod
    def _coerce(x):
        raise NotImplementedError

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    @property
    def m(self):
        return len(self.rows)

    @property
    def n(self):
        return len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return type(self) is type(other) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def entries(self):
        """Row-major flat tuple."""
        return tuple(x for row in self.rows for x in row)

    def row(self, i):
        return type(self)([self.rows[i]])

    def col(self, j):
        return type(self)([[r[j]] for r in self.rows])

    def transpose(self):
        return type(self)(list(zip(*self.rows)))

    def is_square(self):
        return self.m == self.n

    def _check_same(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape} differ")

    def __add__(self, other):
        return mat_add(self, other)

    def __sub__(self, other):
        return mat_add(self, mat_scale(other, -1))

    def __neg__(self):
        return mat_scale(self, -1)

    def __matmul__(self, other):
        return mat_mul(self, other)

    def __repr__(self):
        return f"{type(self).__name__}({[[str(x) for x in r] for r in self.rows]})"


class ExactMatrix(_Matrix):
    """Matrix with Fraction entries."""

    __slots__ = ()

    @staticmethod
    def _coerce(x):
        if isinstance(x, E.Const):
            return x.value
        return E.to_fraction(x)

    @classmethod
    def identity(cls, n):
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, m, n=None):
        return cls([[0] * (m if n is None else n) for _ in range(m)])

    def to_expr(self):
        return ExprMatrix([[E.Const(x) for x in r] for r in self.rows])

    def apply(self, v):
        """A @ v for a vector given as a sequence."""
        if len(v) != self.n:
            raise DimensionMismatch("vector length")
        return tuple(sum(a * x for a, x in zip(r, v)) for r in self.rows)

    def common_denominator(self):
        from math import lcm
        d = 1
        for x in self.entries():
            d = lcm(d, x.denominator)
        return d

    def det(self):
        return _det(self.rows)

    def rowsum_norm(self) -> Fraction:
        return max(sum(abs(x) for x in r) for r in self.rows)

    def to_json(self):
        return matrix_to_json(self)


class ExprMatrix(_Matrix):
    """Matrix with RealExpr entries."""

    __slots__ = ()

    @staticmethod
    def _coerce(x):
        if isinstance(x, str):
            return parse_expr(x)
        return E.lift(x)

    @classmethod
    def identity(cls, n):
        return ExactMatrix.identity(n).to_expr()

    @classmethod
    def zeros(cls, m, n=None):
        return ExactMatrix.zeros(m, n).to_expr()

    def to_expr(self):
        return self

    def as_exact(self):
        """ExactMatrix when every entry is a rational literal, else None."""
        if all(isinstance(x, E.Const) for x in self.entries()):
            return ExactMatrix([[x.value for x in r] for r in self.rows])
        return None

    def enclose(self, eps, config=None):
        """Entry enclosures (row-major nested lists) with radius <= eps."""
        flat = E.enclose_many(self.entries(), eps, config)
        n = self.n
        return [flat[i * n:(i + 1) * n] for i in range(self.m)]

    def to_json(self):
        return matrix_to_json(self)


Matrix = (ExactMatrix, ExprMatrix)


def as_expr_matrix(A):
    if isinstance(A, ExprMatrix):
        return A
    if isinstance(A, ExactMatrix):
        return A.to_expr()
    return ExprMatrix(A)


def _promote(A, B):
    if isinstance(A, ExactMatrix) and isinstance(B, ExactMatrix):
        return A, B, ExactMatrix
    return as_expr_matrix(A), as_expr_matrix(B), ExprMatrix


def mat_add(A, B):
    A, B, cls = _promote(A, B)
    A._check_same(B)
    return cls([[x + y for x, y in zip(ra, rb)] for ra, rb in zip(A.rows, B.rows)])


def mat_scale(A, s):
    if isinstance(A, ExactMatrix) and not isinstance(s, E.RealExpr):
        s = E.to_fraction(s)
        return ExactMatrix([[s * x for x in r] for r in A.rows])
    A = as_expr_matrix(A)
    s = E.lift(s)
    return ExprMatrix([[E.mul(s, x) for x in r] for r in A.rows])


def mat_mul(A, B):
    A, B, cls = _promote(A, B)
    if A.n != B.m:
        raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
    cols = list(zip(*B.rows))
    if cls is ExactMatrix:
        return ExactMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in A.rows])
    out = []
    for r in A.rows:
        row = []
        for c in cols:
            acc = E.Const(0)
            for a, b in zip(r, c):
                acc = E.add(acc, E.mul(a, b))
            row.append(acc)
        out.append(row)
    return ExprMatrix(out)


def mat_pow(A, k):
    if not A.is_square():
        raise DimensionMismatch("power of non-square matrix")
    result = type(A).identity(A.n)
    for _ in range(k):
        result = mat_mul(result, A)
    return result


def _det(rows):
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def exact_inverse(R: ExactMatrix) -> ExactMatrix:
    """Gauss-Jordan inverse over the rationals."""
    if not R.is_square():
        raise DimensionMismatch("inverse of non-square matrix")
    n = R.n
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(R.rows)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise SingularMatrix("matrix is singular (exact determinant 0)")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return ExactMatrix([row[n:] for row in a])


def expr_inverse(A, config=None) -> ExprMatrix:
    """Symbolic inverse; pivots are chosen among entries certified nonzero."""
    if isinstance(A, ExactMatrix) or (isinstance(A, ExprMatrix) and A.as_exact() is not None):
        ex = A if isinstance(A, ExactMatrix) else A.as_exact()
        try:
            return exact_inverse(ex).to_expr()
        except SingularMatrix as exc:
            raise NonInvertible(str(exc)) from None
    config = config or DEFAULT
    A = as_expr_matrix(A)
    if not A.is_square():
        raise DimensionMismatch("inverse of non-square matrix")
    n = A.n
    a = [list(r) + [E.Const(int(i == j)) for j in range(n)] for i, r in enumerate(A.rows)]
    for c in range(n):
        p = _certified_pivot([a[r][c] for r in range(c, n)], config)
        if p is None:
            raise NonInvertible("no pivot certified nonzero; matrix singular or undecidable at the precision cap")
        p += c
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [E.div(x, piv) for x in a[c]]
        for r in range(n):
            if r != c and not (isinstance(a[r][c], E.Const) and a[r][c].value == 0):
                f = a[r][c]
                a[r] = [E.add(x, E.neg(E.mul(f, y))) for x, y in zip(a[r], a[c])]
    return ExprMatrix([row[n:] for row in a])


def _certified_pivot(column, config):
    bits = config.start_bits
    while True:
        best, best_mig = None, Fraction(0)
        for i, x in enumerate(column):
            if isinstance(x, E.Const):
                mig = abs(x.value)
            else:
                try:
                    mig = x.enclose(bits).mignitude()
                except E.NeedMorePrecision:
                    mig = Fraction(0)
            if mig > best_mig:
                best, best_mig = i, mig
        if best is not None:
            return best
        if bits >= config.bits_cap or all(isinstance(x, E.Const) for x in column):
            return None
        bits *= 2


def operator_norm_upper(A, eps=Fraction(1, 2**64), config=None) -> Fraction:
    """Certified upper bound on the sup-norm operator norm (max row sum)."""
    if isinstance(A, ExactMatrix):
        return A.rowsum_norm()
    A = as_expr_matrix(A)
    enc = A.enclose(E.to_fraction(eps), config)
    return max(sum(iv.magnitude() for iv in row) for row in enc)


def diag_blocks(blocks):
    """Block-diagonal matrix from square blocks; off-diagonal blocks are exact zeros."""
    blocks = list(blocks)
    if not blocks:
        raise DimensionMismatch("no blocks")
    if any(not b.is_square() for b in blocks):
        raise DimensionMismatch("diagonal blocks must be square")
    exact = all(isinstance(b, ExactMatrix) for b in blocks)
    N = sum(b.n for b in blocks)
    zero = Fraction(0) if exact else E.Const(0)
    rows = [[zero] * N for _ in range(N)]
    off = 0
    for b in blocks:
        for i in range(b.n):
            for j in range(b.n):
                rows[off + i][off + j] = b[i, j]
        off += b.n
    return ExactMatrix(rows) if exact else ExprMatrix(rows)


BlockSpec = list


# -- file format ----------------------------------------------------------------

def _has_text_form(x):
    if not isinstance(x, (E.Const, E.Liouville, E.Root, E.Add, E.Mul, E.Div, E.Neg, E.Pow, E.Blocks)):
        return False
    return all(_has_text_form(c) for c in x.children())


def matrix_to_json(A):
    if isinstance(A, ExactMatrix):
        entries = [[f"{x.numerator}/{x.denominator}" for x in r] for r in A.rows]
    else:
        entries = [[x.text() if _has_text_form(x) else x.to_json() for x in r] for r in A.rows]
    return {"rows": A.m, "cols": A.n, "entries": entries}


def matrix_from_json(doc):
    """ExprMatrix from the JSON document; string entries use the text grammar."""
    try:
        bindings = doc.get("bindings", {})
        rows = []
        for r in doc["entries"]:
            rows.append([parse_expr(x, bindings) if isinstance(x, str) else expr_from_json(x) for x in r])
        A = ExprMatrix(rows)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed matrix document: {exc}") from None
    if "rows" in doc and (A.m, A.n) != (doc["rows"], doc["cols"]):
        raise DimensionMismatch("declared dims do not match entries")
    return A


def load_matrix(path):
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def interval_matrix(A, eps, config=None):
    """Nested lists of Interval for any matrix type."""
    if isinstance(A, ExactMatrix):
        return [[Interval(x) for x in r] for r in A.rows]
    return as_expr_matrix(A).enclose(eps, config)
