"""Power series of square matrices, Moebius maps and the 2x2 block formulas.

``f(A) = sum_k c_k A^k``. Entries that are structurally finite sums (no walk
of unbounded length in the nonzero pattern of A) are returned as exact
expressions; every other entry is a lazy node whose enclosure at a given
precision comes from a truncated interval sum plus a majorant tail bound.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable
import math

import numpy as np

from .config import DEFAULT
from .errors import (
    NonInvertible,
    NotPolynomial,
    OutsideRadius,
    ParseError,
    PrecisionCap,
    SingularMatrix,
    TailBoundFailure,
    DomainError,
)
from .matrix import (
    ExactMatrix,
    ExprMatrix,
    as_expr_matrix,
    exact_inverse,
    expr_inverse,
    mat_add,
    mat_mul,
    mat_scale,
    matrix_from_json,
    matrix_to_json,
    operator_norm_upper,
)
from .numerics import expr as E
from .numerics import grammar
from .numerics.interval import Interval

MAX_TERMS = 100_000


# -- coefficient series ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SeriesSpec:
    """Scalar power series sum c_k z^k.

    ``tail(rho, K)`` must return a rational upper bound for
    sum_{k >= K} |c_k| rho^k, or None when it cannot bound that tail.
    ``radius`` is None for entire functions. ``poly`` holds the coefficient
    list of a polynomial.
    """

    name: str
    coeff: Callable[[int], Fraction]
    radius: Fraction | None
    tail: Callable[[Fraction, int], Fraction | None]
    poly: tuple | None = None

    def c(self, k):
        return self.coeff(k)

    def shift(self) -> "SeriesSpec":
        """The series sum_j c_{j+1} z^j."""
        base = self

        def tail(rho, K):
            if rho == 0:
                return Fraction(0) if K >= 1 else abs(E.to_fraction(base.coeff(1)))
            t = base.tail(rho, K + 1)
            return None if t is None else t / rho

        poly = (self.poly[1:] or (Fraction(0),)) if self.poly is not None else None
        return SeriesSpec(f"shift({self.name})", lambda k: base.coeff(k + 1), self.radius, tail, poly)

    def to_json(self):
        return self.name


def _poly_tail(coeffs):
    def tail(rho, K):
        return sum((abs(c) * rho ** k for k, c in enumerate(coeffs) if k >= K), Fraction(0))
    return tail


def poly_series(coeffs) -> SeriesSpec:
    cs = tuple(E.to_fraction(c) for c in coeffs) or (Fraction(0),)
    name = "poly:[" + ",".join(_ftext(c) for c in cs) + "]"
    return SeriesSpec(name, lambda k: cs[k] if k < len(cs) else Fraction(0), None, _poly_tail(cs), cs)


def _ftext(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@lru_cache(maxsize=None)
def _inv_factorial(k):
    return Fraction(1, math.factorial(k))


def _exp_tail(rho, K):
    if K + 1 <= rho:
        return None
    return rho ** K * _inv_factorial(K) / (1 - rho / (K + 1))


EXP = SeriesSpec("exp", _inv_factorial, None, _exp_tail)


def _log1p_coeff(k):
    return Fraction(0) if k == 0 else Fraction((-1) ** (k + 1), k)


def _log1p_tail(rho, K):
    if rho >= 1:
        return None
    K = max(K, 1)
    return rho ** K / (K * (1 - rho))


LOG1P = SeriesSpec("log1p", _log1p_coeff, Fraction(1), _log1p_tail)


def _poly_value(coeffs, t):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _majorant_radius(den):
    """Largest t (found by bisection) with sum_{k>=1} |d_k| t^k < |d_0|."""
    d0 = abs(den[0])
    rest = [Fraction(0)] + [abs(d) for d in den[1:]]
    if all(d == 0 for d in rest):
        return None
    G = lambda t: _poly_value(rest, t)
    hi = Fraction(1)
    while G(hi) < d0:
        hi *= 2
    lo = Fraction(0)
    for _ in range(48):
        mid = (lo + hi) / 2
        if G(mid) < d0:
            lo = mid
        else:
            hi = mid
    return lo


def ratfun_series(num, den) -> SeriesSpec:
    """Taylor series at 0 of num(z)/den(z); requires den(0) != 0.

    ``radius`` is the distance to the nearest pole of den (numerical roots,
    rounded down). Tail bounds are certified only below the majorant radius
    t* (sum_{k>=1}|d_k| t^k = |d_0|), which never exceeds it; between the two
    the evaluation fails with TailBoundFailure.
    """
    num = tuple(E.to_fraction(c) for c in num) or (Fraction(0),)
    den = tuple(E.to_fraction(c) for c in den)
    if not den or den[0] == 0:
        raise DomainError("denominator must not vanish at 0")
    name = "ratfun:[" + ",".join(map(_ftext, num)) + "]/[" + ",".join(map(_ftext, den)) + "]"
    cache = []

    def coeff(k):
        while len(cache) <= k:
            j = len(cache)
            nj = num[j] if j < len(num) else Fraction(0)
            s = sum((den[i] * cache[j - i] for i in range(1, min(j, len(den) - 1) + 1)), Fraction(0))
            cache.append((nj - s) / den[0])
        return cache[k]

    tstar = _majorant_radius(den)
    if tstar is None:  # constant denominator: a polynomial
        spec = poly_series([c / den[0] for c in num])
        return SeriesSpec(name, spec.coeff, None, spec.tail, spec.poly)
    absnum = [abs(c) for c in num]
    absden = [Fraction(0)] + [abs(d) for d in den[1:]]

    def tail(rho, K):
        if rho >= tstar:
            return None
        rp = (rho + tstar) / 2
        # positive majorant N(t)/(|d0| - G(t)) bounds |c_k| rp^k
        M = _poly_value(absnum, rp) / (abs(den[0]) - _poly_value(absden, rp))
        q = rho / rp
        return M * q ** K / (1 - q)

    return SeriesSpec(name, coeff, max(tstar, _pole_distance(den)), tail)


def _pole_distance(den):
    while den and den[-1] == 0:
        den = den[:-1]
    if len(den) == 2:
        return abs(den[0] / den[1])
    roots = np.roots([float(c) for c in reversed(den)])
    r = float(np.min(np.abs(roots)))
    return Fraction(r * (1 - 1e-9)).limit_denominator(1 << 40)


@dataclass(frozen=True)
class MoebiusParams:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, E.to_fraction(getattr(self, k)))
        if self.a * self.d - self.b * self.c == 0:
            raise DomainError("Moebius map needs ad - bc != 0")

    def text(self):
        return ",".join(_ftext(x) for x in (self.a, self.b, self.c, self.d))


def moebius_series(p: MoebiusParams) -> SeriesSpec:
    if p.d == 0:
        raise DomainError("(az+b)/(cz+d) with d = 0 has a pole at 0")
    spec = ratfun_series([p.b, p.a], [p.d, p.c])
    return SeriesSpec("moebius:" + p.text(), spec.coeff, spec.radius, spec.tail, spec.poly)


def _parse_list(text):
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError(f"expected [c0,c1,...], got {text!r}")
    body = text[1:-1].strip()
    try:
        return [Fraction(x.strip()) for x in body.split(",")] if body else []
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def parse_series(text: str) -> SeriesSpec:
    """Catalogue names: exp, log1p, poly:[...], ratfun:[num]/[den], moebius:a,b,c,d."""
    text = text.strip()
    if text == "exp":
        return EXP
    if text == "log1p":
        return LOG1P
    head, _, body = text.partition(":")
    if head == "poly":
        return poly_series(_parse_list(body))
    if head == "ratfun":
        num, sep, den = body.partition("]/[")
        if not sep:
            raise ParseError("ratfun expects [num]/[den]")
        return ratfun_series(_parse_list(num + "]"), _parse_list("[" + den))
    if head == "moebius":
        try:
            vals = [Fraction(x.strip()) for x in body.split(",")]
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        if len(vals) != 4:
            raise ParseError("moebius expects a,b,c,d")
        return moebius_series(MoebiusParams(*vals))
    raise ParseError(f"unknown series {text!r}")


# -- structural analysis -----------------------------------------------------------

def _is_zero(x):
    return isinstance(x, E.Const) and x.value == 0


def finite_entries(A):
    """Boolean matrix: True where sum_k c_k (A^k)_ij has finitely many nonzero terms.

    (A^k)_ij can be nonzero only along a walk of length k from i to j in the
    nonzero pattern; the set of such lengths is finite iff no walk of length
    in [n, 2n) exists.
    """
    n = A.n
    pat = [[not _is_zero(A[i, j]) for j in range(n)] for i in range(n)]
    reach = [[i == j for j in range(n)] for i in range(n)]
    long_walk = [[False] * n for _ in range(n)]
    for k in range(1, 2 * n):
        reach = [[any(reach[i][l] and pat[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        if k >= n:
            for i in range(n):
                for j in range(n):
                    long_walk[i][j] |= reach[i][j]
    return [[not long_walk[i][j] for j in range(n)] for i in range(n)]


def _coeff_expr(f, k):
    c = f.coeff(k)
    return c if isinstance(c, E.RealExpr) else E.Const(c)


def _finite_sum(f, A, upto):
    """sum_{k<upto} c_k A^k with exact expression arithmetic."""
    n = A.n
    exact = isinstance(A, ExactMatrix)
    acc = None
    P = ExactMatrix.identity(n) if exact else ExprMatrix.identity(n)
    for k in range(upto):
        c = f.coeff(k)
        if exact and not isinstance(c, E.RealExpr):
            term = mat_scale(P, c)
        else:
            term = mat_scale(as_expr_matrix(P), _coeff_expr(f, k))
        acc = term if acc is None else mat_add(acc, term)
        if k + 1 < upto:
            P = mat_mul(P, A)
    return acc


class SeriesEvaluator:
    """Shared enclosure cache for the infinite entries of f(A)."""

    def __init__(self, f: SeriesSpec, A, config=None):
        self.f = f
        self.A = as_expr_matrix(A)
        self.config = config or DEFAULT
        self._cache = {}
        self._rho = None

    def rho(self):
        if self._rho is None:
            rho = operator_norm_upper(self.A, Fraction(1, 1 << 40), self.config)
            # coarser bound keeps rho**K cheap when it still fits the radius
            coarse = Fraction(math.ceil(rho * (1 << 20)), 1 << 20)
            if self.f.radius is None or coarse < self.f.radius:
                rho = coarse
            if self.f.radius is not None and rho >= self.f.radius:
                raise OutsideRadius(
                    f"norm bound {float(rho):.6g} is not below the radius {float(self.f.radius):.6g} of {self.f.name}")
            self._rho = rho
        return self._rho

    def truncation(self, bits):
        """Smallest K with tail(rho, K) <= 2**-(bits+3)."""
        rho = self.rho()
        target = Fraction(1, 1 << (bits + 3))
        for K in range(1, MAX_TERMS):
            t = self.f.tail(rho, K)
            if t is not None and t <= target:
                return K, t
        raise TailBoundFailure(f"no usable tail bound for {self.f.name} within {MAX_TERMS} terms")

    def at(self, bits):
        hit = self._cache.get(bits)
        if hit is not None:
            return hit
        K, tail = self.truncation(bits)
        n = self.A.n
        w = bits + 16 + K.bit_length()
        while True:
            memo = {}
            try:
                Aiv = [[self.A[i, j].enclose(w, memo) for j in range(n)] for i in range(n)]
                out = self._sum(Aiv, K, w, memo)
            except E.NeedMorePrecision:
                out = None
            if out is not None and all(iv.rad + tail <= Fraction(1, 1 << (bits + 2)) for r in out for iv in r):
                break
            if w > 4 * self.config.bits_cap:
                raise PrecisionCap(f"series {self.f.name} not resolved at {w} bits")
            w *= 2
        res = [[Interval(iv.mid, iv.rad + tail).rounded(bits) for iv in r] for r in out]
        self._cache[bits] = res
        return res

    def _sum(self, Aiv, K, w, memo):
        n = len(Aiv)
        P = [[Interval(Fraction(int(i == j))) for j in range(n)] for i in range(n)]
        acc = [[Interval(Fraction(0)) for _ in range(n)] for _ in range(n)]
        for k in range(K):
            c = self.f.coeff(k)
            civ = c.enclose(w, memo) if isinstance(c, E.RealExpr) else Interval(c)
            if civ.mid != 0 or civ.rad != 0:
                acc = [[(acc[i][j] + civ * P[i][j]).rounded(w) for j in range(n)] for i in range(n)]
            if k + 1 < K:
                P = [[_dot(P[i], [Aiv[l][j] for l in range(n)]).rounded(w) for j in range(n)] for i in range(n)]
        return acc


def _dot(xs, ys):
    acc = Interval(Fraction(0))
    for x, y in zip(xs, ys):
        acc = acc + x * y
    return acc


class SeriesEntry(E.RealExpr):
    """Entry (i, j) of f(A), evaluated through a shared SeriesEvaluator."""

    __slots__ = ("evaluator", "i", "j")
    kind = "series"

    def __init__(self, evaluator: SeriesEvaluator, i: int, j: int):
        self.evaluator, self.i, self.j = evaluator, i, j

    def children(self):
        return tuple(self.evaluator.A.entries())

    def _enc(self, bits, memo):
        return self.evaluator.at(bits)[self.i][self.j]

    def _build_text(self):
        return f"series({self.evaluator.f.name}, {matrix_to_json(self.evaluator.A)['entries']}, {self.i}, {self.j})"

    def to_json(self):
        return {"kind": "series", "f": self.evaluator.f.name,
                "A": matrix_to_json(self.evaluator.A), "i": self.i, "j": self.j}

    def to_sympy(self, symbols):
        return symbols.setdefault(self.text(), __import__("sympy").Symbol(f"F{len(symbols)}", real=True))


def _series_from_json(doc):
    f = parse_series(doc["f"])
    return SeriesEntry(SeriesEvaluator(f, matrix_from_json(doc["A"])), doc["i"], doc["j"])


grammar.JSON_KINDS["series"] = _series_from_json


def eval_series(f: SeriesSpec, A, eps=Fraction(1, 2**32), config=None):
    """f(A) = sum_k c_k A^k for square A.

    Polynomials and structurally finite entries are exact; when some entry
    is an infinite sum the row-sum norm bound must lie below the radius and
    the entries are lazy nodes (enclosure radius -> 0 with precision). The
    returned matrix is checked once at ``eps``.
    """
    config = config or DEFAULT
    if not A.is_square():
        from .errors import DimensionMismatch
        raise DimensionMismatch("series of a non-square matrix")
    n = A.n
    if f.poly is not None:
        return _finite_sum(f, A, len(f.poly))
    fin = finite_entries(as_expr_matrix(A))
    exact_part = _finite_sum(f, A, n)  # walks of length < n
    if all(all(r) for r in fin):
        return exact_part
    ev = SeriesEvaluator(f, A, config)
    ev.rho()
    ex = as_expr_matrix(exact_part)
    rows = [[ex[i, j] if fin[i][j] else SeriesEntry(ev, i, j) for j in range(n)] for i in range(n)]
    out = ExprMatrix(rows)
    E.enclose_many([x for x in out.entries() if isinstance(x, SeriesEntry)], E.to_fraction(eps), config)
    return out


def eval_series_enclosure(f, A, eps=Fraction(1, 2**32), config=None):
    """Nested lists of Interval with radius <= eps."""
    F = eval_series(f, A, eps, config)
    if isinstance(F, ExactMatrix):
        return [[Interval(x) for x in r] for r in F.rows]
    return F.enclose(E.to_fraction(eps), config)


# -- Moebius maps -----------------------------------------------------------------------

def moebius_apply(p: MoebiusParams, A, config=None):
    """(aA + bI)(cA + dI)^-1 through rational matrix operations."""
    n = A.n
    I = ExactMatrix.identity(n)
    num = mat_add(mat_scale(A, p.a), mat_scale(I, p.b))
    den = mat_add(mat_scale(A, p.c), mat_scale(I, p.d))
    if isinstance(den, ExactMatrix) or as_expr_matrix(den).as_exact() is not None:
        ex = den if isinstance(den, ExactMatrix) else as_expr_matrix(den).as_exact()
        try:
            inv = exact_inverse(ex)
        except SingularMatrix as exc:
            raise NonInvertible(f"cA + dI is singular: {exc}") from None
        if isinstance(num, ExactMatrix):
            return mat_mul(num, inv)
        return mat_mul(num, inv.to_expr())
    return mat_mul(num, expr_inverse(den, config))


# -- 2x2 block image --------------------------------------------------------------------

@dataclass(frozen=True)
class BlockImage:
    """f([[a, b], [0, 0]]) = [[r(a), s(a)], [0, c0]] with s(a) = b * sum_j c_{j+1} a^j."""

    r: E.RealExpr
    s: E.RealExpr
    c0: E.RealExpr

    def matrix(self):
        return ExprMatrix([[self.r, self.s], [E.Const(0), self.c0]])

    def enclose(self, eps, config=None):
        return tuple(E.enclose_many([self.r, self.s, self.c0], E.to_fraction(eps), config))


def _scalar_series(f, a, config):
    """f(a) as an expression: exact sum for polynomials, lazy node otherwise."""
    if f.poly is not None:
        acc = E.Const(0)
        for c in reversed(f.poly):
            acc = E.add(E.mul(acc, a), E.Const(c))
        return acc
    if _is_zero(a):
        return _coeff_expr(f, 0)
    ev = SeriesEvaluator(f, ExprMatrix([[a]]), config)
    ev.rho()
    return SeriesEntry(ev, 0, 0)


def thm1_block_image(f: SeriesSpec, a, b, eps=Fraction(1, 2**32), config=None) -> BlockImage:
    """r(a) = f(a), s(a) = b * (shifted series at a), c0 (never divides by a)."""
    a, b = E.lift(a), E.lift(b)
    r = _scalar_series(f, a, config)
    s = E.mul(b, _scalar_series(f.shift(), a, config))
    img = BlockImage(r, s, _coeff_expr(f, 0))
    img.enclose(eps, config)
    return img


# -- power recursion for [[a, b], [c, 0]] ----------------------------------------------

def sect9_powers(a, b, c, J: int):
    """[(v_j, w_j)] for j = 0..J: the (1,1), (1,2) entries of [[a,b],[c,0]]^j.

    v_j = a v_{j-1} + bc v_{j-2}, w_j = b v_{j-1}.
    """
    if J < 0:
        raise ValueError("J must be >= 0")
    out = [(1, 0)]
    if J >= 1:
        out.append((a, b))
    for _ in range(2, J + 1):
        v1, v2 = out[-1][0], out[-2][0]
        out.append((a * v1 + b * c * v2, b * v1))
    return out


# -- curve degeneracy --------------------------------------------------------------------

def _pderiv(p):
    return [k * c for k, c in enumerate(p)][1:] or [Fraction(0)]


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return out


def _psub(p, q):
    n = max(len(p), len(q))
    p = list(p) + [Fraction(0)] * (n - len(p))
    q = list(q) + [Fraction(0)] * (n - len(q))
    out = [x - y for x, y in zip(p, q)]
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def wronskian_poly(coeffs):
    """W = s'' r' - s' r'' for r = sum c_k z^k and s = sum c_{k+1} z^k."""
    r = [E.to_fraction(c) for c in coeffs] or [Fraction(0)]
    s = r[1:] or [Fraction(0)]
    r1, r2 = _pderiv(r), _pderiv(_pderiv(r))
    s1, s2 = _pderiv(s), _pderiv(_pderiv(s))
    return _psub(_pmul(s2, r1), _pmul(s1, r2))


@dataclass(frozen=True)
class DegeneracyVerdict:
    degenerate: bool
    W: tuple = ()
    witness: Fraction | None = None
    note: str = ""

    def to_json(self):
        return {"degenerate": self.degenerate, "W": [_ftext(c) for c in self.W],
                "witness": None if self.witness is None else _ftext(self.witness), "note": self.note}


def curve_degeneracy_test(f, mode="exact", degree=6, grid=None, tol=Fraction(1, 10**9)) -> DegeneracyVerdict:
    """Does W = s''r' - s'r'' vanish identically for the curve (r(z), s(z))?

    ``exact`` needs a polynomial and decides on the polynomial W. ``sampled``
    truncates the series at ``degree`` and evaluates W on a rational grid
    (default k/10, k = 1..9); that answer is evidence, not proof.
    """
    if isinstance(f, (list, tuple)):
        f = poly_series(f)
    if mode == "exact":
        if f.poly is None:
            raise NotPolynomial(f"{f.name} is not a polynomial")
        coeffs = list(f.poly)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        W = wronskian_poly(coeffs)
        if all(c == 0 for c in W):
            note = "constant" if len(coeffs) == 1 else "affine"
            return DegeneracyVerdict(True, tuple(W), None, note)
        z = 0
        while _poly_value(W, Fraction(z)) == 0:
            z += 1
        return DegeneracyVerdict(False, tuple(W), Fraction(z), "")
    if mode != "sampled":
        raise ValueError("mode must be 'exact' or 'sampled'")
    coeffs = [E.to_fraction(f.coeff(k)) for k in range(degree + 1)]
    W = wronskian_poly(coeffs)
    grid = grid or [Fraction(k, 10) for k in range(1, 10)]
    vals = [(abs(_poly_value(W, Fraction(z))), Fraction(z)) for z in grid]
    lo, hi = min(vals), max(vals)
    if hi[0] > tol:
        return DegeneracyVerdict(False, tuple(W), hi[1], f"sampled: min |W| on grid = {float(lo[0]):.3g}")
    return DegeneracyVerdict(True, tuple(W), None, f"sampled: |W| <= {float(tol):.3g} on the whole grid")
