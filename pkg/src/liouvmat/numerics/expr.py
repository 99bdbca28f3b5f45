"""Computable reals as immutable expression trees with enclosure evaluation.

Every node implements ``_enc(bits, memo)`` returning an :class:`Interval`
whose radius shrinks roughly like ``2**-bits``. Evaluation to a requested
width is driven by :func:`eval_enclosure`, which escalates the working
precision until the target radius is met or the configured cap is hit.
"""

from fractions import Fraction
import math

import sympy

from ..config import DEFAULT
from ..errors import (
    DivergentSeries,
    DivisionByZeroEnclosure,
    DomainError,
    LiouvmatError,
    OverflowPolicyError,
    PrecisionCap,
    ScheduleTooShort,
)
from .interval import Interval, ZERO
from .schedule import FACTORIAL, Schedule, checked_terms


class NeedMorePrecision(Exception):
    """Raised inside evaluation when a decision needs a tighter enclosure."""

    def __init__(self, reason, kind="precision"):
        super().__init__(reason)
        self.kind = kind


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot make a rational from {x!r}")


class RealExpr:
    __slots__ = ("_text",)

    kind = "abstract"

    # -- evaluation -------------------------------------------------------
    def enclose(self, bits: int, memo=None) -> Interval:
        if memo is None:
            memo = {}
        key = (id(self), bits)
        hit = memo.get(key)
        if hit is None:
            hit = self._enc(bits, memo)
            memo[key] = hit
        return hit

    def _enc(self, bits, memo):
        raise NotImplementedError

    # -- structure --------------------------------------------------------
    def children(self):
        return ()

    def text(self) -> str:
        try:
            return self._text
        except AttributeError:
            t = self._build_text()
            self._text = t
            return t

    def _build_text(self):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError

    def to_sympy(self, symbols):
        raise NotImplementedError

    def is_rational(self):
        return False

    def __eq__(self, other):
        return isinstance(other, RealExpr) and self.text() == other.text()

    def __hash__(self):
        return hash(self.text())

    def __repr__(self):
        return f"RealExpr({self.text()})"

    def __str__(self):
        return self.text()

    # -- arithmetic sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return power(self, k)


class Const(RealExpr):
    __slots__ = ("value",)
    kind = "rational"

    def __init__(self, value):
        self.value = to_fraction(value)

    def _enc(self, bits, memo):
        v = self.value
        if (v.denominator & (v.denominator - 1)) == 0 and v.denominator <= (1 << bits):
            return Interval(v)
        return Interval(v).rounded(bits)

    def is_rational(self):
        return True

    def _build_text(self):
        v = self.value
        s = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return f"({s})" if v < 0 or v.denominator != 1 else s

    def to_json(self):
        v = self.value
        return {"kind": "rational", "value": f"{v.numerator}/{v.denominator}"}

    def to_sympy(self, symbols):
        return sympy.Rational(self.value.numerator, self.value.denominator)


class Liouville(RealExpr):
    """sum_{k>=1} base**(-e(k)) for a strictly increasing schedule e."""

    __slots__ = ("base", "schedule")
    kind = "liouville"

    def __init__(self, base: int, schedule: Schedule = FACTORIAL):
        if int(base) < 2:
            raise ValueError("Liouville base must be >= 2")
        self.base = int(base)
        self.schedule = schedule

    def _enc(self, bits, memo):
        b = self.base
        lb = b.bit_length() - 1  # b >= 2**lb
        need = bits + 3
        terms = []
        k = 1
        while True:
            try:
                e = self.schedule(k)
            except ScheduleTooShort:
                # finite schedule: the series is a finite sum
                return Interval(_partial_sum(b, terms)).rounded(bits)
            if terms and e <= terms[-1]:
                raise DivergentSeries(f"schedule not increasing at k={k}")
            terms.append(e)
            if e * lb >= need:
                break
            k += 1
        # terms[-1] is e(K+1); tail <= b**-e(K+1) * b/(b-1) <= 2**-(bits+2)
        partial = _partial_sum(b, terms[:-1])
        r = Fraction(1, 1 << (bits + 3))
        return Interval(partial + r, r).rounded(bits)

    def truncation(self, K: int, budget_bits=None) -> Fraction:
        return liouville_truncation(self.base, self.schedule, K, budget_bits)

    def _build_text(self):
        return f"liouville({self.base}, {self.schedule.text()})"

    def to_json(self):
        return {"kind": "liouville", "base": self.base, "schedule": self.schedule.to_json()}

    def to_sympy(self, symbols):
        # Liouville numbers are transcendental, so treating the value as a free
        # symbol only ever proves identities that hold for it as well.
        return symbols.setdefault(self.text(), sympy.Symbol(f"L{len(symbols)}", positive=True))


def _partial_sum(b, exps):
    if not exps:
        return Fraction(0)
    top = exps[-1]
    return Fraction(sum(b ** (top - e) for e in exps), b ** top)


def liouville_truncation(base: int, schedule: Schedule, K: int, budget_bits=None) -> Fraction:
    """sum_{k=1..K} base**-e(k) as an exact rational with denominator base**e(K)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if base < 2:
        raise ValueError("base must be >= 2")
    budget = DEFAULT.truncation_bits if budget_bits is None else budget_bits
    exps = checked_terms(schedule, K)
    if exps[-1] * math.log2(base) > budget:
        raise OverflowPolicyError(
            f"e({K}) = {exps[-1]} needs more than the {budget}-bit truncation budget")
    return _partial_sum(base, exps)


class Root(RealExpr):
    """Real n-th root; odd n accepts negative arguments."""

    __slots__ = ("n", "arg")
    kind = "root"

    def __init__(self, n: int, arg: RealExpr):
        if n < 2:
            raise ValueError("root degree must be >= 2")
        self.n = int(n)
        self.arg = arg
        if self.n % 2 == 0:
            # cheap construction-time check; straddling cases are left to evaluation
            try:
                provably_negative = arg.enclose(64).hi < 0
            except (NeedMorePrecision, LiouvmatError, ZeroDivisionError):
                provably_negative = False
            if provably_negative:
                raise DomainError(f"even root of negative value {arg.text()}")

    def children(self):
        return (self.arg,)

    def _enc(self, bits, memo):
        x = self.arg.enclose(bits, memo)
        if self.n % 2 == 0:
            if x.hi < 0:
                raise DomainError(f"even root of negative value {self.arg.text()}")
            if x.lo < 0:
                if x.mid == 0 and x.rad == 0:
                    return Interval(ZERO)
                raise NeedMorePrecision("even root argument straddles 0", "domain")
        return x.root(self.n, bits + 2).rounded(bits)

    def _build_text(self):
        if self.n == 2:
            return f"sqrt({self.arg.text()})"
        if self.n == 3:
            return f"cbrt({self.arg.text()})"
        return f"root({self.n}, {self.arg.text()})"

    def to_json(self):
        return {"kind": "root", "n": self.n, "arg": self.arg.to_json()}

    def to_sympy(self, symbols):
        a = self.arg.to_sympy(symbols)
        if self.n % 2:
            return sympy.real_root(a, self.n)
        return sympy.root(a, self.n)


class Add(RealExpr):
    __slots__ = ("a", "b")
    kind = "add"

    def __init__(self, a, b):
        self.a, self.b = a, b

    def children(self):
        return (self.a, self.b)

    def _enc(self, bits, memo):
        return (self.a.enclose(bits, memo) + self.b.enclose(bits, memo)).rounded(bits)

    def _build_text(self):
        return f"({self.a.text()} + {self.b.text()})"

    def to_json(self):
        return {"kind": "add", "args": [self.a.to_json(), self.b.to_json()]}

    def to_sympy(self, symbols):
        return self.a.to_sympy(symbols) + self.b.to_sympy(symbols)


class Mul(RealExpr):
    __slots__ = ("a", "b")
    kind = "mul"

    def __init__(self, a, b):
        self.a, self.b = a, b

    def children(self):
        return (self.a, self.b)

    def _enc(self, bits, memo):
        return (self.a.enclose(bits, memo) * self.b.enclose(bits, memo)).rounded(bits)

    def _build_text(self):
        return f"({self.a.text()} * {self.b.text()})"

    def to_json(self):
        return {"kind": "mul", "args": [self.a.to_json(), self.b.to_json()]}

    def to_sympy(self, symbols):
        return self.a.to_sympy(symbols) * self.b.to_sympy(symbols)


class Div(RealExpr):
    __slots__ = ("a", "b")
    kind = "div"

    def __init__(self, a, b):
        self.a, self.b = a, b

    def children(self):
        return (self.a, self.b)

    def _enc(self, bits, memo):
        den = self.b.enclose(bits, memo)
        if den.contains_zero():
            if den.rad == 0:
                raise DivisionByZeroEnclosure(f"division by exact zero: {self.b.text()}")
            raise NeedMorePrecision("denominator enclosure contains 0", "division")
        return (self.a.enclose(bits, memo) / den).rounded(bits)

    def _build_text(self):
        return f"({self.a.text()} / {self.b.text()})"

    def to_json(self):
        return {"kind": "div", "args": [self.a.to_json(), self.b.to_json()]}

    def to_sympy(self, symbols):
        return self.a.to_sympy(symbols) / self.b.to_sympy(symbols)


class Neg(RealExpr):
    __slots__ = ("a",)
    kind = "neg"

    def __init__(self, a):
        self.a = a

    def children(self):
        return (self.a,)

    def _enc(self, bits, memo):
        return -self.a.enclose(bits, memo)

    def _build_text(self):
        return f"(-{self.a.text()})"

    def to_json(self):
        return {"kind": "neg", "arg": self.a.to_json()}

    def to_sympy(self, symbols):
        return -self.a.to_sympy(symbols)


class Pow(RealExpr):
    __slots__ = ("a", "k")
    kind = "pow"

    def __init__(self, a, k: int):
        self.a, self.k = a, int(k)

    def children(self):
        return (self.a,)

    def _enc(self, bits, memo):
        x = self.a.enclose(bits, memo)
        if self.k < 0 and x.contains_zero():
            raise NeedMorePrecision("negative power of enclosure containing 0", "division")
        return (x ** self.k).rounded(bits)

    def _build_text(self):
        return f"({self.a.text()} ^ {self.k})"

    def to_json(self):
        return {"kind": "pow", "arg": self.a.to_json(), "k": self.k}

    def to_sympy(self, symbols):
        return self.a.to_sympy(symbols) ** self.k


class Blocks(RealExpr):
    """One half of a digit-interleaving split of ``arg`` in base ``base``.

    Digit index k (0-based) carries weight base**-(k+1). With cuts
    c1 < c2 < ... from ``cuts``, block 0 is [0, c1) and block j is
    [c_j, c_{j+1}). Part "B" holds the integer part and the odd blocks,
    part "C" holds block 0 and the even blocks. A finite cut list leaves
    its last block open-ended.
    """

    __slots__ = ("arg", "base", "cuts", "part")
    kind = "blocks"

    def __init__(self, arg, base: int, cuts: Schedule, part: str):
        if part not in ("B", "C"):
            raise ValueError("part must be 'B' or 'C'")
        if base < 2:
            raise ValueError("base must be >= 2")
        self.arg, self.base, self.cuts, self.part = arg, int(base), cuts, part

    def children(self):
        return (self.arg,)

    def cut_positions(self, upto: int):
        """Cuts c_j with c_j < upto, plus the first cut >= upto when it exists."""
        out = []
        k = 1
        while True:
            if self.cuts.length is not None and k > self.cuts.length:
                return out
            c = self.cuts(k)
            if out and c <= out[-1]:
                raise DivergentSeries("cut schedule not increasing")
            out.append(c)
            if c >= upto:
                return out
            k += 1

    def digit_part(self, floor_scaled, depth):
        """Exact truncated value of this part given floor(x * base**depth)."""
        b = self.base
        cuts = self.cut_positions(depth)
        int_part = floor_scaled // b ** depth
        bounds = [0] + cuts
        total = 0  # numerator over b**depth
        for j in range(len(bounds)):
            lo = bounds[j]
            hi = bounds[j + 1] if j + 1 < len(bounds) else depth
            lo, hi = min(lo, depth), min(hi, depth)
            if lo >= hi:
                continue
            mine = (j % 2 == 1) if self.part == "B" else (j % 2 == 0)
            if not mine:
                continue
            chunk = floor_scaled // b ** (depth - hi) - (floor_scaled // b ** (depth - lo)) * b ** (hi - lo)
            total += chunk * b ** (depth - hi)
        value = Fraction(total, b ** depth)
        if self.part == "B":
            value += int_part
        return value

    def _enc(self, bits, memo):
        b = self.base
        depth = -(-(bits + 3) // (b.bit_length() - 1))
        x = self.arg.enclose(bits + depth * b.bit_length() + 8, memo)
        scale = b ** depth
        lo_f = math.floor(x.lo * scale)
        hi_f = math.floor(x.hi * scale)
        if lo_f != hi_f:
            raise NeedMorePrecision("digit boundary straddled", "digits")
        trunc = self.digit_part(lo_f, depth)
        r = Fraction(1, 2 * scale)
        return Interval(trunc + r, r).rounded(bits)

    def _build_text(self):
        return f"blocks({self.arg.text()}, {self.base}, {self.cuts.text()}, {self.part})"

    def to_json(self):
        return {"kind": "blocks", "arg": self.arg.to_json(), "base": self.base,
                "cuts": self.cuts.to_json(), "part": self.part}

    def to_sympy(self, symbols):
        return symbols.setdefault(self.text(), sympy.Symbol(f"D{len(symbols)}", real=True))


# -- smart constructors ---------------------------------------------------

def lift(x) -> RealExpr:
    if isinstance(x, RealExpr):
        return x
    return Const(to_fraction(x))


def _const(x):
    return x.value if isinstance(x, Const) else None


def add(a, b):
    a, b = lift(a), lift(b)
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca + cb)
    if ca == 0:
        return b
    if cb == 0:
        return a
    return Add(a, b)


def neg(a):
    a = lift(a)
    c = _const(a)
    if c is not None:
        return Const(-c)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def mul(a, b):
    a, b = lift(a), lift(b)
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca * cb)
    if ca == 0 or cb == 0:
        return Const(0)
    if ca == 1:
        return b
    if cb == 1:
        return a
    if ca == -1:
        return neg(b)
    if cb == -1:
        return neg(a)
    return Mul(a, b)


def div(a, b):
    a, b = lift(a), lift(b)
    ca, cb = _const(a), _const(b)
    if cb == 0:
        raise DivisionByZeroEnclosure("division by the rational literal 0")
    if ca is not None and cb is not None:
        return Const(ca / cb)
    if cb == 1:
        return a
    if ca == 0:
        return Const(0)
    return Div(a, b)


def power(a, k: int):
    a = lift(a)
    k = int(k)
    c = _const(a)
    if c is not None:
        return Const(c ** k)
    if k == 0:
        return Const(1)
    if k == 1:
        return a
    if isinstance(a, Root) and k > 0 and k % a.n == 0:
        return power(a.arg, k // a.n)
    return Pow(a, k)


def sqrt(x):
    return Root(2, lift(x))


def cbrt(x):
    return Root(3, lift(x))


# -- top-level evaluation ---------------------------------------------------

def _start_bits(eps: Fraction, config) -> int:
    need = max(1, math.ceil(math.log2(eps.denominator) - math.log2(eps.numerator))) if eps < 1 else 1
    return max(config.start_bits, need + 8)


def eval_enclosure(x, eps, config=None) -> Interval:
    """Enclosure of ``x`` with radius <= eps, escalating precision as needed."""
    config = config or DEFAULT
    x = lift(x)
    eps = to_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if isinstance(x, Const):
        return Interval(x.value)
    return enclose_many([x], eps, config)[0]


def enclose_many(exprs, eps, config=None):
    """Enclose several expressions at a shared precision (shared subtrees evaluated once)."""
    config = config or DEFAULT
    eps = to_fraction(eps)
    bits = _start_bits(eps, config)
    last = None
    while True:
        memo = {}
        try:
            out = [lift(e).enclose(bits, memo) for e in exprs]
            if all(iv.rad <= eps for iv in out):
                return out
        except NeedMorePrecision as exc:
            last = exc
        if bits >= config.bits_cap:
            break
        bits = min(config.bits_cap, bits * 2)
    if last is None:
        raise PrecisionCap(f"radius target {eps} not met at {config.bits_cap} bits")
    if last.kind == "division":
        raise DivisionByZeroEnclosure(
            f"denominator enclosure contains 0 up to {config.bits_cap} bits")
    if last.kind == "domain":
        raise DomainError(f"even-root argument not provably >= 0 up to {config.bits_cap} bits")
    raise PrecisionCap(f"{last} (cap {config.bits_cap} bits)")


def enclose_at_bits(exprs, bits, config=None):
    """Enclosures with radius <= 2**-bits each (escalating internally)."""
    return enclose_many(exprs, Fraction(1, 1 << bits), config)


# -- symbolic zero test -----------------------------------------------------

def linear_form(x):
    """Decompose into {atom_text: (atom, coeff)} plus a rational constant.

    Only sums, negations and rational scalings are expanded; anything else is
    an atom keyed by its canonical text. Matching B/C digit halves of the same
    split recombine into their argument.
    """
    atoms = {}
    const = [Fraction(0)]

    def visit(e, c):
        if c == 0:
            return
        if isinstance(e, Const):
            const[0] += c * e.value
        elif isinstance(e, Add):
            visit(e.a, c)
            visit(e.b, c)
        elif isinstance(e, Neg):
            visit(e.a, -c)
        elif isinstance(e, Mul) and isinstance(e.a, Const):
            visit(e.b, c * e.a.value)
        elif isinstance(e, Mul) and isinstance(e.b, Const):
            visit(e.a, c * e.b.value)
        elif isinstance(e, Div) and isinstance(e.b, Const):
            visit(e.a, c / e.b.value)
        else:
            key = e.text()
            atom, old = atoms.get(key, (e, Fraction(0)))
            atoms[key] = (atom, old + c)

    visit(lift(x), Fraction(1))
    # recombine digit halves
    changed = True
    while changed:
        changed = False
        for key, (atom, c) in list(atoms.items()):
            if isinstance(atom, Blocks) and atom.part == "B" and c != 0:
                twin = Blocks(atom.arg, atom.base, atom.cuts, "C").text()
                if twin in atoms and atoms[twin][1] == c:
                    del atoms[key]
                    del atoms[twin]
                    visit(atom.arg, c)
                    changed = True
                    break
    return {k: v for k, v in atoms.items() if v[1] != 0}, const[0]


def provably_zero(x) -> bool:
    """True only when ``x`` is shown to be exactly zero by symbolic means."""
    atoms, const = linear_form(x)
    if not atoms:
        return const == 0
    symbols = {}
    try:
        s = lift(x).to_sympy(symbols)
    except NotImplementedError:
        return False
    for simp in (sympy.expand, sympy.radsimp, sympy.simplify):
        try:
            if simp(s) == 0:
                return True
        except Exception:  # sympy may choke on exotic radicals
            continue
    return False
