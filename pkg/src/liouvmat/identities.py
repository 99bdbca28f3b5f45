"""Non-commutative polynomials and polynomial identities of matrix rings."""

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
import random
import re

from .config import DEFAULT
from .errors import BudgetExceeded, DimensionMismatch, ParseError
from .matrix import ExactMatrix


class NcPolynomial:
    """Finite sum of coefficient * word, words being tuples of variable names."""

    __slots__ = ("terms", "variables")

    def __init__(self, terms=None, variables=None):
        clean = {}
        for w, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                clean[tuple(w)] = clean.get(tuple(w), Fraction(0)) + c
        self.terms = {w: c for w, c in clean.items() if c}
        seen = []
        for w in self.terms:
            for x in w:
                if x not in seen:
                    seen.append(x)
        if variables is None:
            variables = tuple(sorted(seen, key=_var_key))
        else:
            variables = tuple(variables)
            missing = [x for x in seen if x not in variables]
            if missing:
                raise ParseError(f"variables {missing} not declared")
        self.variables = variables

    @classmethod
    def var(cls, name):
        return cls({(name,): 1})

    @classmethod
    def const(cls, c):
        return cls({(): c})

    @classmethod
    def parse(cls, text, variables=None):
        return _Parser(text).parse(variables)

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((len(w) for w in self.terms), default=-1)

    def __add__(self, other):
        other = _lift(other)
        t = dict(self.terms)
        for w, c in other.terms.items():
            t[w] = t.get(w, Fraction(0)) + c
        return NcPolynomial(t, _merge_vars(self, other))

    __radd__ = __add__

    def __neg__(self):
        return NcPolynomial({w: -c for w, c in self.terms.items()}, self.variables)

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        t = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                t[w1 + w2] = t.get(w1 + w2, Fraction(0)) + c1 * c2
        return NcPolynomial(t, _merge_vars(self, other))

    def __rmul__(self, other):
        return _lift(other) * self

    def __pow__(self, k):
        out = NcPolynomial.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, NcPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def substitute(self, mapping):
        """Replace variables by polynomials (names not in mapping stay)."""
        out = NcPolynomial()
        for w, c in self.terms.items():
            term = NcPolynomial.const(c)
            for x in w:
                term = term * mapping.get(x, NcPolynomial.var(x))
            out = out + term
        return out

    def text(self):
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), [_var_key(x) for x in w])):
            c = self.terms[w]
            sign = "-" if c < 0 else "+"
            c = abs(c)
            mono = _word_text(w)
            if not mono:
                body = str(c)
            elif c == 1:
                body = mono
            else:
                body = f"{c}*{mono}"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"NcPolynomial({self.text()!r})"


def _var_key(name):
    m = re.fullmatch(r"([A-Za-z_]+)(\d*)", name)
    return (m.group(1), int(m.group(2)) if m.group(2) else -1) if m else (name, -1)


def _merge_vars(p, q):
    out = list(p.variables)
    out += [x for x in q.variables if x not in out]
    return tuple(sorted(out, key=_var_key))


def _lift(x):
    return x if isinstance(x, NcPolynomial) else NcPolynomial.const(x)


def _word_text(w):
    out, i = [], 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        out.append(w[i] if j - i == 1 else f"{w[i]}^{j - i}")
        i = j
    return "*".join(out)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Parser:
    """expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
    factor := atom ('^' int)?; atom := int ['/' int] | name | '(' expr ')'."""

    def __init__(self, text):
        self.tokens = []
        for num, name, op in _TOKEN.findall(text):
            if num:
                self.tokens.append(("num", int(num)))
            elif name:
                self.tokens.append(("name", name))
            elif op.strip():
                self.tokens.append(("op", op))
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ParseError(f"unexpected token {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self, variables):
        p = self.expr()
        if self.peek()[0] != "end":
            raise ParseError(f"trailing input at {self.peek()[1]!r}")
        return NcPolynomial(p.terms, variables) if variables else p

    def expr(self):
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        out = self.term() * sign
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            out = out + t if op == "+" else out - t
        return out

    def term(self):
        out = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            out = out * self.factor()
        return out

    def factor(self):
        a = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            k = self.take("num")[1]
            a = a ** k
        return a

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            if self.peek() == ("op", "/"):
                self.take()
                return NcPolynomial.const(Fraction(val, self.take("num")[1]))
            return NcPolynomial.const(val)
        if kind == "name":
            self.take()
            return NcPolynomial.var(val)
        if (kind, val) == ("op", "("):
            self.take()
            e = self.expr()
            self.take("op", ")")
            return e
        raise ParseError(f"unexpected token {val!r}")


def _mat(rows):
    return [list(r) for r in rows]


def _mm(a, b):
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(r, c)) for c in cols] for r in a]


def nc_eval(P: NcPolynomial, args) -> ExactMatrix:
    """Exact value of P with variables bound positionally (P.variables order) or by name."""
    if isinstance(args, dict):
        bind = args
    else:
        args = list(args)
        if len(args) != len(P.variables):
            raise DimensionMismatch(f"{len(P.variables)} variables, {len(args)} matrices")
        bind = dict(zip(P.variables, args))
    mats = {k: (v if isinstance(v, ExactMatrix) else ExactMatrix(v)) for k, v in bind.items()}
    dims = {M.shape for M in mats.values()}
    if len(dims) != 1 or any(m != n for m, n in dims):
        raise DimensionMismatch("arguments must be square matrices of one size")
    n = dims.pop()[0]
    raw = {k: _mat(M.rows) for k, M in mats.items()}

    # Horner over the word trie: sum_x X * (value of the suffixes after x)
    def ev(words):
        acc = [[Fraction(0)] * n for _ in range(n)]
        groups = {}
        for w, c in words:
            if not w:
                for i in range(n):
                    acc[i][i] += c
            else:
                groups.setdefault(w[0], []).append((w[1:], c))
        for x in sorted(groups, key=_var_key):
            if x not in raw:
                raise DimensionMismatch(f"no matrix bound to {x}")
            prod = _mm(raw[x], ev(groups[x]))
            acc = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(acc, prod)]
        return acc

    return ExactMatrix(ev(list(P.terms.items())))


def standard_polynomial(k: int, config=None) -> NcPolynomial:
    """s_k = sum over permutations of sign * X_s(1) ... X_s(k)."""
    config = config or DEFAULT
    if k < 1:
        raise ValueError("k >= 1")
    if k > config.nc_degree_cap:
        raise BudgetExceeded(f"s_{k} has {k}! terms; cap is k <= {config.nc_degree_cap}")
    names = [f"X{i}" for i in range(1, k + 1)]
    terms = {}
    for perm in permutations(range(k)):
        inv = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        terms[tuple(names[i] for i in perm)] = -1 if inv % 2 else 1
    return NcPolynomial(terms, names)


HALL = NcPolynomial.parse("X*(Y*Z - Z*Y)^2 - (Y*Z - Z*Y)^2*X")


@dataclass(frozen=True)
class HallResult:
    holds: bool
    lhs: ExactMatrix
    rhs: ExactMatrix


def hall_check(X, Y, Z) -> HallResult:
    """X (YZ - ZY)^2 == (YZ - ZY)^2 X for 2x2 matrices."""
    X, Y, Z = (M if isinstance(M, ExactMatrix) else ExactMatrix(M) for M in (X, Y, Z))
    if any(M.shape != (2, 2) for M in (X, Y, Z)):
        raise DimensionMismatch("Hall's identity is stated for 2x2 matrices")
    C = Y @ Z - Z @ Y
    C2 = C @ C
    lhs, rhs = X @ C2, C2 @ X
    return HallResult(lhs == rhs, lhs, rhs)


@dataclass(frozen=True)
class IndependenceVerdict:
    kind: str  # "nonzero-witness" | "all-zero-on-sample"
    trials: int
    witness: tuple | None = None
    value: ExactMatrix | None = None


def random_matrix(rng, n, box):
    return ExactMatrix([[rng.randint(-box, box) for _ in range(n)] for _ in range(n)])


def weak_independence_sample(P: NcPolynomial, n: int, trials: int, seed=0) -> IndependenceVerdict:
    """Look for integer matrices where P does not vanish.

    Trial t draws entries from [-(1 + t//5), 1 + t//5]. A nonzero value is
    a witness; an all-zero sample is evidence only.
    """
    if trials < 1:
        raise ValueError("trials >= 1")
    rng = random.Random(seed)
    for t in range(trials):
        box = 1 + t // 5
        args = tuple(random_matrix(rng, n, box) for _ in P.variables)
        val = nc_eval(P, args)
        if any(x != 0 for x in val.entries()):
            return IndependenceVerdict("nonzero-witness", t + 1, args, val)
    return IndependenceVerdict("all-zero-on-sample", trials)
