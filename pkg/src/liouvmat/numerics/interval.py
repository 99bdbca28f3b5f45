"""Midpoint-radius enclosures over dyadic rationals."""

from dataclasses import dataclass
from fractions import Fraction
import math

ZERO = Fraction(0)


def _floor_div_pow2(x: Fraction, bits: int) -> int:
    return math.floor(x * (1 << bits)) if bits >= 0 else math.floor(x / (1 << -bits))


def dyadic_round(x: Fraction, bits: int) -> Fraction:
    """Nearest multiple of 2**-bits (ties toward -inf)."""
    scaled = x * (1 << bits)
    n = math.ceil(scaled - Fraction(1, 2))
    return Fraction(n, 1 << bits)


def dyadic_ceil(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.ceil(x * (1 << bits)), 1 << bits)


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 0:
        raise ValueError("iroot of negative")
    if n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


@dataclass(frozen=True)
class Interval:
    """The closed interval [mid - rad, mid + rad]."""

    mid: Fraction
    rad: Fraction = ZERO

    def __post_init__(self):
        if self.rad < 0:
            raise ValueError("negative radius")

    @classmethod
    def exact(cls, x) -> "Interval":
        return cls(Fraction(x), ZERO)

    @classmethod
    def from_bounds(cls, lo: Fraction, hi: Fraction) -> "Interval":
        if lo > hi:
            raise ValueError("empty interval")
        return cls((lo + hi) / 2, (hi - lo) / 2)

    @property
    def lo(self) -> Fraction:
        return self.mid - self.rad

    @property
    def hi(self) -> Fraction:
        return self.mid + self.rad

    @property
    def width(self) -> Fraction:
        return 2 * self.rad

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return abs(self.mid) <= self.rad

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def magnitude(self) -> Fraction:
        """Upper bound of |x|."""
        return abs(self.mid) + self.rad

    def mignitude(self) -> Fraction:
        """Lower bound of |x|."""
        return max(ZERO, abs(self.mid) - self.rad)

    def rounded(self, bits: int) -> "Interval":
        """Outward rounding of the midpoint onto the 2**-bits grid."""
        m = dyadic_round(self.mid, bits)
        if m == self.mid and self.rad.denominator <= (1 << bits):
            return self
        return Interval(m, dyadic_ceil(self.rad + abs(self.mid - m), bits))

    def __neg__(self):
        return Interval(-self.mid, self.rad)

    def __add__(self, other):
        other = _coerce(other)
        return Interval(self.mid + other.mid, self.rad + other.rad)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        rad = abs(self.mid) * other.rad + abs(other.mid) * self.rad + self.rad * other.rad
        return Interval(self.mid * other.mid, rad)

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.contains_zero():
            raise ZeroDivisionError("enclosure contains 0")
        return Interval.from_bounds(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return _coerce(other) * self.reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        if k == 0:
            return Interval.exact(1)
        lo, hi = self.lo, self.hi
        if k % 2 == 1 or lo >= 0:
            return Interval.from_bounds(min(lo ** k, hi ** k), max(lo ** k, hi ** k))
        if hi <= 0:
            return Interval.from_bounds(hi ** k, lo ** k)
        return Interval.from_bounds(ZERO, max(lo ** k, hi ** k))

    def root(self, n: int, bits: int) -> "Interval":
        """Enclosure of the real n-th root; caller guarantees lo >= 0 for even n."""
        return Interval.from_bounds(_root_down(self.lo, n, bits), _root_up(self.hi, n, bits))

    def __repr__(self):
        return f"Interval({float(self.mid):.17g} ± {float(self.rad):.3g})"


def _root_down(x: Fraction, n: int, bits: int) -> Fraction:
    if x < 0:
        return -_root_up(-x, n, bits)
    scaled = math.floor(x * (1 << (n * bits)))
    return Fraction(iroot(scaled, n), 1 << bits)


def _root_up(x: Fraction, n: int, bits: int) -> Fraction:
    if x < 0:
        return -_root_down(-x, n, bits)
    scaled = math.ceil(x * (1 << (n * bits)))
    r = iroot(scaled, n)
    if r ** n < scaled:
        r += 1
    return Fraction(r, 1 << bits)


def _coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval.exact(x)
