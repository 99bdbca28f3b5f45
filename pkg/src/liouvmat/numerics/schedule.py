"""Exponent schedules k -> e(k) for Liouville series and digit-cut positions."""

from dataclasses import dataclass
import math

from ..errors import DivergentSeries, ScheduleTooShort


@dataclass(frozen=True)
class Schedule:
    """Strictly increasing positive integer sequence indexed from k = 1.

    ``kind`` is one of ``factorial``, ``power`` (k**param), ``exp`` (param**k)
    or ``list`` (finite prefix given in ``values``).
    """

    kind: str = "factorial"
    param: int = 0
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("factorial", "power", "exp", "list"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "power" and self.param < 2:
            raise ValueError("power schedule needs exponent >= 2")
        if self.kind == "exp" and self.param < 2:
            raise ValueError("exp schedule needs base >= 2")
        if self.kind == "list":
            vals = tuple(int(v) for v in self.values)
            object.__setattr__(self, "values", vals)
            if not vals:
                raise ValueError("empty schedule")
            if vals[0] < 1 or any(b <= a for a, b in zip(vals, vals[1:])):
                raise DivergentSeries(f"schedule {vals} is not strictly increasing")

    def __call__(self, k: int) -> int:
        if k < 1:
            raise ValueError("schedules are indexed from 1")
        if self.kind == "factorial":
            return math.factorial(k)
        if self.kind == "power":
            return k ** self.param
        if self.kind == "exp":
            return self.param ** k
        if k > len(self.values):
            raise ScheduleTooShort(f"schedule has only {len(self.values)} terms, term {k} requested")
        return self.values[k - 1]

    @property
    def length(self):
        return len(self.values) if self.kind == "list" else None

    def text(self) -> str:
        if self.kind == "factorial":
            return "factorial"
        if self.kind == "list":
            return "[" + ",".join(map(str, self.values)) + "]"
        return f"{self.kind}({self.param})"

    def to_json(self):
        if self.kind == "list":
            return {"kind": "list", "values": list(self.values)}
        if self.kind == "factorial":
            return {"kind": "factorial"}
        return {"kind": self.kind, "param": self.param}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["kind"], doc.get("param", 0), tuple(doc.get("values", ())))


FACTORIAL = Schedule()


def checked_terms(schedule, count):
    """First ``count`` terms, verifying strict increase (also for ad-hoc callables)."""
    out = []
    for k in range(1, count + 1):
        e = schedule(k)
        if out and e <= out[-1]:
            raise DivergentSeries(f"schedule not increasing at k={k}: {out[-1]} -> {e}")
        if e < 1:
            raise DivergentSeries("schedule must be positive")
        out.append(e)
    return out
