"""Exact rationals and rigorous enclosures of computable reals."""

from fractions import Fraction as Rational

from .interval import Interval
from .schedule import FACTORIAL, Schedule
from .expr import (
    Add, Blocks, Const, Div, Liouville, Mul, Neg, Pow, RealExpr, Root,
    cbrt, enclose_at_bits, enclose_many, eval_enclosure, lift,
    liouville_truncation, linear_form, provably_zero, sqrt, to_fraction,
)
from .grammar import expr_from_json, expr_to_json, parse_expr, parse_schedule

IntervalValue = Interval

__all__ = [
    "Rational", "Interval", "IntervalValue", "Schedule", "FACTORIAL", "RealExpr",
    "Const", "Liouville", "Root", "Add", "Mul", "Div", "Neg", "Pow", "Blocks",
    "sqrt", "cbrt", "lift", "to_fraction", "eval_enclosure", "enclose_many",
    "enclose_at_bits", "liouville_truncation", "linear_form", "provably_zero",
    "parse_expr", "parse_schedule", "expr_to_json", "expr_from_json",
]
