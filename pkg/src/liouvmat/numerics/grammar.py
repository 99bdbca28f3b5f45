"""Text and JSON forms of :class:`RealExpr`.

Text grammar (Python-like, ``^`` is an integer power)::

    expr := number | name | expr (+|-|*|/) expr | -expr | expr ^ int | (expr)
          | sqrt(expr) | cbrt(expr) | root(n, expr)
          | liouville(base[, schedule]) | blocks(expr, base, schedule, B|C)
    schedule := factorial | power(d) | exp(c) | [c1, c2, ...]

Names resolve through a bindings mapping (values are text or RealExpr).
"""

import ast
from fractions import Fraction

from ..errors import ParseError
from . import expr as E
from .schedule import Schedule

_FUNCS = {"sqrt", "cbrt", "root", "liouville", "blocks"}

# extra node kinds registered by other modules (kind -> callable(doc) -> RealExpr)
JSON_KINDS = {}


def parse_schedule(node_or_text):
    node = node_or_text
    if isinstance(node_or_text, str):
        node = ast.parse(node_or_text.strip(), mode="eval").body
    if isinstance(node, ast.Name) and node.id == "factorial":
        return Schedule("factorial")
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in ("power", "exp"):
        if len(node.args) != 1:
            raise ParseError(f"{node.func.id}() takes one integer")
        return Schedule(node.func.id, _int(node.args[0]))
    if isinstance(node, (ast.List, ast.Tuple)):
        return Schedule("list", values=tuple(_int(v) for v in node.elts))
    raise ParseError(f"bad schedule: {ast.dump(node)}")


def _int(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_int(node.operand)
    raise ParseError("integer literal expected")


def parse_expr(text: str, bindings=None) -> E.RealExpr:
    """Parse the textual expression grammar into a RealExpr."""
    bindings = bindings or {}
    resolved = {}

    def lookup(name, stack):
        if name in resolved:
            return resolved[name]
        if name not in bindings:
            raise ParseError(f"unbound name {name!r}")
        if name in stack:
            raise ParseError(f"cyclic binding {name!r}")
        val = bindings[name]
        if isinstance(val, str):
            val = _convert(_tree(val), stack | {name})
        else:
            val = E.lift(val)
        resolved[name] = val
        return val

    def _convert(node, stack):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ParseError(f"bad literal {node.value!r}")
            if isinstance(node.value, float):
                return E.Const(Fraction(ast.get_source_segment(text, node) or repr(node.value)))
            return E.Const(node.value)
        if isinstance(node, ast.Name):
            return lookup(node.id, stack)
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return E.neg(_convert(node.operand, stack))
            if isinstance(node.op, ast.UAdd):
                return _convert(node.operand, stack)
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                return E.power(_convert(node.left, stack), _int(node.right))
            a, b = _convert(node.left, stack), _convert(node.right, stack)
            if isinstance(node.op, ast.Add):
                return E.add(a, b)
            if isinstance(node.op, ast.Sub):
                return E.add(a, E.neg(b))
            if isinstance(node.op, ast.Mult):
                return E.mul(a, b)
            if isinstance(node.op, ast.Div):
                return E.div(a, b)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            f, args = node.func.id, node.args
            if f == "sqrt" and len(args) == 1:
                return E.Root(2, _convert(args[0], stack))
            if f == "cbrt" and len(args) == 1:
                return E.Root(3, _convert(args[0], stack))
            if f == "root" and len(args) == 2:
                return E.Root(_int(args[0]), _convert(args[1], stack))
            if f == "liouville" and len(args) in (1, 2):
                sched = parse_schedule(args[1]) if len(args) == 2 else Schedule()
                return E.Liouville(_int(args[0]), sched)
            if f == "blocks" and len(args) == 4 and isinstance(args[3], ast.Name):
                return E.Blocks(_convert(args[0], stack), _int(args[1]),
                                parse_schedule(args[2]), args[3].id)
            raise ParseError(f"bad arguments to {f}()")
        raise ParseError(f"unsupported syntax: {ast.dump(node)}")

    return _convert(_tree(text), frozenset())


def _tree(text):
    try:
        return ast.parse(text.replace("^", "**").strip(), mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None


def expr_to_json(x):
    return E.lift(x).to_json()


def expr_from_json(doc) -> E.RealExpr:
    kind = doc["kind"]
    if kind == "rational":
        return E.Const(Fraction(doc["value"]))
    if kind == "liouville":
        return E.Liouville(doc["base"], Schedule.from_json(doc["schedule"]))
    if kind == "root":
        return E.Root(doc["n"], expr_from_json(doc["arg"]))
    if kind in ("add", "mul", "div"):
        a, b = (expr_from_json(d) for d in doc["args"])
        return {"add": E.Add, "mul": E.Mul, "div": E.Div}[kind](a, b)
    if kind == "neg":
        return E.Neg(expr_from_json(doc["arg"]))
    if kind == "pow":
        return E.Pow(expr_from_json(doc["arg"]), doc["k"])
    if kind == "blocks":
        return E.Blocks(expr_from_json(doc["arg"]), doc["base"],
                        Schedule.from_json(doc["cuts"]), doc["part"])
    if kind in JSON_KINDS:
        return JSON_KINDS[kind](doc)
    raise ParseError(f"unknown expression kind {kind!r}")
