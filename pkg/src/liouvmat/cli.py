"""Command-line front end.

Every flag can also come from the environment as LIOUVMAT_<FLAG>, e.g.
LIOUVMAT_QMAX=100. Exit codes: 0 ok, 2 input error, 3 budget exceeded,
4 precision cap, 5 property check failed.
"""

import argparse
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction

from . import __version__
from .config import Config
from .errors import LiouvmatError, ParseError, PropertyCheckFailed

ENV = "LIOUVMAT_"


def _env(name, default):
    return os.environ.get(ENV + name.upper().replace("-", "_"), default)


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--qmax", type=int, default=int(_env("qmax", 100)))
    p.add_argument("--eps", type=Fraction, default=Fraction(_env("eps", "1e-20")))
    p.add_argument("--budget", type=int, default=int(_env("budget", 10**8)))
    p.add_argument("--bits", type=int, default=int(_env("bits", 4096)), help="precision cap in bits")
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p.add_argument("--format", choices=("json", "csv", "text"), default=_env("format", "json"))
    return p


def _config(args):
    return Config(bits_cap=args.bits, enum_budget=args.budget)


def _load_matrix(arg):
    """Matrix from a JSON file path, or inline JSON (document or nested list)."""
    from .matrix import load_matrix, matrix_from_json
    text = arg.strip()
    if text.startswith("{") or text.startswith("["):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"inline matrix: {exc}") from None
        if isinstance(doc, list):
            doc = {"entries": [[str(x) for x in r] for r in doc]}
        return matrix_from_json(doc)
    try:
        return load_matrix(arg)
    except OSError as exc:
        raise ParseError(f"cannot read {arg}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{arg}: {exc}") from None


def _load_json(arg):
    text = arg.strip()
    try:
        if text.startswith("{") or text.startswith("["):
            return json.loads(text)
        with open(arg) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {arg}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc)) from None


def _ints(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


def _frac(x):
    return f"{x.numerator}/{x.denominator}"


def _iv(iv):
    return {"mid": _frac(iv.mid), "rad": _frac(iv.rad), "lo": float(iv.lo), "hi": float(iv.hi)}


# -- output ---------------------------------------------------------------------------

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, json.dumps(obj) if isinstance(obj, list) else obj


def emit(result, fmt, out, csv_text=None, text=None):
    if fmt == "json":
        out.write(json.dumps(result, sort_keys=True, indent=2) + "\n")
    elif fmt == "csv":
        if csv_text is not None:
            out.write(csv_text)
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            for k, v in _flatten(result):
                w.writerow([k, v])
            out.write(buf.getvalue())
    else:
        if text is None:
            text = "\n".join(f"{k}: {v}" for k, v in _flatten(result))
        out.write(text + "\n")


# -- subcommands ------------------------------------------------------------------------

def cmd_approx(args, out):
    from .diophantine import enumerate_best_pairs
    A = _load_matrix(args.matrix)
    t = enumerate_best_pairs(A, args.qmax, bits=args.work_bits, config=_config(args), oracle=args.oracle)
    doc = t.to_json()
    if t.exact_relation is not None:
        doc["note"] = "exact relation reached: A q = p"
    lines = [f"{r.height:>8}  q={list(r.q)}  p={list(r.p)}  residual<={float(r.upper):.6e}" for r in t.rows]
    if t.exact_relation is not None:
        lines.append("exact relation reached")
    emit(doc, args.format, out, t.to_csv(), "\n".join(lines))


def cmd_nearest(args, out):
    from .diophantine import nearest_residual
    A = _load_matrix(args.matrix)
    pair = nearest_residual(A, _ints(args.q), args.eps, _config(args), strict=args.strict)
    emit(pair.to_json(), args.format, out)


def cmd_goodness(args, out):
    from .diophantine import goodness_check
    v = goodness_check(_load_matrix(args.matrix), args.qmax, args.eps, _config(args))
    emit(v.to_json(), args.format, out)


def cmd_exponent(args, out):
    from .diophantine import enumerate_best_pairs, estimate_from_rows
    A = _load_matrix(args.matrix)
    t = enumerate_best_pairs(A, args.qmax, config=_config(args))
    est = estimate_from_rows(t.rows, args.min_height)
    doc = est.to_json()
    doc["qmax"] = args.qmax
    emit(doc, args.format, out)


def cmd_dirichlet(args, out):
    from .diophantine import dirichlet_check
    A = _load_matrix(args.matrix)
    ok = dirichlet_check(A, args.qmax, _config(args))
    emit({"Q": args.qmax, "shape": list(A.shape), "passed": ok, "threshold": f"Q^-{A.n}/{A.m}"},
         args.format, out)


def _bindings(items):
    out = {}
    for b in items or ():
        name, sep, val = b.partition("=")
        if not sep:
            raise ParseError(f"binding {b!r} must be name=expr")
        out[name.strip()] = val
    return out


def cmd_eval(args, out):
    from .numerics import eval_enclosure, parse_expr
    x = parse_expr(args.expr, _bindings(args.bind))
    iv = eval_enclosure(x, args.eps, _config(args))
    doc = {"expr": x.text(), **_iv(iv)}
    emit(doc, args.format, out, text=f"{x.text()} in [{float(iv.lo)!r}, {float(iv.hi)!r}]")


def cmd_truncate(args, out):
    from .numerics import liouville_truncation, parse_schedule
    v = liouville_truncation(args.base, parse_schedule(args.schedule), args.K, args.budget_bits)
    emit({"base": args.base, "schedule": args.schedule, "K": args.K, "value": _frac(v)}, args.format, out)


def cmd_construct(args, out):
    from . import construct as C
    from .matrix import matrix_to_json
    from .numerics import parse_expr
    kind = args.kind
    if kind == "thm1":
        M = C.thm1_matrix(parse_expr(args.a), parse_expr(args.b), args.dim)
    elif kind == "sect9":
        M = C.sect9_matrix(parse_expr(args.a), parse_expr(args.b), parse_expr(args.c))
    elif kind == "diag":
        M = C.diag_compose([_load_matrix(m) for m in args.inputs])
    elif kind == "ier":
        M = C.ier_map(_load_matrix(args.inputs[0]))
    elif kind == "analog":
        M = C.analog_map(args.inputs, C.MordellParams(args.N))
    elif kind == "erdos":
        B, Cm = C.erdos_split(_load_matrix(args.inputs[0]), _ints(args.cuts), args.base)
        emit({"B": matrix_to_json(B), "C": matrix_to_json(Cm)}, args.format, out)
        return
    else:
        raise ParseError(f"unknown construction {kind!r}")
    emit(matrix_to_json(M), args.format, out)


def cmd_hauser(args, out):
    from .construct import hauser_analysis
    emit(hauser_analysis(_load_matrix(args.matrix), args.qmax, config=_config(args)).to_json(), args.format, out)


def cmd_mordell(args, out):
    from .construct import MordellParams, mordell_sanity
    emit(mordell_sanity(MordellParams(args.N, args.bound)).to_json(), args.format, out)


def cmd_series(args, out):
    from .matfun import eval_series_enclosure, parse_series
    enc = eval_series_enclosure(parse_series(args.f), _load_matrix(args.matrix), args.eps, _config(args))
    emit({"f": args.f, "entries": [[_iv(iv) for iv in r] for r in enc]}, args.format, out)


def cmd_moebius(args, out):
    from .matfun import MoebiusParams, moebius_apply
    from .matrix import matrix_to_json
    p = MoebiusParams(*(Fraction(x) for x in args.params.split(",")))
    emit(matrix_to_json(moebius_apply(p, _load_matrix(args.matrix), _config(args))), args.format, out)


def cmd_degeneracy(args, out):
    from .matfun import curve_degeneracy_test, parse_series
    v = curve_degeneracy_test(parse_series(args.f), args.mode, degree=args.degree)
    emit(v.to_json(), args.format, out)


def cmd_blockimage(args, out):
    from .matfun import parse_series, thm1_block_image
    from .numerics import parse_expr
    img = thm1_block_image(parse_series(args.f), parse_expr(args.a), parse_expr(args.b), args.eps, _config(args))
    r, s, c0 = img.enclose(args.eps, _config(args))
    emit({"r": _iv(r), "s": _iv(s), "c0": _iv(c0)}, args.format, out)


def cmd_sect9(args, out):
    import sympy
    from .matfun import sect9_powers
    a, b, c = sympy.symbols("a b c")
    rows = [{"j": j, "v": str(sympy.expand(v)), "w": str(sympy.expand(w))}
            for j, (v, w) in enumerate(sect9_powers(a, b, c, args.J))]
    emit({"powers": rows}, args.format, out)


def cmd_transport(args, out):
    from .invariance import parse_ops, verify_preservation
    A = _load_matrix(args.matrix)
    ops = parse_ops(_load_json(args.ops))
    rep = verify_preservation(ops, A, args.qmax, _config(args))
    emit(rep.to_json(), args.format, out)
    if not rep.all_within:
        raise PropertyCheckFailed("a transported residual exceeded its predicted bound")


def cmd_identity(args, out):
    from . import identities as I
    from .matrix import ExactMatrix
    rng = random.Random(args.seed)
    if args.kind == "standard":
        P = I.standard_polynomial(int(args.inputs[0]))
        emit({"k": int(args.inputs[0]), "terms": len(P.terms), "polynomial": P.text()}, args.format, out)
    elif args.kind == "eval":
        P = I.NcPolynomial.parse(args.inputs[0])
        mats = [ExactMatrix(_load_json(m)) for m in args.inputs[1:]]
        V = I.nc_eval(P, mats)
        emit({"polynomial": P.text(), "value": [[_frac(x) for x in r] for r in V.rows]}, args.format, out)
    elif args.kind == "hall":
        if args.inputs:
            X, Y, Z = (ExactMatrix(_load_json(m)) for m in args.inputs)
            res = [I.hall_check(X, Y, Z)]
        else:
            res = [I.hall_check(*(I.random_matrix(rng, 2, 9) for _ in range(3))) for _ in range(args.trials)]
        emit({"trials": len(res), "holds": sum(r.holds for r in res)}, args.format, out)
        if not all(r.holds for r in res):
            raise PropertyCheckFailed("Hall identity failed")
    elif args.kind == "sample":
        P = I.NcPolynomial.parse(args.inputs[0])
        v = I.weak_independence_sample(P, args.dim, args.trials, args.seed)
        doc = {"verdict": v.kind, "trials": v.trials}
        if v.witness:
            doc["witness"] = [[[_frac(x) for x in r] for r in M.rows] for M in v.witness]
        emit(doc, args.format, out)
    else:
        raise ParseError(f"unknown identity command {args.kind!r}")


def cmd_demo(args, out):
    from . import demos
    cfg = _config(args)
    name = args.name
    if name == "thm1":
        rep = demos.demo_thm1(args.f or "poly:[0,0,1]", args.a or "cbrt(2)", args.b, args.qmax, config=cfg)
    elif name == "sect9":
        rep = demos.demo_sect9(args.J)
    elif name == "ier":
        rep = demos.demo_ier(args.dim, args.seed, args.trials, config=cfg)
    elif name == "analog":
        rep = demos.demo_analog(args.N, args.bound, args.trials, args.qmax, args.seed, config=cfg)
    elif name == "erdos":
        rep = demos.demo_erdos(config=cfg)
    elif name == "hall":
        rep = demos.demo_hall(args.trials, args.seed)
    else:
        rep = demos.demo_amitsur(args.trials, args.seed)
    text = "\n".join(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip() for label, ok, detail in rep.checks)
    emit(rep.to_json(), args.format, out, text=text)
    if not rep.passed:
        raise PropertyCheckFailed(f"demo {name}: some checks failed")


# operation -> subcommand that reaches it
COVERAGE = {
    "numerics.eval_enclosure": "eval",
    "numerics.liouville_truncation": "truncate",
    "numerics.parse_expr": "eval",
    "matrix.load_matrix": "approx",
    "matrix.operator_norm_upper": "series",
    "matrix.exact_inverse": "moebius",
    "matrix.mat_mul": "moebius",
    "diophantine.nearest_residual": "nearest",
    "diophantine.enumerate_best_pairs": "approx",
    "diophantine.goodness_check": "goodness",
    "diophantine.exponent_estimate": "exponent",
    "diophantine.dirichlet_check": "dirichlet",
    "construct.thm1_matrix": "construct thm1",
    "construct.sect9_matrix": "construct sect9",
    "construct.diag_compose": "construct diag",
    "construct.hauser_analysis": "hauser",
    "construct.erdos_split": "construct erdos",
    "construct.ier_map": "construct ier",
    "construct.analog_map": "construct analog",
    "construct.mordell_sanity": "mordell",
    "matfun.eval_series": "series",
    "matfun.moebius_apply": "moebius",
    "matfun.thm1_block_image": "blockimage",
    "matfun.sect9_powers": "sect9",
    "matfun.curve_degeneracy_test": "degeneracy",
    "invariance.apply_op": "transport",
    "invariance.transport_pair": "transport",
    "invariance.verify_preservation": "transport",
    "identities.nc_eval": "identity eval",
    "identities.hall_check": "identity hall",
    "identities.standard_polynomial": "identity standard",
    "identities.weak_independence_sample": "identity sample",
}


def cmd_selftest(args, out):
    from . import demos
    rows = [{"operation": op, "subcommand": sub} for op, sub in sorted(COVERAGE.items())]
    quick = [demos.demo_sect9(4), demos.demo_hall(10, args.seed), demos.demo_ier(2, args.seed),
             demos.demo_erdos()]
    doc = {"coverage": rows, "quick_checks": [r.to_json() for r in quick], "version": __version__}
    emit(doc, args.format, out)
    if not all(r.passed for r in quick):
        raise PropertyCheckFailed("selftest checks failed")


def build_parser():
    common = _common()
    p = argparse.ArgumentParser(prog="liouvmat", description="Liouville matrices: approximation experiments")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("approx", cmd_approx, "best approximation table")
    sp.add_argument("matrix")
    sp.add_argument("--work-bits", type=int, default=None, help="fix the working precision")
    sp.add_argument("--oracle", action="store_true", help="use the unpruned sweep")
    sp = add("nearest", cmd_nearest, "nearest integer vector for one q")
    sp.add_argument("matrix")
    sp.add_argument("--q", required=True)
    sp.add_argument("--strict", action="store_true")
    add("goodness", cmd_goodness, "search for exact integer relations").add_argument("matrix")
    sp = add("exponent", cmd_exponent, "irrationality exponent estimate")
    sp.add_argument("matrix")
    sp.add_argument("--min-height", type=int, default=2)
    add("dirichlet", cmd_dirichlet, "Dirichlet sanity check at Q = --qmax").add_argument("matrix")
    sp = add("eval", cmd_eval, "certified enclosure of an expression")
    sp.add_argument("expr")
    sp.add_argument("--bind", action="append", help="name=expr")
    sp = add("truncate", cmd_truncate, "exact Liouville truncation")
    sp.add_argument("--base", type=int, default=10)
    sp.add_argument("--schedule", default="factorial")
    sp.add_argument("--K", type=int, required=True)
    sp.add_argument("--budget-bits", type=int, default=1 << 20)
    sp = add("construct", cmd_construct, "build a matrix family (JSON matrix output)")
    sp.add_argument("kind", choices=("thm1", "sect9", "diag", "ier", "analog", "erdos"))
    sp.add_argument("inputs", nargs="*")
    sp.add_argument("--a", default="sqrt(2)")
    sp.add_argument("--b", default="liouville(10, factorial)")
    sp.add_argument("--c", default="1")
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--N", type=int, default=6)
    sp.add_argument("--cuts", default="1,2,6,24")
    sp.add_argument("--base", type=int, default=10)
    sp = add("hauser", cmd_hauser, "row and column exponent analysis")
    sp.add_argument("matrix")
    sp = add("mordell", cmd_mordell, "small-height rational point scan")
    sp.add_argument("--N", type=int, default=6)
    sp.add_argument("--bound", type=int, default=50)
    sp = add("series", cmd_series, "f(A) for a catalogue series")
    sp.add_argument("f")
    sp.add_argument("matrix")
    sp = add("moebius", cmd_moebius, "(aA+bI)(cA+dI)^-1")
    sp.add_argument("params", help="a,b,c,d")
    sp.add_argument("matrix")
    sp = add("degeneracy", cmd_degeneracy, "curve degeneracy test")
    sp.add_argument("f")
    sp.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    sp.add_argument("--degree", type=int, default=6)
    sp = add("blockimage", cmd_blockimage, "r(a), s(a), c0 of f([[a,b],[0,0]])")
    sp.add_argument("f")
    sp.add_argument("--a", default="sqrt(2)")
    sp.add_argument("--b", default="liouville(10, factorial)")
    sp = add("sect9", cmd_sect9, "(1,1) and (1,2) entries of [[a,b],[c,0]]^j")
    sp.add_argument("--J", type=int, default=12)
    sp = add("transport", cmd_transport, "transport record pairs through rational ops")
    sp.add_argument("matrix")
    sp.add_argument("ops", help="JSON op list (file or inline)")
    sp = add("identity", cmd_identity, "non-commutative polynomial identities")
    sp.add_argument("kind", choices=("standard", "eval", "hall", "sample"))
    sp.add_argument("inputs", nargs="*")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--dim", type=int, default=2)
    sp = add("demo", cmd_demo, "run a construction end to end")
    sp.add_argument("name", choices=("thm1", "sect9", "ier", "analog", "erdos", "hall", "amitsur"))
    sp.add_argument("--f", default=None)
    sp.add_argument("--a", default=None)
    sp.add_argument("--b", default=None)
    sp.add_argument("--J", type=int, default=12)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--N", type=int, default=6)
    sp.add_argument("--bound", type=int, default=50)
    sp.add_argument("--trials", type=int, default=None)
    add("selftest", cmd_selftest, "coverage listing and quick checks")
    return p


_DEMO_TRIALS = {"ier": 1, "analog": 5, "hall": 100, "amitsur": 20}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "cmd", None) == "demo":
        if args.trials is None:
            args.trials = _DEMO_TRIALS.get(args.name, 1)
        if args.name == "thm1" and "--qmax" not in (argv or sys.argv[1:]) and not os.environ.get(ENV + "QMAX"):
            args.qmax = 1000
    try:
        args.fn(args, out)
    except LiouvmatError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                     "exit_code": exc.exit_code}) + "\n")
        return exc.exit_code
    except (ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 2}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
