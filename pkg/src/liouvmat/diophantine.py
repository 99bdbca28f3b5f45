"""Best approximations of ||A q - p||_inf by exhaustive enumeration.

All residual arithmetic is done on integers. Each entry of A is replaced by
a pair (M, R) at a common ``scale`` so that A_ij lies in
[(M - R)/scale, (M + R)/scale]; for rational matrices scale is the common
denominator and R = 0, otherwise scale = 2**bits. For a row i and vector q
the value (A q)_i lies in [(S - U)/scale, (S + U)/scale] with
S = sum M_ij q_j and U = sum R_ij |q_j|. The chosen p_i is the integer
nearest to S/scale (ties toward -inf) and the certified residual bounds are
(|S - p_i*scale| +- U)/scale.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import csv
import io
import json
import math

import numpy as np

from .config import DEFAULT
from .errors import BudgetExceeded, PrecisionCap
from .matrix import ExactMatrix, as_expr_matrix
from .numerics import expr as E
from .numerics.interval import Interval

INT64_SAFE = 1 << 61


@dataclass(frozen=True)
class EntryData:
    scale: int
    M: tuple  # m x n nested tuples of int
    R: tuple
    exact: bool
    bits: int | None

    @property
    def m(self):
        return len(self.M)

    @property
    def n(self):
        return len(self.M[0])


def entry_data(A, bits=None, config=None) -> EntryData:
    """Integer midpoint/radius data of A at a common scale."""
    config = config or DEFAULT
    if isinstance(A, ExactMatrix):
        ex = A
    else:
        ex = as_expr_matrix(A).as_exact()
    if ex is not None:
        d = ex.common_denominator()
        M = tuple(tuple(int(x * d) for x in r) for r in ex.rows)
        R = tuple(tuple(0 for _ in r) for r in ex.rows)
        return EntryData(d, M, R, True, None)
    A = as_expr_matrix(A)
    bits = bits or config.start_bits
    scale = 1 << bits
    enc = A.enclose(Fraction(1, scale), config)
    M, R = [], []
    for row in enc:
        mr, rr = [], []
        for iv in row:
            mid = math.ceil(iv.mid * scale - Fraction(1, 2))
            err = iv.rad + abs(iv.mid - Fraction(mid, scale))
            mr.append(mid)
            rr.append(math.ceil(err * scale))
        M.append(tuple(mr))
        R.append(tuple(rr))
    return EntryData(scale, tuple(M), tuple(R), False, bits)


# -- residual kernels -------------------------------------------------------------

def _dtype_for(data: EntryData, qmax: int):
    worst = max(sum(abs(x) + r for x, r in zip(mr, rr)) for mr, rr in zip(data.M, data.R))
    bound = 4 * (worst + data.scale) * qmax + 4 * data.scale
    return np.int64 if bound < INT64_SAFE else object


def _row_residual(Q, Qabs, mrow, rrow, scale):
    """Scaled (p, dist, U) for one row over a batch of q vectors."""
    if Q.dtype == object:
        S = sum(Q[:, j] * mrow[j] for j in range(len(mrow)))
        U = sum(Qabs[:, j] * rrow[j] for j in range(len(rrow)))
        S = np.asarray(S, dtype=object)
        U = np.asarray(U, dtype=object)
    else:
        S = Q @ np.asarray(mrow, dtype=np.int64)
        U = Qabs @ np.asarray(rrow, dtype=np.int64)
    p = -((scale - 2 * S) // (2 * scale))
    dist = abs(S - p * scale)
    return p, dist, U


def residual_batch(data: EntryData, Q):
    """Scaled (P, upper, lower, maxU) over a batch of q vectors (rows of Q)."""
    Qabs = abs(Q)
    P, upper, lower, maxU = [], None, None, 0
    for mrow, rrow in zip(data.M, data.R):
        p, dist, U = _row_residual(Q, Qabs, mrow, rrow, data.scale)
        up = dist + U
        lo = dist - U
        lo = np.where(lo > 0, lo, 0) if Q.dtype != object else np.asarray([x if x > 0 else 0 for x in lo], dtype=object)
        upper = up if upper is None else np.maximum(upper, up)
        lower = lo if lower is None else np.maximum(lower, lo)
        P.append(p)
        if len(U):
            maxU = max(maxU, int(U.max()))
    return np.stack(P, axis=1), upper, lower, maxU


# -- vector generation ------------------------------------------------------------

def _canonical_mask(Q):
    """First nonzero coordinate positive."""
    n = Q.shape[1]
    first = np.zeros(len(Q), dtype=Q.dtype if Q.dtype != object else np.int64)
    done = np.zeros(len(Q), dtype=bool)
    for j in range(n):
        col = Q[:, j].astype(np.int64)
        take = (~done) & (col != 0)
        first[take] = col[take]
        done |= take
    return first > 0


def _cartesian(ranges):
    sizes = [len(r) for r in ranges]
    total = int(np.prod(sizes)) if sizes else 1
    out = np.empty((total, len(ranges)), dtype=np.int64)
    rep = total
    for j, r in enumerate(ranges):
        rep //= sizes[j]
        out[:, j] = np.tile(np.repeat(r, rep), total // (rep * sizes[j]))
    return out


def _full_shell(h, r):
    """All q in Z^r with ||q||_inf == h, both signs."""
    parts = []
    for k in range(r):
        parts.append(_cartesian([np.arange(-(h - 1), h)] * k + [np.array([-h, h])]
                                + [np.arange(-h, h + 1)] * (r - 1 - k)))
    return np.concatenate(parts)


def shell(h: int, n: int, dtype=np.int64):
    """All canonical q in Z^n with ||q||_inf == h (h >= 1).

    Grouped by the position j of the first nonzero coordinate, which is
    either h itself (tail free in the box) or below h (tail on the shell).
    """
    if n == 1:
        return np.array([[h]], dtype=dtype)
    parts = []
    for j in range(n):
        r = n - 1 - j
        top = _cartesian([np.zeros(1, dtype=np.int64)] * j + [np.array([h])] + [np.arange(-h, h + 1)] * r)
        parts.append(top)
        if r and h > 1:
            tail = _full_shell(h, r)
            heads = np.repeat(np.arange(1, h), len(tail))
            block = np.zeros((len(heads), n), dtype=np.int64)
            block[:, j] = heads
            block[:, j + 1:] = np.tile(tail, (h - 1, 1))
            parts.append(block)
    out = np.concatenate(parts)
    return out.astype(dtype) if dtype is not np.int64 else out


# -- tables -----------------------------------------------------------------------

def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ApproxPair:
    q: tuple
    p: tuple
    residual: Interval
    height: int

    @property
    def upper(self) -> Fraction:
        return self.residual.hi

    @property
    def lower(self) -> Fraction:
        return self.residual.lo

    def to_json(self):
        return {"q": list(self.q), "p": list(self.p), "height": self.height,
                "residual_upper": _frac(self.upper), "residual_lower": _frac(self.lower)}


@dataclass
class BestApproxTable:
    source: str
    shape: tuple
    qmax: int
    rows: list = field(default_factory=list)
    bits: int | None = None
    certified: bool = True

    def best_at(self, Q: int):
        """Record pair with the smallest residual among heights <= Q."""
        best = None
        for r in self.rows:
            if r.height <= Q:
                best = r
        return best

    @property
    def exact_relation(self):
        last = self.rows[-1] if self.rows else None
        return last if last is not None and last.upper == 0 else None

    def to_json(self):
        return {"source": self.source, "shape": list(self.shape), "qmax": self.qmax,
                "bits": self.bits, "certified": self.certified,
                "rows": [r.to_json() for r in self.rows]}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["height", "q", "p", "residual_upper", "residual_lower",
                    "log10_height", "log10_residual_upper"])
        for r in self.rows:
            lr = _log10(r.upper) if r.upper > 0 else ""
            w.writerow([r.height, " ".join(map(str, r.q)), " ".join(map(str, r.p)),
                        _frac(r.upper), _frac(r.lower), f"{math.log10(r.height):.12g}",
                        f"{lr:.12g}" if lr != "" else ""])
        return buf.getvalue()


def _log10(x: Fraction) -> float:
    return (math.log(x.numerator) - math.log(x.denominator)) / math.log(10)


def _ln(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def _make_pair(data, q, p, upper, lower):
    s = data.scale
    return ApproxPair(tuple(int(v) for v in q), tuple(int(v) for v in p),
                      Interval.from_bounds(Fraction(int(lower), s), Fraction(int(upper), s)),
                      max(abs(int(v)) for v in q))


def _check_budget(qmax, n, config):
    if qmax < 1:
        raise ValueError("Qmax must be >= 1")
    if (2 * qmax + 1) ** n > config.enum_budget:
        raise BudgetExceeded(f"(2*{qmax}+1)^{n} vectors exceed the enumeration budget {config.enum_budget}")


class _Imprecise(Exception):
    pass


def _records_pruned(data: EntryData, qmax: int):
    """Shell-by-shell search; rows are evaluated only for vectors still able to set a record."""
    n = data.n
    dtype = _dtype_for(data, qmax)
    best = None  # scaled upper of the current record
    out = []
    quarter = data.scale // 4
    h = 1
    while h <= qmax:
        if n == 1:
            hi = h + 1 if h == 1 else min(qmax, h + 65535) + 1
            Q = np.arange(h, hi, dtype=np.int64).reshape(-1, 1)
        else:
            hi = h + 1
            Q = shell(h, n)
        if dtype is object:
            Q = Q.astype(object)
        alive = np.arange(len(Q))
        up_all = None
        lo_all = None
        P_cols = []
        Qabs = abs(Q)
        full = True
        for mrow, rrow in zip(data.M, data.R):
            Qa, Qb = (Q, Qabs) if full else (Q[alive], Qabs[alive])
            p, dist, U = _row_residual(Qa, Qb, mrow, rrow, data.scale)
            if not data.exact and len(U) and U.max() >= quarter:
                raise _Imprecise()
            up = dist + U
            lo = dist - U
            if up_all is None:
                up_all, lo_all = up, lo
                P_cols = [p]
            else:
                up_all = np.maximum(up_all, up)
                lo_all = np.maximum(lo_all, lo)
                P_cols.append(p)
            if best is not None:
                keep = up_all < best
                alive, up_all, lo_all = alive[keep], up_all[keep], lo_all[keep]
                P_cols = [c[keep] for c in P_cols]
                full = False
            if len(alive) == 0:
                break
        if len(alive):
            Qs = Q[alive]
            heights = np.abs(Qs).max(axis=1)
            order = sorted(range(len(alive)),
                           key=lambda i: (int(heights[i]), int(up_all[i]), tuple(int(v) for v in Qs[i])))
            for i in order:
                u = int(up_all[i])
                if best is None or u < best:
                    if out and out[-1][0] == int(heights[i]):
                        continue
                    best = u
                    lo = max(0, int(lo_all[i]))
                    out.append((int(heights[i]), Qs[i], [c[i] for c in P_cols], u, lo))
                    if u == 0:
                        return [_make_pair(data, q, p, u, lo) for _, q, p, u, lo in out]
        h = hi
    return [_make_pair(data, q, p, u, lo) for _, q, p, u, lo in out]


def _slices_object(data, qmax, tail):
    for q0 in range(0, qmax + 1):
        Q = np.concatenate([np.full((len(tail), 1), q0, dtype=np.int64), tail], axis=1)
        Q = Q[_canonical_mask(Q)].astype(object)
        if len(Q):
            P, up, lo, maxU = residual_batch(data, Q)
            yield Q, P, up, lo, maxU, range(len(Q))


def _group_first_min(vals, starts):
    """Index (into vals) of the first minimum of each group vals[starts[k]:starts[k+1]]."""
    mins = np.minimum.reduceat(vals, starts)
    sizes = np.diff(np.append(starts, len(vals)))
    hit = np.flatnonzero(vals == np.repeat(mins, sizes))
    group = np.searchsorted(starts, hit, side="right") - 1
    _, first = np.unique(group, return_index=True)
    return hit[first]


def _slices_int64(data, qmax, tail):
    # the tail's share of every row sum, and its height, are the same in each slice
    Tabs = np.abs(tail)
    St = [tail @ np.asarray(m[1:], dtype=np.int64) for m in data.M]
    Ut = [Tabs @ np.asarray(r[1:], dtype=np.int64) for r in data.R]
    Ht = Tabs.max(axis=1) if tail.shape[1] else np.zeros(len(tail), dtype=np.int64)
    canon0 = _canonical_mask(np.concatenate([np.zeros((len(tail), 1), dtype=np.int64), tail], axis=1))
    # stable by height, so each height group stays in lexicographic q order
    perm = np.argsort(Ht, kind="stable")
    Hs = Ht[perm]
    s = data.scale
    for q0 in range(0, qmax + 1):
        keep = perm[canon0[perm]] if q0 == 0 else perm
        if len(keep) == 0:
            continue
        H = np.maximum(Hs if q0 else Ht[keep], q0)
        P, up, lo, maxU = [], None, None, 0
        for i in range(data.m):
            S = q0 * data.M[i][0] + St[i][keep]
            U = q0 * data.R[i][0] + Ut[i][keep]
            p = -((s - 2 * S) // (2 * s))
            dist = np.abs(S - p * s)
            u, l = dist + U, np.maximum(dist - U, 0)
            up = u if up is None else np.maximum(up, u)
            lo = l if lo is None else np.maximum(lo, l)
            P.append(p)
            maxU = max(maxU, int(U.max()))
        # heights <= q0 collapse to q0 and form the first group; lexicographic
        # order inside it is restored by sorting the tail positions
        low = np.flatnonzero(H == H[0]) if H[0] == q0 else np.zeros(0, dtype=np.int64)
        if len(low):
            low = low[np.argsort(keep[low], kind="stable")]
        rest = np.arange(len(low), len(H))
        order = np.concatenate([low, rest])
        Hn = H[order]
        starts = np.flatnonzero(np.r_[True, Hn[1:] != Hn[:-1]])
        win = order[_group_first_min(up[order], starts)]
        Q = np.concatenate([np.full((len(keep), 1), q0, dtype=np.int64), tail[keep]], axis=1)
        yield Q, np.stack(P, axis=1), up, lo, maxU, win


def brute_force_records(data: EntryData, qmax: int):
    """Unpruned oracle: every canonical q in the box, all rows, then per-height minima.

    The box is swept in slices of the first coordinate rather than by height.
    """
    n = data.n
    dtype = _dtype_for(data, qmax)
    per_height = {}
    rest = [np.arange(-qmax, qmax + 1)] * (n - 1)
    tail = (np.stack(np.meshgrid(*rest, indexing="ij"), axis=-1).reshape(-1, n - 1)
            if n > 1 else np.zeros((1, 0), dtype=np.int64))
    slices = _slices_object if dtype is object else _slices_int64
    for Q, P, up, lo, maxU, idx in slices(data, qmax, tail):
        if not data.exact and maxU >= data.scale // 4:
            raise _Imprecise()
        for i in idx:
            h = max(abs(int(v)) for v in Q[i])
            key = (int(up[i]), tuple(int(v) for v in Q[i]))
            cur = per_height.get(h)
            if cur is None or key < cur[0]:
                per_height[h] = (key, [int(v) for v in P[i]], int(lo[i]))
    out = []
    best = None
    for h in sorted(per_height):
        (u, q), p, lo = per_height[h]
        if best is None or u < best:
            best = u
            out.append(_make_pair(data, q, p, u, lo))
            if u == 0:
                break
    return out


def _certain(rows):
    return all(r.upper == 0 or (r.lower > 0 and 2 * r.lower >= r.upper) for r in rows)


def enumerate_best_pairs(A, qmax: int, bits=None, config=None, source=None, oracle=False):
    """Record-setting pairs over all 0 < ||q||_inf <= qmax (q ~ -q).

    With ``bits`` given the working precision is fixed; otherwise it starts
    at a level that keeps integer kernels in int64 and doubles until every
    record's residual bounds are within a factor 2, up to ``config.bits_cap``.
    ``oracle=True`` runs the unpruned sweep instead of the shell search.
    """
    config = config or DEFAULT
    m, n = A.shape
    _check_budget(qmax, n, config)
    search = brute_force_records if oracle else _records_pruned
    fixed = bits is not None
    if not fixed:
        bits = _initial_bits(A, qmax, config)
    while True:
        data = entry_data(A, bits, config)
        try:
            rows = search(data, qmax)
        except _Imprecise:
            rows = None
        if data.exact:
            return BestApproxTable(source or _source_id(A), (m, n), qmax, rows, None, True)
        ok = rows is not None and _certain(rows)
        if ok or fixed or bits >= config.bits_cap:
            if rows is None:
                raise PrecisionCap(f"entry enclosures too wide at {bits} bits")
            return BestApproxTable(source or _source_id(A), (m, n), qmax, rows, bits, ok)
        bits = min(config.bits_cap, bits * 2)


def _initial_bits(A, qmax, config):
    A = as_expr_matrix(A)
    enc = A.enclose(Fraction(1, 1 << 16), config)
    worst = max(sum(iv.magnitude() for iv in row) for row in enc)
    room = 61 - math.ceil(math.log2(4 * (float(worst) + 2) * qmax + 4)) - 1
    return max(24, min(room, config.start_bits))


def _source_id(A):
    from .matrix import matrix_to_json
    return json.dumps(matrix_to_json(A), sort_keys=True)


# -- single queries ----------------------------------------------------------------

def nearest_residual(A, q, eps=Fraction(1, 2**32), config=None, strict=False):
    """Nearest integer vector p to A q with a certified residual enclosure.

    Precision escalates while some coordinate of A q straddles a
    half-integer or the residual radius exceeds ``eps``. At the cap the
    candidate with the smaller certified upper bound is returned, or
    PrecisionCap is raised when ``strict``.
    """
    config = config or DEFAULT
    q = tuple(int(v) for v in q)
    if len(q) != A.shape[1]:
        raise ValueError("q has the wrong length")
    if all(v == 0 for v in q):
        raise ValueError("q must be nonzero")
    eps = E.to_fraction(eps)
    bits = config.start_bits
    while True:
        data = entry_data(A, bits, config)
        Q = np.array([q], dtype=object)
        P, up, lo, maxU = residual_batch(data, Q)
        ambiguous = []
        for i, (mrow, rrow) in enumerate(zip(data.M, data.R)):
            S = sum(a * b for a, b in zip(mrow, q))
            U = sum(r * abs(b) for r, b in zip(rrow, q))
            # half-integers k + 1/2 lie at (2k+1)*scale/2
            lo_i, hi_i = 2 * (S - U), 2 * (S + U)
            k_lo = -((data.scale - lo_i) // (2 * data.scale))
            k_hi = -((data.scale - hi_i) // (2 * data.scale))
            if k_lo != k_hi:
                ambiguous.append(i)
        width_ok = Fraction(int(up[0]) - int(lo[0]), data.scale) <= 2 * eps
        if data.exact or (not ambiguous and width_ok):
            return _make_pair(data, q, P[0], up[0], lo[0])
        if bits >= config.bits_cap:
            pair = _make_pair(data, q, P[0], up[0], lo[0])
            if ambiguous and strict:
                alt = list(pair.p)
                for i in ambiguous:
                    alt[i] += 1
                raise PrecisionCap("nearest integer ambiguous at the precision cap",
                                   [pair.p, tuple(alt)])
            return pair
        bits = min(config.bits_cap, bits * 2)


@dataclass(frozen=True)
class GoodnessVerdict:
    kind: str  # "good" | "exact-relation" | "undecided"
    qmax: int
    q: tuple | None = None
    p: tuple | None = None

    def to_json(self):
        return {"verdict": self.kind, "qmax": self.qmax,
                "q": list(self.q) if self.q else None, "p": list(self.p) if self.p else None}


def residual_exprs(A, q, p):
    A = as_expr_matrix(A)
    out = []
    for i in range(A.m):
        acc = E.Const(-p[i])
        for j in range(A.n):
            acc = E.add(acc, E.mul(E.Const(q[j]), A[i, j]))
        out.append(acc)
    return out


def _iter_zero_candidates(data, qmax):
    """Canonical q (height order, then lexicographic) whose residual enclosure contains 0."""
    dtype = _dtype_for(data, qmax)
    h = 1
    while h <= qmax:
        if data.n == 1:
            # one column: a batch of consecutive heights is already in (height, q) order
            hi = min(qmax, h + 65535) + 1
            Q = np.arange(h, hi, dtype=np.int64).reshape(-1, 1)
        else:
            hi = h + 1
            Q = shell(h, data.n)
        h = hi
        if dtype is object:
            Q = Q.astype(object)
        P, up, lo, _ = residual_batch(data, Q)
        idx = np.nonzero((up if data.exact else lo) <= 0)[0].tolist()
        for i in sorted(idx, key=lambda i: tuple(int(v) for v in Q[i])):
            yield tuple(int(v) for v in Q[i]), tuple(int(v) for v in P[i])


def _separated_from_zero(exprs, config):
    """True once some enclosure excludes 0; False if that never happens below the cap."""
    bits = config.start_bits
    while True:
        memo = {}
        for x in exprs:
            try:
                if not x.enclose(bits, memo).contains_zero():
                    return True
            except E.NeedMorePrecision:
                pass
        if bits >= config.bits_cap:
            return False
        bits = min(config.bits_cap, bits * 2)


def goodness_check(A, qmax: int, eps=None, config=None) -> GoodnessVerdict:
    """Search 0 < ||q|| <= qmax for an exact integer relation A q = p.

    Rational matrices are decided exactly. For expression matrices a
    candidate whose enclosure contains 0 is tested symbolically, then by
    escalating precision; if neither settles it the verdict is ``undecided``.
    ``eps`` is accepted for interface symmetry; the precision is driven by
    the candidates themselves.
    """
    config = config or DEFAULT
    _check_budget(qmax, A.shape[1], config)
    exact = isinstance(A, ExactMatrix) or as_expr_matrix(A).as_exact() is not None
    data = entry_data(A, None if exact else _initial_bits(A, qmax, config), config)
    for q, p in _iter_zero_candidates(data, qmax):
        if data.exact:
            return GoodnessVerdict("exact-relation", qmax, q, p)
        exprs = residual_exprs(A, q, p)
        if all(E.provably_zero(x) for x in exprs):
            return GoodnessVerdict("exact-relation", qmax, q, p)
        if not _separated_from_zero(exprs, config):
            return GoodnessVerdict("undecided", qmax, q, p)
    return GoodnessVerdict("good", qmax)


# -- exponents ------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentEstimate:
    samples: tuple  # (height, residual_upper)
    omega_hat: float
    note: str

    def to_json(self):
        return {"omega_hat": self.omega_hat, "note": self.note,
                "samples": [[h, _frac(u)] for h, u in self.samples]}


def estimate_from_rows(rows, min_height=2):
    samples = tuple((r.height, r.upper) for r in rows if r.height >= max(2, min_height))
    if any(u == 0 for _, u in samples) or any(r.upper == 0 for r in rows):
        raise ValueError("table reaches an exact relation; the exponent is not finite")
    if not samples:
        return ExponentEstimate((), 0.0, f"no record of height >= {max(2, min_height)}")
    vals = [-_ln(u) / math.log(h) for h, u in samples]
    return ExponentEstimate(samples, max(vals), f"max over {len(samples)} records, lower estimate only")


def exponent_estimate(A, qmax: int, config=None, table=None, bits=None) -> ExponentEstimate:
    """max over records (height >= 2) of log(1/residual_upper) / log(height)."""
    table = table or enumerate_best_pairs(A, qmax, bits=bits, config=config)
    est = estimate_from_rows(table.rows)
    note = est.note + ("" if table.certified else "; residual bounds not fully certified")
    return ExponentEstimate(est.samples, est.omega_hat, note)


def dirichlet_check(A, Q: int, config=None, table=None) -> bool:
    """True iff some pair with height <= Q has certified residual < Q**(-n/m)."""
    m, n = A.shape
    table = table or enumerate_best_pairs(A, Q, config=config)
    best = table.best_at(Q)
    if best is None:
        return False
    return best.upper ** m * Fraction(Q) ** n < 1


def best_residual_by_height(table, heights):
    return {h: (table.best_at(h).upper if table.best_at(h) else None) for h in heights}
