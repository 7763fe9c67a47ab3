"""Exact rational polynomials and rigorous range/root machinery.

A polynomial is a plain list of ``Fraction`` coefficients, lowest degree
first.  Evaluation at rational points is exact; evaluation on an interval
goes through the outward-rounded Horner scheme of :mod:`rigdens.intervals`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .intervals import Interval, from_fraction, iv

Poly = List[Fraction]


def poly_eval(p: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_eval_iv(p: Sequence[Fraction], x: Interval) -> Interval:
    acc = iv(0)
    for c in reversed(p):
        acc = acc * x + from_fraction(c)
    return acc


def poly_derivative(p: Sequence[Fraction]) -> Poly:
    return [c * n for n, c in enumerate(p)][1:] or [Fraction(0)]


def poly_add(p: Sequence[Fraction], q: Sequence[Fraction]) -> Poly:
    n = max(len(p), len(q))
    return [
        (p[i] if i < len(p) else Fraction(0)) + (q[i] if i < len(q) else Fraction(0))
        for i in range(n)
    ]


def poly_scale(p: Sequence[Fraction], s: Fraction) -> Poly:
    return [c * s for c in p]


def poly_mul(p: Sequence[Fraction], q: Sequence[Fraction]) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def poly_compose(outer: Sequence[Fraction], inner: Sequence[Fraction]) -> Poly:
    """outer(inner(x)) by Horner over polynomial coefficients."""
    acc: Poly = [Fraction(0)]
    for c in reversed(outer):
        acc = poly_add(poly_mul(acc, inner), [c])
    while len(acc) > 1 and acc[-1] == 0:
        acc.pop()
    return acc


def poly_shift(p: Sequence[Fraction], s: Fraction) -> Poly:
    """p(x) + s on the constant coefficient."""
    out = list(p) or [Fraction(0)]
    out[0] = out[0] + s
    return out


def poly_degree(p: Sequence[Fraction]) -> int:
    d = len(p) - 1
    while d > 0 and p[d] == 0:
        d -= 1
    return d


def poly_is_linear(p: Sequence[Fraction]) -> bool:
    return poly_degree(p) <= 1


def poly_range(p: Sequence[Fraction], dom: Interval, rel_tol: float = 1e-3,
               max_depth: int = 24) -> Interval:
    """Rigorous enclosure of {p(x) : x in dom}, tightened adaptively.

    Bisects subintervals whose interval-Horner enclosure still sticks out
    beyond the hull of sampled point evaluations by more than ``rel_tol``
    of the current range magnitude.
    """
    lo_pt = poly_eval_iv(p, iv(dom.lo))
    hi_pt = poly_eval_iv(p, iv(dom.hi))
    inner = Interval.hull(lo_pt, hi_pt)  # attained values: lower bound of range
    stack = [(dom, 0)]
    out_lo, out_hi = inner.lo, inner.hi
    pending = []
    while stack:
        seg, depth = stack.pop()
        enc = poly_eval_iv(p, seg)
        scale = max(abs(out_lo), abs(out_hi), abs(enc.lo), abs(enc.hi), 1e-300)
        slack = max(enc.hi - out_hi, out_lo - enc.lo, 0.0)
        if depth >= max_depth or slack <= rel_tol * scale or seg.width <= 0:
            pending.append(enc)
            continue
        mid = seg.mid
        m_pt = poly_eval_iv(p, iv(mid))
        out_lo = min(out_lo, m_pt.lo)
        out_hi = max(out_hi, m_pt.hi)
        stack.append((Interval(seg.lo, mid), depth + 1))
        stack.append((Interval(mid, seg.hi), depth + 1))
    enc_all = Interval.hull(*pending) if pending else inner
    return Interval.hull(enc_all, Interval(out_lo, out_hi))


def monotone_root_bracket(p: Sequence[Fraction], level: Fraction,
                          a: Fraction, b: Fraction,
                          width: Fraction = Fraction(1, 10 ** 14)):
    """Bracket the unique root of p(x) = level on [a, b], p strictly monotone.

    Returns (lo, hi) rationals with lo <= root <= hi and hi - lo <= width,
    or a degenerate (r, r) when the root is hit exactly.  The linear case is
    solved exactly.
    """
    q = poly_shift(p, -level)
    if poly_is_linear(q):
        c1 = q[1] if len(q) > 1 else Fraction(0)
        if c1 == 0:
            raise ValueError("constant branch cannot cross a level")
        r = -q[0] / c1
        return (r, r)
    fa = poly_eval(q, a)
    fb = poly_eval(q, b)
    if fa == 0:
        return (a, a)
    if fb == 0:
        return (b, b)
    if (fa < 0) == (fb < 0):
        raise ValueError("no sign change: root not bracketed")
    lo, hi, flo = a, b, fa
    while hi - lo > width:
        mid = (lo + hi) / 2
        fm = poly_eval(q, mid)
        if fm == 0:
            return (mid, mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo, hi)
