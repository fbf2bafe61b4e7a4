"""Method I: elimination in truncated differential ideals.

The j-th truncation of a differential ideal adjoins the generators' total
derivatives up to order j.  Eliminating the input functions from growing
truncations eventually leaves a nonzero polynomial in the output function;
the first level where this happens yields the answer.
"""

from __future__ import annotations

import time
from collections import Counter
from itertools import combinations

from dalg import diffring
from dalg.diffring import RationalExpr, dvar, total_derivative
from dalg.errors import ComputationTimeout, DomainError, PartialResultError
from dalg.groebner import Limits, TruncatedIdeal, elimination_ideal, eliminate_linear, groebner, select_minimal
from dalg.polyring import MonomialOrder, Poly, Ring, VarId, var_key
from dalg.result import AdeResult

OPERATIONS = ("+", "-", "*", "/")


def build_relation(alpha: str, fy: str, fz: str, fw: str, ring: Ring) -> Poly:
    """Numerator of ``w - alpha(y, z)``."""
    y, z, w = ring.fn(fy), ring.fn(fz), ring.fn(fw)
    if alpha == "+":
        return w - y - z
    if alpha == "-":
        return w - y + z
    if alpha == "*":
        return w - y * z
    if alpha == "/":
        return w * z - y
    raise DomainError(f"unknown operation {alpha!r}; expected one of {', '.join(OPERATIONS)}")


def _derivs(p: Poly, k: int) -> list:
    out = [p]
    for _ in range(k):
        out.append(total_derivative(out[-1]))
    return out


def _fresh(base: str, used) -> str:
    name = base
    while name in used:
        name += "_"
    return name


def _single_fn(p: Poly) -> str:
    fns = diffring.functions_in(p)
    if len(fns) != 1:
        raise DomainError(f"each input must involve exactly one function, got {fns}")
    return fns[0]


class _RelationProblem:
    """Inputs ``p_i(f_i) = 0`` and ``den(f) * w = num(f)``."""

    def __init__(self, inputs, relation: RationalExpr, target: str):
        ring = relation.ring
        for p in inputs:
            ring = ring.merge(p.ring) if p.ring != ring else ring
        if target in ring.functions or target in ring.params or target == ring.indep:
            raise DomainError(f"output name {target!r} clashes with an input name")
        self.fns = []
        self.inputs = []
        self.param_relations = []
        for p in inputs:
            fns = diffring.functions_in(p)
            if not fns:
                self.param_relations.append(p)
                continue
            fn = _single_fn(p)
            if fn in self.fns:
                raise DomainError(f"two inputs define {fn}")
            self.fns.append(fn)
            self.inputs.append(p)
        used = set(ring.functions) | set(ring.params) | {ring.indep, target}
        self.den = relation.den
        self.sat = not self.den.is_constant()
        self.tname = _fresh("t_", used)
        self.ring = ring.extend(functions=[target], aux=[self.tname] if self.sat else [])
        self.target = target
        num, den = relation.num.to_ring(self.ring), relation.den.to_ring(self.ring)
        self.rel = den * self.ring.fn(target) - num
        self.den_r = den

    def level(self, j: int):
        gens = []
        for p in self.inputs:
            gens += [g.to_ring(self.ring) for g in _derivs(p, j)]
        gens += _derivs(self.rel, j)
        gens += [c.to_ring(self.ring) for c in self.param_relations]
        high = []
        if self.sat:
            t = VarId("aux", self.tname)
            gens.append(self.ring.var(t) * self.den_r - 1)
            high.append(t)
        return gens, high


def _keep_block(target: str, top: int, ring: Ring) -> list:
    return [dvar(target, k) for k in range(top, -1, -1)] + [VarId("indep", ring.indep)] + [
        VarId("param", p) for p in ring.params
    ]


def _split(gens, high, target: str, top: int, ring: Ring):
    """Elimination order: everything except ``target`` and ``x`` above the rest."""
    low = _keep_block(target, top, ring)
    lowset = set(low)
    others = set(high)
    for g in gens:
        others |= {v for v in g.variables() if v not in lowset}
    elim = list(high) + sorted(others - set(high), key=var_key, reverse=True)
    present = set()
    for g in gens:
        present |= g.variables()
    low = [v for v in low if v in present or v.kind != "diff"]
    return elim, low


def _refine(found, target: str, ring: Ring, deadline):
    """Lowest-order element of the ideal generated by ``found``.

    Uses an order that eliminates the highest derivatives one at a time.
    Falls back to the input list if the extra basis runs out of time.
    """
    if len(found) < 2:
        return found
    top = max(diffring.order(g, target) for g in found)
    if top <= 0:
        return found
    blocks = [[dvar(target, k)] for k in range(top, 0, -1)]
    blocks.append([dvar(target, 0), VarId("indep", ring.indep)] + [VarId("param", p) for p in ring.params])
    present = set()
    for g in found:
        present |= g.variables()
    blocks = [[v for v in b if v in present] for b in blocks]
    blocks = [b for b in blocks if b]
    order = MonomialOrder.nested(blocks)
    remaining = 10.0 if deadline is None else min(10.0, deadline - time.monotonic())
    if remaining <= 0.05:
        return found
    try:
        G = groebner(found, order, limits=Limits(max_seconds=remaining), ring=ring)
    except ComputationTimeout:
        return found
    return [g for g in G if diffring.order(g, target) >= 0] or found


_GB_SLICE = 10.0
_RESULTANT_MAX_DEGREE = 12


def _resultant_elimination(gens, elim_vars, target: str) -> list:
    """Elimination-ideal elements from pairwise resultants.

    Generators that alone carry an eliminated variable are set aside.
    If what remains involves a single eliminated variable, resultants of
    small pairs in that variable lie in the elimination ideal.
    """
    elim = set(elim_vars)
    core = list(gens)
    while True:
        count = Counter(v for g in core for v in g.variables() & elim)
        kept = [g for g in core if all(count[v] > 1 for v in g.variables() & elim)]
        if len(kept) == len(core):
            break
        core = kept
    left = set()
    for g in core:
        left |= g.variables() & elim
    if len(left) != 1:
        return []
    v = left.pop()
    pool = sorted((g for g in core if v in g.variables()), key=len)[:4]
    out = []
    for a, b in combinations(pool, 2):
        if a.degree(v) + b.degree(v) > _RESULTANT_MAX_DEGREE:
            continue
        r = diffring.resultant(a, b, v)
        if r.is_zero():
            continue
        r = diffring.strip_monomial_factor(r)
        if diffring.order(r, target) >= 0:
            out.append(r.primitive_part())
    return out


def _loop(build, target: str, ring_of, max_j: int, limits, timeout, continue_past_first, start_j: int = 0):
    start = time.monotonic()
    limits = limits or Limits()
    if timeout is None:
        timeout = limits.max_seconds
    deadline = None if timeout is None else start + timeout
    best = None
    best_j = None
    stats = {"levels": []}
    last = None
    for j in range(start_j, max_j + 1):
        if deadline is not None and time.monotonic() > deadline:
            break
        gens, high, top = build(j)
        ring = ring_of()
        elim_vars, low = _split(gens, high, target, top, ring)
        gens = eliminate_linear(gens, elim_vars)
        order = MonomialOrder.nested([elim_vars, low])
        shortcut = _resultant_elimination(gens, elim_vars, target)
        seconds = limits.max_seconds
        if deadline is not None:
            seconds = max(0.01, deadline - time.monotonic())
        if shortcut:
            # the resultants already answer this level; cap the exact basis
            seconds = _GB_SLICE if seconds is None else min(seconds, _GB_SLICE)
        lim = Limits(max_seconds=seconds, max_steps=limits.max_steps)
        try:
            G = groebner(gens, order, limits=lim, ring=ring)
        except ComputationTimeout as exc:
            if shortcut:
                G = None
            else:
                exc.stats.update({"last_level": j, "levels": stats["levels"]})
                if best is not None:
                    break
                raise
        last = j
        if G is None:
            found = shortcut
            stats["levels"].append({"j": j, "generators": len(gens), "resultants": len(found)})
        else:
            found = [g for g in elimination_ideal(G, set(low)) if diffring.order(g, target) >= 0]
            stats["levels"].append({"j": j, "generators": len(gens), "basis": len(G), "elim": len(found),
                                    "gb": G.stats.as_dict()})
        if not found:
            continue
        found = _refine(found, target, ring, deadline)
        cand = select_minimal(found, target)
        if best is None or _rank(cand, target) < _rank(best, target):
            best, best_j = cand, j
        if not continue_past_first:
            break
    if best is None:
        raise PartialResultError(
            f"no relation found for levels {start_j}..{last if last is not None else start_j - 1}",
            last_level=last,
            stats=stats,
        )
    return best, best_j, stats, (time.monotonic() - start) * 1000


def _rank(p: Poly, target: str):
    return (diffring.order(p, target), diffring.degree(p))


def truncated_ideal_arith(p: Poly, q: Poly, alpha: str, j: int, target: str = "w") -> TruncatedIdeal:
    """The level-j truncation ``<p, q, R>`` with its elimination order."""
    fy, fz = _single_fn(p), _single_fn(q)
    ring = p.ring.merge(q.ring).extend(functions=[target])
    rel = build_relation(alpha, fy, fz, target, ring)
    gens = _derivs(p.to_ring(ring), j) + _derivs(q.to_ring(ring), j) + _derivs(rel, j)
    elim, low = _split(gens, [], target, j, ring)
    return TruncatedIdeal(gens, MonomialOrder.nested([elim, low]), ring)


def relation_for(alpha: str, p: Poly, q: Poly) -> RationalExpr:
    fy, fz = _single_fn(p), _single_fn(q)
    ring = p.ring.merge(q.ring)
    y, z = RationalExpr.of(ring.fn(fy)), RationalExpr.of(ring.fn(fz))
    ops = {"+": y + z, "-": y - z, "*": y * z}
    if alpha == "/":
        return y / z
    if alpha not in ops:
        raise DomainError(f"unknown operation {alpha!r}; expected one of {', '.join(OPERATIONS)}")
    return ops[alpha]


def arithmetic_method1(p: Poly, q: Poly, alpha: str, target: str = "w", max_j: int = 6, limits=None,
                       timeout=None, continue_past_first: bool = False) -> AdeResult:
    """ADE for ``alpha(f, g)`` with ``p(f) = 0`` and ``q(g) = 0``."""
    return relation_method1([p, q], relation_for(alpha, p, q), target, max_j, limits, timeout, continue_past_first)


def relation_method1(inputs, relation: RationalExpr, target: str = "w", max_j: int = 6, limits=None,
                     timeout=None, continue_past_first: bool = False) -> AdeResult:
    """ADE for ``w = relation(x, f_1, ..., f_N)`` by truncated elimination.

    A non-constant denominator of the relation is inverted with an
    auxiliary variable so that solutions with a vanishing denominator do
    not contribute.
    """
    prob = _RelationProblem(inputs, relation, target)

    def build(j):
        gens, high = prob.level(j)
        return gens, high, j

    best, j, stats, ms = _loop(build, target, lambda: prob.ring, max_j, limits, timeout, continue_past_first)
    out = best.to_ring(Ring((target,), prob.ring.indep, prob.ring.params))
    n = sum(diffring.order(p) for p in prob.inputs)
    return AdeResult(ade=out, target=target, method="I", elapsed_ms=int(ms), bound=n + 2 if prob.inputs else None,
                     level=j, stats=stats)


def composition_chain(k: int, fy: str, fz: str, ring: Ring) -> list:
    """``S_0 .. S_k`` where ``S_j`` is the j-th derivative of ``f(g)``.

    ``y^(i)`` stands for ``f^(i)(g)`` and ``z`` for ``g``.
    """
    if k < 0:
        raise DomainError("chain length must be nonnegative")
    zp = ring.fn(fz, 1)
    S = [ring.fn(fy, 0)]
    for _ in range(k):
        cur = S[-1]
        nxt = ring.zero()
        top = diffring.order(cur, fy)
        for i in range(top + 1):
            c = cur.diff(dvar(fy, i))
            if c.is_zero():
                continue
            nxt = nxt + total_derivative(c) * ring.fn(fy, i) + c * zp * ring.fn(fy, i + 1)
        S.append(nxt)
    return S


def _outer_substituted(p: Poly, k: int, fz: str, ring: Ring) -> list:
    """``p, p', ..., p^(k)`` differentiated in their own variable, then ``x -> z``."""
    x = VarId("indep", ring.indep)
    out = []
    z = ring.fn(fz)
    for d in _derivs(p.to_ring(ring), k):
        if d.degree(x) > 0:
            d = d.subs({x: z})
        out.append(d)
    return out


def compose_method1(p: Poly, q: Poly, target: str = "w", max_j: int = 6, limits=None, timeout=None,
                    continue_past_first: bool = False) -> AdeResult:
    """ADE for ``f(g)`` with ``p(f) = 0`` (outer) and ``q(g) = 0`` (inner)."""
    fy, fz = _single_fn(p), _single_fn(q)
    if fy == fz:
        raise DomainError("outer and inner inputs must use different function names")
    ring = p.ring.merge(q.ring)
    if target in ring.functions or target in ring.params or target == ring.indep:
        raise DomainError(f"output name {target!r} clashes with an input name")
    ring = ring.extend(functions=[target])
    n = diffring.order(p, fy)
    m = diffring.order(q, fz)
    if m < 0:
        raise DomainError("the inner function must occur in its equation")
    lo = min(n, m)

    def build(j):
        top = j + lo
        chain = composition_chain(top, fy, fz, ring)
        gens = _outer_substituted(p, j, fz, ring)
        gens += _derivs(q.to_ring(ring), j)
        gens += [ring.fn(target, i) - chain[i] for i in range(top + 1)]
        return gens, [], top

    best, j, stats, ms = _loop(build, target, lambda: ring, max_j, limits, timeout, continue_past_first)
    out = best.to_ring(Ring((target,), ring.indep, ring.params))
    return AdeResult(ade=out, target=target, method="I", elapsed_ms=int(ms), bound=n + m + 2, level=j, stats=stats)


__all__ = [
    "OPERATIONS",
    "build_relation",
    "truncated_ideal_arith",
    "arithmetic_method1",
    "relation_method1",
    "composition_chain",
    "compose_method1",
]
