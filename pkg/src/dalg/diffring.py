"""Differential polynomials over Q[x, params].

A differential polynomial is a ``Poly`` whose ring lists the differential
indeterminates in ``functions``; ``y^(j)`` is ``VarId("diff", "y", j)``.
The total derivative acts by ``y^(j) -> y^(j+1)``, ``x -> 1`` and kills
parameters and auxiliary variables.
"""

from __future__ import annotations

from dataclasses import dataclass

from dalg.errors import DomainError, PreconditionError
from dalg.groebner import exact_divide
from dalg.polyring import FIELD, MASK, Poly, Ring, VarId, _remap, _union_gens, var_key

DiffPoly = Poly


def dvar(name: str, order: int = 0) -> VarId:
    return VarId("diff", name, order)


def functions_in(p: Poly) -> list:
    return sorted({v.name for v in p.variables() if v.kind == "diff"})


def _target(p: Poly, fn: str | None) -> str:
    if fn is not None:
        return fn
    names = functions_in(p)
    if len(names) != 1:
        raise DomainError(f"expected exactly one differential indeterminate, found {names}")
    return names[0]


def total_derivative(p: Poly) -> Poly:
    """delta(p) = dp/dx + sum over y^(j) of y^(j+1) * dp/dy^(j)."""
    if p.is_zero():
        return p
    succ = [VarId("diff", v.name, v.order + 1) for v in p.gens if v.kind == "diff"]
    gens = _union_gens(p.gens, tuple(sorted(set(succ), key=var_key)))
    idx = {v: i for i, v in enumerate(gens)}
    terms = _remap(p.terms, [idx[v] for v in p.gens]) if gens != p.gens else p.terms
    moves = []  # (shift of the variable, shift added after lowering)
    for v in p.gens:
        s = FIELD * idx[v]
        if v.kind == "diff":
            t = FIELD * idx[VarId("diff", v.name, v.order + 1)]
            moves.append((s, (1 << t) - (1 << s)))
        elif v.kind == "indep":
            moves.append((s, -(1 << s)))
    out: dict = {}
    get = out.get
    for m, c in terms.items():
        for s, delta in moves:
            e = (m >> s) & MASK
            if e:
                mm = m + delta
                v = get(mm)
                if v is None:
                    out[mm] = c * e
                else:
                    v = v + c * e
                    if v:
                        out[mm] = v
                    else:
                        del out[mm]
    return Poly(p.ring, gens, out)


def nth_derivative(p: Poly, k: int) -> Poly:
    for _ in range(k):
        p = total_derivative(p)
    return p


def order(p: Poly, fn: str | None = None) -> int:
    """Highest derivative order of ``fn`` in ``p``; -1 when ``fn`` is absent."""
    if p.is_zero():
        raise DomainError("order of the zero polynomial is undefined")
    if fn is None:
        orders = [v.order for v in p.variables() if v.kind == "diff"]
    else:
        orders = [v.order for v in p.variables() if v.kind == "diff" and v.name == fn]
    return max(orders) if orders else -1


def degree(p: Poly) -> int:
    """Total degree counting differential variables only."""
    if p.is_zero():
        raise DomainError("degree of the zero polynomial is undefined")
    return p.degree_in(("diff",))


def leader(p: Poly, fn: str | None = None) -> VarId:
    fn = _target(p, fn)
    n = order(p, fn)
    if n < 0:
        raise DomainError(f"{fn} does not occur")
    return dvar(fn, n)


def is_lho(p: Poly, fn: str | None = None) -> bool:
    """True iff the highest derivative of ``fn`` occurs with degree exactly 1."""
    fn = _target(p, fn)
    n = order(p, fn)
    if n < 0:
        return False
    return p.degree(dvar(fn, n)) == 1


def make_lho(p: Poly, fn: str | None = None):
    """Return ``(p, False)`` if p is l.h.o., else ``(delta(p), True)``."""
    fn = _target(p, fn)
    n = order(p, fn)
    if n < 1:
        raise PreconditionError("make_lho needs an input of positive order; order-0 inputs are algebraic constraints")
    if is_lho(p, fn):
        return p, False
    return total_derivative(p), True


@dataclass(frozen=True)
class RationalExpr:
    """Quotient ``num / den`` of differential polynomials (not reduced)."""

    num: Poly
    den: Poly

    def __post_init__(self):
        if self.den.is_zero():
            raise DomainError("rational expression with zero denominator")
        if self.num.ring != self.den.ring:
            raise DomainError("numerator and denominator belong to different contexts")

    @classmethod
    def of(cls, p: Poly) -> "RationalExpr":
        return cls(p, p.ring.one())

    @property
    def ring(self) -> Ring:
        return self.num.ring

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def _lift(self, other):
        if isinstance(other, RationalExpr):
            return other
        if isinstance(other, Poly):
            return RationalExpr.of(other)
        return RationalExpr.of(self.ring.const(other))

    def __add__(self, other):
        o = self._lift(other)
        if self.den == o.den:
            return RationalExpr(self.num + o.num, self.den)
        return RationalExpr(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return RationalExpr(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by a zero rational expression")
        return RationalExpr(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalExpr(self.den ** (-k), self.num ** (-k))
        return RationalExpr(self.num**k, self.den**k)

    def derivative(self) -> "RationalExpr":
        if self.den.is_constant():
            return RationalExpr(total_derivative(self.num), self.den)
        return RationalExpr(
            total_derivative(self.num) * self.den - self.num * total_derivative(self.den),
            self.den * self.den,
        )

    def simplified(self) -> "RationalExpr":
        """Cancel common monomial factors, the rational content and an exact quotient."""
        return RationalExpr(*_cancel(self.num, self.den))

    def evaluate(self, values):
        d = self.den.evaluate(values)
        if not isinstance(d, Poly) and d == 0:
            raise ZeroDivisionError("denominator vanishes at the given point")
        n = self.num.evaluate(values)
        if isinstance(n, Poly) or isinstance(d, Poly):
            raise DomainError("partial evaluation of a rational expression")
        return n / d

    def __str__(self) -> str:
        if self.den == 1:
            return str(self.num)
        return f"({self.num})/({self.den})"


def _monomial_gcd(*polys: Poly):
    """Common monomial factor of all terms, as a ``{VarId: exponent}`` dict."""
    common = None
    for p in polys:
        for mon in p.monomials():
            exps = dict(mon)
            if common is None:
                common = exps
            else:
                common = {v: min(e, exps[v]) for v, e in common.items() if v in exps}
            if not common:
                return {}
    return common or {}


def _cancel(num: Poly, den: Poly):
    if num.is_zero():
        return num, den.ring.one()
    g = _monomial_gcd(num, den)
    if g:
        mono = {tuple(sorted(g.items(), key=lambda p: var_key(p[0]))): 1}
        m = Poly.from_monomials(num.ring, mono)
        num = exact_divide(num, m)
        den = exact_divide(den, m)
    q = exact_divide(num, den) if not den.is_constant() else None
    if q is not None:
        num, den = q, den.ring.one()
    c = den.content()
    return num.scale(1 / c), den.scale(1 / c)


def lho_parts(p: Poly, fn: str | None = None):
    """Split an l.h.o. ``p`` as ``A*y^(n) - B``; returns ``(A, B, n)``."""
    fn = _target(p, fn)
    if not is_lho(p, fn):
        raise PreconditionError("input is not linear in its highest order term")
    n = order(p, fn)
    parts = p.coeffs_in(dvar(fn, n))
    A = parts.get(1, p.ring.zero())
    B = -parts.get(0, p.ring.zero())
    return A, B, n


def solve_highest(p: Poly, fn: str | None = None) -> RationalExpr:
    """``r_p = B/A`` for ``p = A*y^(n) - B`` (l.h.o., order >= 1)."""
    A, B, n = lho_parts(p, fn)
    if n < 1:
        raise PreconditionError("solve_highest needs positive order")
    return RationalExpr(B, A).simplified()


def substitute(p: Poly, bindings: dict) -> RationalExpr:
    """Simultaneous substitution of rational expressions for variables.

    The result is ``num/den`` with ``den`` the product of binding
    denominators raised to the degree of ``p`` in the bound variable.
    """
    binds = {}
    for v, val in bindings.items():
        if isinstance(val, RationalExpr):
            binds[v] = val
        elif isinstance(val, Poly):
            binds[v] = RationalExpr.of(val)
        else:
            binds[v] = RationalExpr.of(p.ring.const(val))
    for v, r in binds.items():
        if r.den.is_zero():
            raise DomainError(f"binding for {v} has a zero denominator")
    bound = [v for v in p.gens if v in binds and p.degree(v) > 0]
    if not bound:
        return RationalExpr.of(p)
    ring = p.ring
    for r in binds.values():
        ring = ring if r.ring == ring else ring.merge(r.ring)
    degs = {v: p.degree(v) for v in bound}
    num_pows: dict = {}
    den_pows: dict = {}

    def npow(v, e):
        if (v, e) not in num_pows:
            num_pows[(v, e)] = binds[v].num.to_ring(ring) ** e
        return num_pows[(v, e)]

    def dpow(v, e):
        if (v, e) not in den_pows:
            den_pows[(v, e)] = binds[v].den.to_ring(ring) ** e
        return den_pows[(v, e)]

    groups: dict = {}
    for mon, c in p.monomials().items():
        key = tuple(dict(mon).get(v, 0) for v in bound)
        rest = tuple((v, e) for v, e in mon if v not in binds)
        groups.setdefault(key, {})[rest] = c
    num = ring.zero()
    for key, rest in groups.items():
        term = Poly.from_monomials(ring, rest)
        for v, e in zip(bound, key):
            if e:
                term = term * npow(v, e)
            if degs[v] - e:
                term = term * dpow(v, degs[v] - e)
        num = num + term
    den = ring.one()
    for v in bound:
        den = den * dpow(v, degs[v])
    return RationalExpr(num, den)


def clear_denominators(r: RationalExpr) -> Poly:
    """Primitive numerator of ``r`` with common monomial factors removed."""
    if r.num.is_zero():
        return r.num
    num = r.num
    if not r.den.is_constant():
        q = exact_divide(num, r.den)
        if q is not None:
            num = q
    return strip_monomial_factor(num).primitive_part()


def strip_monomial_factor(p: Poly) -> Poly:
    """Divide ``p`` by the largest monomial dividing all of its terms."""
    g = _monomial_gcd(p)
    if not g:
        return p
    mono = {tuple(sorted(g.items(), key=lambda q: var_key(q[0]))): 1}
    return exact_divide(p, Poly.from_monomials(p.ring, mono))


def diff_reduce(r: Poly, q: Poly, fn: str | None = None) -> Poly:
    """Pseudo-reduce ``r`` by the l.h.o. ``q`` and its total derivatives.

    Every ``y^(n+k)`` is eliminated with ``delta^k(q) = A*y^(n+k) + T_k``
    (``A`` the separant of q) by the substitution ``y^(n+k) -> -T_k/A``,
    clearing the denominator ``A^deg`` immediately.  The result is free of
    ``y^(j)`` for ``j >= n``.
    """
    fn = _target(q, fn)
    A, B, n = lho_parts(q, fn)
    if n < 0:
        raise PreconditionError("reducer does not involve the function")
    if r.is_zero():
        return r
    ring = r.ring.merge(q.ring) if r.ring != q.ring else r.ring
    r = r.to_ring(ring)
    A = A.to_ring(ring)
    top = order(r, fn)
    derivs = [q.to_ring(ring)]
    for _ in range(max(0, top - n)):
        derivs.append(total_derivative(derivs[-1]))
    for N in range(top, n - 1, -1):
        v = dvar(fn, N)
        parts = r.coeffs_in(v)
        d = max(parts) if parts else 0
        if d == 0:
            continue
        dq = derivs[N - n]
        T = dq - A * ring.var(v)  # delta^k(q) = A*y^(N) + T
        negT = -T
        out = ring.zero()
        tpow = ring.one()
        for e in range(0, d + 1):
            if e:
                tpow = tpow * negT
            ce = parts.get(e)
            if ce is not None:
                out = out + ce * tpow * A ** (d - e)
        r = out
        if r.is_zero():
            return r
    return r


def pseudo_remainder(a: Poly, b: Poly, v: VarId) -> Poly:
    """Pseudo-remainder of ``a`` by ``b`` as polynomials in ``v``."""
    db = b.degree(v)
    if b.is_zero():
        raise DomainError("pseudo-division by zero")
    if db == 0:
        return a.ring.zero() if not a.is_zero() else a
    ring = a.ring.merge(b.ring) if a.ring != b.ring else a.ring
    a, b = a.to_ring(ring), b.to_ring(ring)
    lb = b.coeffs_in(v)[db]
    xv = ring.var(v)
    while not a.is_zero():
        da = a.degree(v)
        if da < db:
            break
        la = a.coeffs_in(v)[da]
        a = lb * a - la * xv ** (da - db) * b
    return a


def ideal_reduce(r: Poly, q: Poly, fn: str | None = None) -> Poly:
    """Reduce ``r`` modulo the differential ideal of ``q``.

    A zero result shows that ``r`` vanishes on every generic solution of
    ``q = 0``.  For ``q`` linear in its highest derivative this is
    :func:`diff_reduce`; otherwise ``r`` is first reduced by the derivative
    of ``q`` and then pseudo-divided by ``q`` in its leader.
    """
    fn = _target(q, fn)
    if is_lho(q, fn):
        return diff_reduce(r, q, fn)
    n = order(q, fn)
    r = diff_reduce(r, total_derivative(q), fn)
    if r.is_zero():
        return r
    return pseudo_remainder(r, q, dvar(fn, n))


def shift(p: Poly, k: int, fn: str | None = None) -> Poly:
    """Replace every ``y^(j)`` by ``y^(j+k)``."""
    fn = _target(p, fn)
    mapping = {}
    for v in p.variables():
        if v.kind == "diff" and v.name == fn:
            if v.order + k < 0:
                raise DomainError("shift would produce a negative derivative order")
            mapping[v] = dvar(fn, v.order + k)
    return p.rename(mapping)


def antiderivative_ade(p: Poly, fn: str | None = None) -> Poly:
    """ADE for any antiderivative: every ``y^(j)`` becomes ``y^(j+1)``."""
    return shift(p, 1, fn)


def resultant(p: Poly, q: Poly, v: VarId) -> Poly:
    """Sylvester resultant in ``v`` via fraction-free (Bareiss) elimination."""
    pc = p.coeffs_in(v)
    qc = q.coeffs_in(v)
    m = max(pc) if pc else 0
    n = max(qc) if qc else 0
    ring = p.ring
    zero = ring.zero()
    if m == 0 and n == 0:
        return ring.one()
    if m == 0:
        return pc.get(0, zero) ** n
    if n == 0:
        return qc.get(0, zero) ** m
    size = m + n
    rows = []
    for i in range(n):
        row = [zero] * size
        for e, c in pc.items():
            row[i + m - e] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for e, c in qc.items():
            row[i + n - e] = c
        rows.append(row)
    return _bareiss_det(rows, ring)


def _bareiss_det(M, ring: Ring) -> Poly:
    n = len(M)
    M = [list(r) for r in M]
    sign = 1
    prev = ring.one()
    for k in range(n - 1):
        if M[k][k].is_zero():
            for i in range(k + 1, n):
                if not M[i][k].is_zero():
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return ring.zero()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                val = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                if not prev.is_constant() or prev != 1:
                    quo = exact_divide(val, prev)
                    if quo is None:
                        raise DomainError("inexact division in fraction-free elimination")
                    val = quo
                M[i][j] = val
        prev = M[k][k]
    det = M[n - 1][n - 1]
    return det if sign > 0 else -det


def derivative_ade(p: Poly, fn: str | None = None) -> Poly:
    """ADE for the derivative of a solution: ``res_y(p, delta p)`` shifted down."""
    fn = _target(p, fn)
    y0 = dvar(fn, 0)
    if p.degree(y0) <= 0:
        # y itself is absent, so p already constrains f', f'', ...
        return shift(p, -1, fn).primitive_part()
    res = resultant(p, total_derivative(p), y0)
    if res.is_zero():
        raise DomainError("input not irreducible/coprime: the resultant vanishes identically")
    return shift(res, -1, fn).primitive_part()

