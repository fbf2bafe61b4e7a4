"""Exact truncated power series and an independent check of computed ADEs.

Input ADEs are solved as power series from rational initial jets, the
series are combined the way the operation combines functions, and the
output ADE is evaluated on the result.  Nothing here uses Groebner bases,
so the check does not share code paths with either method.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from gmpy2 import mpq, mpz

from dalg import diffring
from dalg.diffring import RationalExpr, dvar, total_derivative
from dalg.errors import DomainError
from dalg.polyring import Poly, VarId, rational

DEFAULT_MARGIN = 8


class TruncSeries:
    """``f(a + s) = c_0 + c_1 s + ... + c_T s^T + O(s^(T+1))``."""

    __slots__ = ("coeffs", "point")

    def __init__(self, coeffs, point=0):
        self.coeffs = [rational(c) for c in coeffs]
        if not self.coeffs:
            raise DomainError("a series needs at least one coefficient")
        self.point = rational(point)

    @classmethod
    def constant(cls, c, T: int, point=0) -> "TruncSeries":
        return cls([c] + [0] * T, point)

    @classmethod
    def variable(cls, T: int, point=0) -> "TruncSeries":
        """The independent variable ``x = a + s``."""
        cs = [point, 1] + [0] * (T - 1) if T >= 1 else [point]
        return cls(cs, point)

    @property
    def T(self) -> int:
        return len(self.coeffs) - 1

    def truncate(self, T: int) -> "TruncSeries":
        if T > self.T:
            raise DomainError(f"cannot extend a series known to order {self.T} up to {T}")
        return TruncSeries(self.coeffs[: T + 1], self.point)

    def _other(self, other):
        if isinstance(other, TruncSeries):
            if other.point != self.point:
                raise DomainError(f"series expanded at {self.point} and {other.point} cannot be combined")
            return other
        return TruncSeries.constant(rational(other), self.T, self.point)

    def __add__(self, other):
        o = self._other(other)
        T = min(self.T, o.T)
        return TruncSeries([self.coeffs[k] + o.coeffs[k] for k in range(T + 1)], self.point)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries([-c for c in self.coeffs], self.point)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            c = rational(other)
            return TruncSeries([c * a for a in self.coeffs], self.point)
        o = self._other(other)
        T = min(self.T, o.T)
        a, b = self.coeffs, o.coeffs
        out = []
        for k in range(T + 1):
            acc = mpq(0)
            for i in range(k + 1):
                if a[i] and b[k - i]:
                    acc += a[i] * b[k - i]
            out.append(acc)
        return TruncSeries(out, self.point)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        out = TruncSeries.constant(1, self.T, self.point)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def reciprocal(self) -> "TruncSeries":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise DomainError("reciprocal of a series with zero constant term")
        a = self.coeffs
        out = [1 / c0]
        for k in range(1, self.T + 1):
            acc = mpq(0)
            for i in range(1, k + 1):
                if a[i]:
                    acc += a[i] * out[k - i]
            out.append(-acc / c0)
        return TruncSeries(out, self.point)

    def __truediv__(self, other):
        if not isinstance(other, TruncSeries):
            c = rational(other)
            if c == 0:
                raise ZeroDivisionError("division of a series by zero")
            return self * (1 / c)
        return self * self._other(other).reciprocal()

    def __rtruediv__(self, other):
        return self._other(other) * self.reciprocal()

    def derivative(self) -> "TruncSeries":
        if self.T == 0:
            raise DomainError("derivative of a series known only to order 0")
        return TruncSeries([k * self.coeffs[k] for k in range(1, self.T + 1)], self.point)

    def nth_derivative(self, n: int) -> "TruncSeries":
        s = self
        for _ in range(n):
            s = s.derivative()
        return s

    def antiderivative(self, c0=0) -> "TruncSeries":
        return TruncSeries([c0] + [self.coeffs[k] / (k + 1) for k in range(self.T + 1)], self.point)

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """``self(inner(x))``; ``self`` must be expanded at ``inner``'s value."""
        b = inner.coeffs[0]
        if b != self.point:
            raise DomainError(f"outer series is expanded at {self.point} but the inner value is {b}")
        T = min(self.T, inner.T)
        d = TruncSeries([0] + inner.coeffs[1: T + 1], inner.point)
        out = TruncSeries.constant(self.coeffs[T], T, inner.point)
        for k in range(T - 1, -1, -1):
            out = out * d + self.coeffs[k]
        return out

    def reversion(self) -> "TruncSeries":
        """Compositional inverse, expanded at ``f(a)`` with value ``a``."""
        if self.T < 1 or self.coeffs[1] == 0:
            raise DomainError("reversion needs a nonzero first derivative")
        T = self.T
        h = TruncSeries([0] + self.coeffs[1:], 0)
        h1 = self.coeffs[1]
        r = [mpq(0), 1 / h1] + [mpq(0)] * (T - 1)
        for k in range(2, T + 1):
            comp = h.compose(TruncSeries(r[: k + 1], 0)) if k <= T else None
            r[k] = -comp.coeffs[k] / h1
        return TruncSeries([self.point] + r[1:], self.coeffs[0])

    def valuation(self):
        for k, c in enumerate(self.coeffs):
            if c != 0:
                return k
        return None

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.point == other.point and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"TruncSeries({[str(c) for c in self.coeffs]}, point={self.point})"


# ---------------------------------------------------------------------------
# evaluating differential polynomials on series


def evaluate_on_series(p: Poly, series: dict, params: dict, point, T: int | None = None) -> TruncSeries:
    """``p`` with each function replaced by its series and ``x`` by ``a + s``."""
    point = rational(point)
    derivs: dict = {}
    for v in p.variables():
        if v.kind == "diff":
            if v.name not in series:
                raise DomainError(f"no series for function {v.name}")
            derivs[v] = series[v.name].nth_derivative(v.order)
        elif v.kind == "param":
            if v.name not in params:
                raise DomainError(f"no value for parameter {v.name}")
    Tmin = min([s.T for s in derivs.values()] + ([T] if T is not None else []) + [10**9])
    if Tmin == 10**9:
        Tmin = T if T is not None else 0
    xs = TruncSeries.variable(Tmin, point)
    values = {}
    for v, s in derivs.items():
        values[v] = s.truncate(Tmin)
    pows: dict = {}
    total = TruncSeries.constant(0, Tmin, point)
    for mon, c in p.monomials().items():
        coef = rational(c)
        term = None
        for v, e in mon:
            if v.kind == "param":
                coef = coef * rational(params[v.name]) ** e
                continue
            key = (v, e)
            if key not in pows:
                base = xs if v.kind == "indep" else values.get(v)
                if base is None:
                    raise DomainError(f"cannot evaluate variable {v} on a series")
                pows[key] = base**e
            term = pows[key] if term is None else term * pows[key]
        total = total + (TruncSeries.constant(coef, Tmin, point) if term is None else term * coef)
    return total


def _eval_point(p: Poly, values: dict, params: dict, point) -> mpq:
    vals = {}
    for v in p.variables():
        if v.kind == "param":
            vals[v] = rational(params[v.name])
        elif v.kind == "indep":
            vals[v] = rational(point)
        else:
            vals[v] = values[v]
    return p.evaluate(vals)


def series_from_ade(p: Poly, jet, T: int, point=0, params=None, fn: str | None = None) -> TruncSeries:
    """Power series solution of ``p`` with initial values ``jet``.

    ``jet`` lists ``f(a), f'(a), ...`` up to the order of the equation that
    is actually solved: the order of ``p`` when ``p`` is linear in its top
    derivative, one more otherwise (the extra value must be a root of
    ``p``), and one value for an order-0 equation.
    """
    params = params or {}
    fn = diffring._target(p, fn)
    point = rational(point)
    n = diffring.order(p, fn)
    if n == 0 or not diffring.is_lho(p, fn):
        p1 = total_derivative(p)
    else:
        p1 = p
    n1 = diffring.order(p1, fn)
    jet = [rational(v) for v in jet]
    if len(jet) != n1:
        raise DomainError(f"expected {n1} initial values for {fn}, got {len(jet)}")
    at = {dvar(fn, j): jet[j] for j in range(n1)}
    if p1 is not p:
        if _eval_point(p, at, params, point) != 0:
            raise DomainError("initial values do not satisfy the equation")
    A, B, _ = diffring.lho_parts(p1, fn)
    A0 = _eval_point(A, at, params, point)
    if A0 == 0:
        raise DomainError("singular initial point: the leading coefficient vanishes; choose another jet")
    coeffs = [jet[j] / math.factorial(j) for j in range(n1)]
    if T < n1 - 1:
        return TruncSeries(coeffs[: T + 1], point)
    for k in range(0, T - n1 + 1):
        cur = TruncSeries(coeffs + [mpq(0)], point)
        res = evaluate_on_series(p1, {fn: cur}, params, point, T=k)
        rk = res.coeffs[k]
        scale = mpq(math.factorial(k + n1), math.factorial(k))
        coeffs.append(-rk / (A0 * scale))
    return TruncSeries(coeffs, point)


# ---------------------------------------------------------------------------
# generic jets

_BASE = [1, 2, -1, 3, -2, mpq(1, 2), mpq(3, 5), mpq(4, 5), mpq(5, 3), mpq(5, 4), -3, mpq(-1, 2), mpq(2, 3),
         mpq(3, 2), mpq(5, 13), mpq(12, 13), mpq(13, 5), mpq(13, 12), mpq(-3, 5), mpq(-4, 5), mpq(-5, 3),
         mpq(1, 3), 4, mpq(-5, 4), mpq(7, 3), mpq(8, 17), mpq(17, 8), mpq(-2, 3), 5, mpq(1, 4)]


def candidates() -> list:
    """Small nonzero rationals in a fixed order."""
    return [mpq(c) for c in _BASE]


def _divisors(n: int, limit: int = 10**12):
    n = abs(int(n))
    if n == 0 or n > limit:
        return None
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i * i != n:
                out.append(n // i)
        i += 1
    return sorted(out)


def rational_roots(coeffs) -> list:
    """Rational roots of ``sum coeffs[k] t^k`` (exact), sorted; ``None`` if too large to search."""
    cs = [rational(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return []
    den = 1
    for c in cs:
        den = den * c.denominator // math.gcd(den, int(c.denominator))
    ints = [int(c * den) for c in cs]
    roots = []
    while ints and ints[0] == 0:
        roots.append(mpq(0))
        ints = ints[1:]
    if len(ints) <= 1:
        return sorted(set(roots))
    if len(ints) == 2:
        roots.append(mpq(-ints[0], ints[1]))
        return sorted(set(roots))
    ps = _divisors(ints[0])
    qs = _divisors(ints[-1])
    if ps is None or qs is None or len(ps) * len(qs) > 20000:
        return None
    for a in ps:
        for b in qs:
            for s in (1, -1):
                r = mpq(s * a, b)
                val = mpq(0)
                for c in reversed(ints):
                    val = val * r + c
                if val == 0:
                    roots.append(r)
    return sorted(set(roots))


@dataclass
class InitialJet:
    """``f(a), f'(a), ...`` for one function."""

    fn: str
    point: mpq
    values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"fn": self.fn, "point": str(self.point), "values": [str(v) for v in self.values]}


def jet_length(p: Poly, fn: str | None = None) -> int:
    fn = diffring._target(p, fn)
    n = diffring.order(p, fn)
    return n if n > 0 and diffring.is_lho(p, fn) else n + 1


def generic_jet(p: Poly, point=0, avoid=(), params=None, rng: random.Random | None = None, fn: str | None = None,
                tries: int = 400, free=()) -> InitialJet:
    """A rational jet consistent with ``p`` that keeps ``avoid`` nonzero.

    Lower values are drawn from small rationals; for an equation that is not
    linear in its top derivative (or of order 0) the top value is a rational
    root of ``p`` with nonzero separant.  When no such root exists and ``p``
    is linear in one of the ``free`` parameters, the top value is drawn as
    well and that parameter is solved for (``params`` is updated in place).
    """
    fn = diffring._target(p, fn)
    params = params or {}
    point = rational(point)
    rng = rng or random.Random(0)
    n = diffring.order(p, fn)
    lho = n > 0 and diffring.is_lho(p, fn)
    cands = candidates()
    for attempt in range(tries):
        low = [cands[rng.randrange(min(len(cands), 8 + attempt // 4))] for _ in range(n)]
        at = {dvar(fn, j): low[j] for j in range(n)}
        if lho:
            A, _, _ = diffring.lho_parts(p, fn)
            if _eval_point(A, at, params, point) == 0:
                continue
            values = low
        else:
            top = dvar(fn, n)
            parts = p.coeffs_in(top)
            coeffs = [0] * (max(parts) + 1)
            for e, c in parts.items():
                coeffs[e] = _eval_point(c, at, params, point)
            roots = rational_roots(coeffs)
            if not roots:
                solved = _solve_param(p, at, top, free, params, point, cands, rng)
                if solved is None:
                    continue
                roots = [solved]
            sep = p.diff(top)
            values = None
            for r in sorted(roots, key=lambda r: (r == 0, abs(r))):
                at2 = dict(at)
                at2[top] = r
                if _eval_point(sep, at2, params, point) != 0:
                    values = low + [r]
                    break
            if values is None:
                continue
            at = at2
        at_all = {dvar(fn, j): values[j] for j in range(len(values))}
        if any(_eval_point(q, at_all, params, point) == 0 for q in avoid):
            continue
        return InitialJet(fn, point, values)
    raise DomainError(f"no rational consistent jet found for {fn}; supply one explicitly")


def _solve_param(p: Poly, at: dict, top: VarId, free, params: dict, point, cands, rng):
    """Draw the top value and solve ``p = 0`` for a free parameter it is linear in."""
    for name in free:
        pv = VarId("param", name)
        if p.degree(pv) != 1:
            continue
        r = cands[rng.randrange(len(cands))]
        at2 = dict(at)
        at2[top] = r
        rest = {k: v for k, v in params.items() if k != name}
        parts = p.coeffs_in(pv)
        a = _eval_point(parts[1], at2, rest, point)
        if a == 0:
            continue
        b = _eval_point(parts.get(0, p.ring.zero()), at2, rest, point)
        params[name] = -b / a
        return r
    return None


def generic_params(names, rng: random.Random) -> dict:
    cands = candidates()
    return {nm: cands[rng.randrange(len(cands))] * (1 + rng.randrange(3)) for nm in names}


# ---------------------------------------------------------------------------
# vanishing check


@dataclass
class VanishingReport:
    passed: bool
    truncation: int
    checked_up_to: int
    first_nonzero: int | None = None
    value: str | None = None
    jets: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "truncation": self.truncation,
            "checked_up_to": self.checked_up_to,
            "first_nonzero": self.first_nonzero,
            "value": self.value,
            "jets": self.jets,
            "params": {k: str(v) for k, v in self.params.items()},
            "note": self.note,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def check_vanishing(ade: Poly, h: TruncSeries, fn: str | None = None, params=None,
                    margin: int = DEFAULT_MARGIN) -> VanishingReport:
    """Evaluate ``ade`` at the series ``h``; all known coefficients must vanish."""
    fn = diffring._target(ade, fn) if fn is None else fn
    params = params or {}
    order = max(diffring.order(ade, fn), 0)
    if h.T < order + margin:
        raise DomainError(f"series truncation {h.T} is below order {order} plus margin {margin}")
    res = evaluate_on_series(ade, {fn: h}, params, h.point)
    checked = h.T - order
    for k in range(checked + 1):
        if res.coeffs[k] != 0:
            return VanishingReport(False, h.T, checked, k, str(res.coeffs[k]), params=dict(params))
    return VanishingReport(True, h.T, checked, params=dict(params))


# ---------------------------------------------------------------------------
# end-to-end verification of operation results


def default_truncation(ade: Poly, fn: str) -> int:
    return max(diffring.order(ade, fn), 0) + diffring.degree(ade) + 10


def _series_for(p: Poly, fn: str, T: int, params: dict, rng, point, jet=None, avoid=(), locked=None):
    """Series solution of ``p``; parameters not yet in ``locked`` may be solved for."""
    names = sorted(v.name for v in p.variables() if v.kind == "param")
    if jet is None:
        free = [n for n in names if locked is None or n not in locked]
        jet = generic_jet(p, point, avoid=avoid, params=params, rng=rng, fn=fn, free=free)
    if locked is not None:
        locked.update(names)
    return series_from_ade(p, jet.values, T, jet.point, params, fn), jet


def verify(ade: Poly, fn: str, build, params_names=(), count: int = 2, seed: int = 1, margin: int = DEFAULT_MARGIN,
           T: int | None = None, fixed_params=None, attempts: int = 12) -> dict:
    """Run ``build(T, params, rng)`` -> ``(series, jets)`` for ``count`` jets and check.

    The returned report has ``passed`` (all runs passed), ``runs`` and
    ``skipped`` (runs where no consistent rational jet was found).
    """
    T = T or default_truncation(ade, fn)
    T = max(T, max(diffring.order(ade, fn), 0) + margin)
    rng = random.Random(seed)
    runs = []
    seen = set()
    skipped = 0
    tries = 0
    while len(runs) < count and tries < attempts:
        tries += 1
        params = dict(fixed_params) if fixed_params is not None else generic_params(params_names, rng)
        try:
            h, jets = build(T, params, rng)
        except (DomainError, ZeroDivisionError) as exc:
            skipped += 1
            last_note = str(exc)
            continue
        key = (tuple(str(c) for c in h.coeffs[:4]), tuple(sorted((k, str(v)) for k, v in params.items())))
        if key in seen:
            continue
        seen.add(key)
        rep = check_vanishing(ade, h, fn, params, margin)
        rep.jets = [j.to_dict() for j in jets]
        runs.append(rep)
    passed = bool(runs) and all(r.passed for r in runs) and len(runs) >= min(count, 1)
    report = {"passed": passed, "runs": [r.to_dict() for r in runs], "truncation": T, "skipped": skipped}
    if not runs:
        report["note"] = f"no consistent rational jets found ({last_note})" if skipped else "no runs"
    return report


def verify_relation(ade: Poly, fn: str, inputs, relation: RationalExpr, count: int = 2, seed: int = 1,
                    jets=None, margin: int = DEFAULT_MARGIN, point=0, fixed_params=None) -> dict:
    """Check ``ade`` on ``relation(x, f_1, ..., f_N)`` for series solutions of the inputs."""
    fns = [diffring.functions_in(p) for p in inputs]
    params_names = sorted(set(relation.ring.params) | {v.name for p in inputs for v in p.variables()
                                                       if v.kind == "param"})
    for p in inputs:
        if not diffring.functions_in(p):
            return {"passed": None, "runs": [], "note": "parameter relations cannot be checked with rational values"}

    def build(T, params, rng):
        series, used, locked = {}, [], set(relation.ring.params) & {v.name for v in
                                                                  relation.num.variables() | relation.den.variables()}
        Tin = T + 1
        for i, p in enumerate(inputs):
            f = fns[i][0]
            jet = None if jets is None or i >= len(jets) or jets[i] is None else jets[i]
            s, j = _series_for(p, f, Tin, params, rng, point, jet, locked=locked)
            series[f] = s
            used.append(j)
        num = evaluate_on_series(relation.num, series, params, point, T=Tin)
        den = evaluate_on_series(relation.den, series, params, point, T=Tin)
        if den.coeffs[0] == 0:
            raise DomainError("relation denominator vanishes at the expansion point")
        return num / den, used

    return verify(ade, fn, build, params_names, count, seed, margin, fixed_params=fixed_params)


def verify_compose(ade: Poly, fn: str, outer: Poly, inner: Poly, count: int = 2, seed: int = 1, jets=None,
                   margin: int = DEFAULT_MARGIN, point=0, fixed_params=None) -> dict:
    """Check ``ade`` on ``f(g(x))`` with ``outer(f) = 0`` and ``inner(g) = 0``."""
    fo = diffring.functions_in(outer)[0]
    fi = diffring.functions_in(inner)[0]
    params_names = sorted({v.name for p in (outer, inner) for v in p.variables() if v.kind == "param"})

    def build(T, params, rng):
        jet_in = None if not jets or jets[1] is None else jets[1]
        jet_out = None if not jets or jets[0] is None else jets[0]
        locked = set()
        g, jg = _series_for(inner, fi, T + 1, params, rng, point, jet_in, locked=locked)
        b = g.coeffs[0]
        if jet_out is not None and rational(jet_out.point) != b:
            raise DomainError(f"outer jet must be given at the inner value {b}")
        f, jf = _series_for(outer, fo, T + 1, params, rng, b, jet_out, locked=locked)
        return f.compose(g), [jf, jg]

    return verify(ade, fn, build, params_names, count, seed, margin, fixed_params=fixed_params)


def verify_inverse(ade: Poly, fn: str, p: Poly, count: int = 2, seed: int = 1, jets=None,
                   margin: int = DEFAULT_MARGIN, point=0, fixed_params=None) -> dict:
    """Check ``ade`` (in ``fn`` of the new variable) on the reversion of a solution of ``p``."""
    f = diffring.functions_in(p)[0]
    params_names = sorted({v.name for v in p.variables() if v.kind == "param"})

    def build(T, params, rng):
        jet = None if not jets else jets[0]
        s, j = _series_for(p, f, T + 1, params, rng, point, jet, locked=set())
        return s.reversion(), [j]

    return verify(ade, fn, build, params_names, count, seed, margin, fixed_params=fixed_params)


def verify_derivative(ade: Poly, fn: str, p: Poly, k: int = 1, count: int = 2, seed: int = 1, jets=None,
                      margin: int = DEFAULT_MARGIN, point=0, fixed_params=None) -> dict:
    """``k = 1`` checks the derivative, ``k = -1`` an antiderivative."""
    f = diffring.functions_in(p)[0]
    params_names = sorted({v.name for v in p.variables() if v.kind == "param"})

    def build(T, params, rng):
        jet = None if not jets else jets[0]
        s, j = _series_for(p, f, T + 2, params, rng, point, jet, locked=set())
        c0 = candidates()[rng.randrange(6)]
        return (s.derivative() if k == 1 else s.antiderivative(c0)), [j]

    return verify(ade, fn, build, params_names, count, seed, margin, fixed_params=fixed_params)


def solve_model_series(model, values: dict, T: int, params: dict, point=0) -> dict:
    """Series of the states of a rational first-order system from initial values."""
    point = rational(point)
    states = list(model.states)
    ser = {s: [rational(values[s])] for s in states}
    for k in range(T):
        cur = {s: TruncSeries(ser[s], point) for s in states}
        step = {}
        for s, r in zip(states, model.rhs):
            num = _eval_aux(r.num, cur, params, point, k)
            den = _eval_aux(r.den, cur, params, point, k)
            if den.coeffs[0] == 0:
                raise DomainError("model denominator vanishes at the initial point")
            step[s] = (num / den).coeffs[k]
        for s in states:
            ser[s].append(step[s] / (k + 1))
    return {s: TruncSeries(ser[s], point) for s in states}


def _eval_aux(p: Poly, cur: dict, params: dict, point, T: int) -> TruncSeries:
    mapping = {}
    for v in p.variables():
        if v.kind == "aux":
            mapping[v] = cur[v.name].truncate(T)
    xs = TruncSeries.variable(T, point)
    total = TruncSeries.constant(0, T, point)
    for mon, c in p.monomials().items():
        term = TruncSeries.constant(c, T, point)
        for v, e in mon:
            if v.kind == "param":
                term = term * rational(params[v.name]) ** e
            elif v.kind == "indep":
                term = term * xs**e
            else:
                term = term * mapping[v] ** e
        total = total + term
    return total


def verify_model(ade: Poly, fn: str, model, count: int = 2, seed: int = 1, margin: int = DEFAULT_MARGIN,
                 point=0, initial=None, fixed_params=None) -> dict:
    """Check ``ade`` on the output of ``model`` along series trajectories."""
    if model.constraints or model.param_relations:
        return {"passed": None, "runs": [], "note": "models with algebraic constraints need explicit initial values"}

    def build(T, params, rng):
        cands = candidates()
        vals = initial or {s: cands[rng.randrange(10)] for s in model.states}
        ser = solve_model_series(model, vals, T + 1, params, point)
        num = _eval_aux(model.output.num, ser, params, point, T + 1)
        den = _eval_aux(model.output.den, ser, params, point, T + 1)
        if den.coeffs[0] == 0:
            raise DomainError("model output denominator vanishes at the initial point")
        jet = InitialJet("model", rational(point), [vals[s] for s in model.states])
        return num / den, [jet]

    return verify(ade, fn, build, model.ring.params, count, seed, margin, fixed_params=fixed_params)


def parse_jet(text: str, fn: str) -> InitialJet:
    """``"v0,v1,...[@a]"`` to an ``InitialJet``."""
    point = mpq(0)
    if "@" in text:
        text, pt = text.split("@", 1)
        point = _parse_rational(pt)
    values = [_parse_rational(t) for t in text.split(",") if t.strip()]
    if not values:
        raise DomainError("empty jet")
    return InitialJet(fn, point, values)


def _parse_rational(t: str) -> mpq:
    t = t.strip()
    try:
        if "/" in t:
            a, b = t.split("/", 1)
            return mpq(mpz(a.strip()), mpz(b.strip()))
        return mpq(mpz(t))
    except ValueError:
        raise DomainError(f"not a rational number: {t!r}") from None


__all__ = [
    "TruncSeries",
    "InitialJet",
    "VanishingReport",
    "series_from_ade",
    "generic_jet",
    "rational_roots",
    "evaluate_on_series",
    "check_vanishing",
    "verify_relation",
    "verify_compose",
    "verify_inverse",
    "verify_derivative",
    "verify_model",
    "solve_model_series",
    "parse_jet",
]
