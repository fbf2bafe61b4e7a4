"""Method II: rational dynamical models and their minimal output ADE.

A model ``u' = A(u), z = B(u)`` lives in a ring whose states are auxiliary
(algebraic) variables.  ``sys_to_min_diff_poly`` finds the lowest-order
relation among ``x, z, z', ...``.  Two reductions are provided:

``reduced`` (default)
    Along the flow every ``z^(k)`` equals ``N_k / D_k`` with ``N_k`` a
    polynomial in the states and ``D_k`` a product of denominator factors.
    Eliminating the state derivatives from the saturated truncated ideal
    leaves ``<D_k z^(k) - N_k, k <= K> : Q^oo``, which is what is solved
    for ``K = 0, 1, ...``.  The first ``K`` with a relation gives a height-one
    prime, hence a principal ideal whose generator is the answer.

``full``
    The literal construction with state derivatives as ring variables, all
    derivatives up to the model dimension and one Groebner basis.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from gmpy2 import mpq

from dalg import diffring
from dalg.diffring import RationalExpr, dvar, substitute, total_derivative
from dalg.errors import ComputationTimeout, DalgError, DomainError
from dalg.groebner import Limits, diff_order, elimination_ideal, exact_divide, groebner, select_minimal
from dalg.method1 import composition_chain
from dalg.polyring import MonomialOrder, Poly, Ring, VarId, var_key
from dalg.result import AdeResult


def _aux(name: str) -> VarId:
    return VarId("aux", name)


@dataclass
class DynModel:
    """States ``u_i' = rhs[i]``, output ``z = output``.

    ``ring`` holds the states as auxiliary variables.  ``constraints`` are
    algebraic relations the states satisfy along every trajectory;
    ``param_relations`` are relations among parameters only.
    """

    ring: Ring
    states: tuple
    rhs: tuple
    output: RationalExpr
    constraints: tuple = ()
    param_relations: tuple = ()

    def __post_init__(self):
        self.states = tuple(self.states)
        self.rhs = tuple(r if isinstance(r, RationalExpr) else RationalExpr.of(r) for r in self.rhs)
        if not isinstance(self.output, RationalExpr):
            self.output = RationalExpr.of(self.output)
        self.constraints = tuple(c for c in self.constraints if not c.is_zero())
        self.param_relations = tuple(c for c in self.param_relations if not c.is_zero())
        if len(self.states) != len(self.rhs):
            raise DomainError(f"model has {len(self.states)} states but {len(self.rhs)} right-hand sides")
        if not self.states:
            raise DomainError("a dynamical model needs at least one state")
        allowed = {_aux(s) for s in self.states} | {VarId("indep", self.ring.indep)}
        allowed |= {VarId("param", p) for p in self.ring.params}
        for expr in list(self.rhs) + [self.output]:
            for part in (expr.num, expr.den):
                bad = part.variables() - allowed
                if bad:
                    raise DomainError(f"model expression uses undeclared variables {sorted(map(str, bad))}")

    @property
    def dimension(self) -> int:
        return len(self.states)

    def state_vars(self) -> list:
        return [_aux(s) for s in self.states]


def model_from_text(states, rhs, output: str, indep: str = "x", params=()) -> DynModel:
    """Build a model from grammar strings (division allowed)."""
    from dalg.parser import parse_expr

    states = [s.strip() for s in states]
    if len(states) != len(rhs):
        raise DomainError(f"model has {len(states)} states but {len(rhs)} right-hand sides")
    ring = Ring((), indep, tuple(params), tuple(states))
    return DynModel(ring, tuple(states), tuple(parse_expr(r, ring) for r in rhs), parse_expr(output, ring))


# ---------------------------------------------------------------------------
# common denominators


def _denominator_factors(dens):
    """Split denominators over a shared list of coprime-ish factors.

    Returns ``(factors, decomps)`` with ``decomps[i] = (scalar, counts)`` so
    that ``dens[i] = scalar * prod(factors[j] ** counts[j])``.
    """
    order = sorted(range(len(dens)), key=lambda i: (dens[i].degree(), len(dens[i])))
    factors: list = []
    decomps: list = [None] * len(dens)
    for i in order:
        rest = dens[i]
        counts = [0] * len(factors)
        for j, f in enumerate(factors):
            while True:
                q = exact_divide(rest, f)
                if q is None:
                    break
                rest = q
                counts[j] += 1
        if not rest.is_constant():
            prim = rest.primitive_part()
            scalar = rest.content()
            factors.append(prim)
            counts.append(1)
        else:
            scalar = rest.constant_value()
        decomps[i] = (scalar, counts)
    n = len(factors)
    decomps = [(s, c + [0] * (n - len(c))) for s, c in decomps]
    return factors, decomps


def _prod(ring: Ring, factors, exps) -> Poly:
    out = ring.one()
    for f, e in zip(factors, exps):
        if e:
            out = out * f**e
    return out


class _Flow:
    """Lie derivative of a model, ``D(f) = Q*df/dx + sum a_i df/du_i``."""

    def __init__(self, model: DynModel):
        self.model = model
        ring = model.ring
        dens = [r.den for r in model.rhs] + [model.output.den]
        self.factors, decomps = _denominator_factors(dens)
        nf = len(self.factors)
        self.L = [max(d[1][j] for d in decomps[:-1]) if nf else 0 for j in range(nf)]
        self.Q = _prod(ring, self.factors, self.L)
        self.a = []
        for r, (scalar, counts) in zip(model.rhs, decomps[:-1]):
            co = _prod(ring, self.factors, [self.L[j] - counts[j] for j in range(nf)])
            self.a.append((r.num * co).scale(1 / scalar))
        scalar, counts = decomps[-1]
        self.out_num = model.output.num.scale(1 / scalar)
        self.out_exps = counts
        self.x = VarId("indep", ring.indep)
        self.states = model.state_vars()
        self._dfact = None

    def D(self, f: Poly) -> Poly:
        out = self.Q * f.diff(self.x) if not self.Q.is_zero() else f.ring.zero()
        for u, a in zip(self.states, self.a):
            d = f.diff(u)
            if not d.is_zero():
                out = out + a * d
        return out

    def step(self, N: Poly, E: list):
        """Derivative of ``N / prod f^E`` as ``(N', E')``, cancelling exact factors."""
        ring = N.ring
        if self._dfact is None:
            self._dfact = [self.D(f) for f in self.factors]
        present = [j for j, e in enumerate(E) if e]
        if not present:
            newN = self.D(N)
            newE = list(self.L)
        else:
            F = _prod(ring, self.factors, [1 if E[j] else 0 for j in range(len(E))])
            acc = self.D(N) * F
            for j in present:
                cof = _prod(ring, self.factors, [1 if (E[i] and i != j) else 0 for i in range(len(E))])
                acc = acc - N * self._dfact[j] * cof * E[j]
            newN = acc
            newE = [E[j] + self.L[j] + (1 if E[j] else 0) for j in range(len(E))]
        for j, f in enumerate(self.factors):
            while newE[j] and not newN.is_zero():
                q = exact_divide(newN, f)
                if q is None:
                    break
                newN = q
                newE[j] -= 1
        return newN, newE


def _lie_rational(expr: RationalExpr, states, rhs, x: VarId) -> RationalExpr:
    """Derivative of a rational expression along ``u_i' = rhs[i]``."""
    num, den = expr.num, expr.den

    def d(p: Poly) -> RationalExpr:
        out = RationalExpr.of(p.diff(x))
        for u, r in zip(states, rhs):
            pu = p.diff(u)
            if not pu.is_zero():
                out = out + r * pu
        return out

    if den.is_constant():
        return (d(num) / den.constant_value()).simplified() if not num.is_zero() else expr
    return ((d(num) * den - d(den) * num) / (den * den)).simplified()


def _rank(rows) -> int:
    """Rank of a matrix of exact rationals."""
    M = [list(r) for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        piv = None
        for r in range(rank, len(M)):
            if M[r][c] != 0:
                piv = r
                break
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(len(M)):
            if r != rank and M[r][c] != 0:
                f = M[r][c] / M[rank][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def _random_point(rng: random.Random, variables):
    return {v: mpq(rng.randint(-19, 19), rng.randint(1, 7)) for v in variables}


def _fresh(base: str, used) -> str:
    name = base
    k = 0
    while name in used:
        k += 1
        name = f"{base}{k}"
    return name


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise ComputationTimeout("wall-clock limit exceeded")


def _limits_until(deadline, base: Limits | None) -> Limits:
    base = base or Limits()
    if deadline is None:
        return base
    remaining = max(0.01, deadline - time.monotonic())
    secs = remaining if base.max_seconds is None else min(base.max_seconds, remaining)
    return Limits(max_seconds=secs, max_steps=base.max_steps)


def sys_to_min_diff_poly(
    model: DynModel,
    target: str = "z",
    limits: Limits | None = None,
    strategy: str = "reduced",
    timeout: float | None = None,
) -> AdeResult:
    """Lowest-order ADE satisfied by the output of ``model`` (generic solutions)."""
    start = time.monotonic()
    if timeout is None and limits is not None:
        timeout = limits.max_seconds
    deadline = None if timeout is None else start + timeout
    ring = model.ring
    if target in model.states or target in ring.params or target == ring.indep:
        raise DomainError(f"output name {target!r} clashes with a model variable")
    if strategy == "reduced":
        ade, sat, level, stats = _reduce_lie(model, target, limits, deadline)
    elif strategy == "full":
        ade, sat, level, stats = _reduce_full(model, target, limits, deadline)
    else:
        raise DomainError(f"unknown reduction strategy {strategy!r}")
    elapsed = (time.monotonic() - start) * 1000
    return AdeResult(
        ade=ade,
        target=target,
        method="II",
        elapsed_ms=int(elapsed),
        bound=model.dimension,
        saturation_denominator=sat,
        level=level,
        stats=stats,
    )


def _out_ring(model: DynModel, target: str) -> Ring:
    return Ring((target,), model.ring.indep, model.ring.params)


def _reduce_lie(model: DynModel, target: str, limits, deadline):
    flow = _Flow(model)
    ring = model.ring
    used = set(model.states) | set(ring.params) | {ring.indep, target}
    tname = _fresh("t_", used)
    work = Ring((target,), ring.indep, ring.params, tuple(model.states) + (tname,))
    t = _aux(tname)
    states = model.state_vars()
    x = VarId("indep", ring.indep)
    params = [VarId("param", p) for p in ring.params]
    sat_poly = _prod(ring, flow.factors, [1] * len(flow.factors))
    has_sat = not sat_poly.is_constant()
    extra = [c.to_ring(work) for c in model.constraints] + [c.to_ring(work) for c in model.param_relations]
    if has_sat:
        extra.append(work.var(t) * sat_poly.to_ring(work) - 1)
    can_skip = not model.constraints and not model.param_relations
    rng = random.Random(20240601)
    point = None
    if can_skip:
        for _ in range(50):
            cand = _random_point(rng, states + [x] + params)
            if all(f.evaluate(cand) != 0 for f in flow.factors):
                point = cand
                break
        can_skip = point is not None
    levels = []
    jac_rows = []
    N, E = flow.out_num, list(flow.out_exps)
    stats = {"levels": [], "gb": []}
    n = model.dimension
    for k in range(0, n + 1):
        _check_deadline(deadline)
        if k:
            N, E = flow.step(N, E)
        levels.append((N, list(E)))
        if can_skip:
            Dk = _prod(ring, flow.factors, E)
            dval = Dk.evaluate(point)
            nval = N.evaluate(point)
            row = []
            for u in states:
                nu = N.diff(u).evaluate(point)
                du = Dk.diff(u).evaluate(point)
                row.append((nu * dval - nval * du) / (dval * dval))
            jac_rows.append(row)
            if _rank(jac_rows) == k + 1:
                stats["levels"].append({"k": k, "skipped": True})
                continue
        zk = [dvar(target, i) for i in range(k + 1)]
        gens = list(extra)
        for i, (Ni, Ei) in enumerate(levels):
            Di = _prod(ring, flow.factors, Ei).to_ring(work)
            gens.append(Di * work.var(zk[i]) - Ni.to_ring(work))
        high = ([t] if has_sat else []) + states
        low = list(reversed(zk)) + [x] + params
        order = MonomialOrder.nested([high, low])
        G = groebner(gens, order, limits=_limits_until(deadline, limits), ring=work)
        stats["gb"].append(G.stats.as_dict())
        elim = elimination_ideal(G, set(low))
        found = [g for g in elim if diff_order(g, target) >= 0] if elim else []
        stats["levels"].append({"k": k, "skipped": False, "basis": len(G), "elim": len(elim)})
        if found:
            best = select_minimal(found, target)
            out = best.to_ring(_out_ring(model, target))
            return out, (sat_poly if has_sat else None), k, stats
    raise DalgError(f"no relation found up to order {n}; the model may be degenerate")


def _reduce_full(model: DynModel, target: str, limits, deadline):
    ring = model.ring
    n = model.dimension
    used = set(model.states) | set(ring.params) | {ring.indep, target}
    tname = _fresh("t_", used)
    fring = Ring(tuple(model.states) + (target,), ring.indep, ring.params, (tname,))
    t = _aux(tname)
    dens = [r.den for r in model.rhs] + [model.output.den]
    factors, decomps = _denominator_factors(dens)
    L = [max(d[1][j] for d in decomps) for j in range(len(factors))]
    Q = _prod(ring, factors, L)
    to_f = {_aux(s): dvar(s, 0) for s in model.states}

    def conv(p: Poly) -> Poly:
        return p.rename(to_f, ring=fring)

    gens = []
    for s, r, (scalar, counts) in zip(model.states, model.rhs, decomps[:-1]):
        co = _prod(ring, factors, [L[j] - counts[j] for j in range(len(factors))])
        a = (r.num * co).scale(1 / scalar)
        g = conv(Q) * fring.fn(s, 1) - conv(a)
        for _ in range(n):
            gens.append(g)
            g = total_derivative(g)
    scalar, counts = decomps[-1]
    co = _prod(ring, factors, [L[j] - counts[j] for j in range(len(factors))])
    b = (model.output.num * co).scale(1 / scalar)
    g = conv(Q) * fring.fn(target, 0) - conv(b)
    for _ in range(n + 1):
        gens.append(g)
        g = total_derivative(g)
    for c in model.constraints:
        g = conv(c)
        for _ in range(n + 1):
            gens.append(g)
            g = total_derivative(g)
    gens += [conv(c) for c in model.param_relations]
    sat_poly = _prod(ring, factors, [1] * len(factors))
    has_sat = not sat_poly.is_constant()
    if has_sat:
        gens.append(fring.var(t) * conv(sat_poly) - 1)
    x = VarId("indep", ring.indep)
    params = [VarId("param", p) for p in ring.params]
    svars = set()
    for g in gens:
        svars |= {v for v in g.variables() if v.kind == "diff" and v.name != target}
    high = ([t] if has_sat else []) + sorted(svars, key=var_key, reverse=True)
    blocks = [high] + [[dvar(target, k)] for k in range(n, 0, -1)] + [[dvar(target, 0), x] + params]
    order = MonomialOrder.nested(blocks)
    G = groebner(gens, order, limits=_limits_until(deadline, limits), ring=fring)
    keep = {dvar(target, k) for k in range(n + 1)} | {x} | set(params)
    elim = [g for g in elimination_ideal(G, keep) if diff_order(g, target) >= 0]
    if not elim:
        raise DalgError("empty elimination ideal at the model dimension")
    best = select_minimal(elim, target)
    lvl = diffring.order(best, target)
    return best.to_ring(_out_ring(model, target)), (sat_poly if has_sat else None), lvl, {"gb": [G.stats.as_dict()]}


# ---------------------------------------------------------------------------
# models for operations


@dataclass
class _FnModel:
    """How one input function enters a joint model."""

    fn: str
    kind: str  # "diff", "alg"
    order: int  # number of states
    states: list = field(default_factory=list)
    differentiated: bool = False
    source_order: int = 0
    lho: Poly | None = None
    source: Poly | None = None


def _plan_input(p: Poly, used: set, add_constraint: bool) -> _FnModel:
    fns = diffring.functions_in(p)
    if len(fns) != 1:
        raise DomainError(f"each input must involve exactly one function, got {fns}")
    fn = fns[0]
    n = diffring.order(p, fn)
    if n == 0:
        name = _fresh(f"{fn}_0", used)
        used.add(name)
        return _FnModel(fn, "alg", 1, [name], False, 0, None, p)
    p1, diffed = diffring.make_lho(p, fn)
    n1 = diffring.order(p1, fn)
    names = []
    for j in range(n1):
        nm = _fresh(f"{fn}_{j}", used)
        used.add(nm)
        names.append(nm)
    plan = _FnModel(fn, "diff", n1, names, diffed, n, p1, p)
    plan.add_constraint = add_constraint and diffed
    return plan


def _to_model_poly(p: Poly, plan_map: dict, mring: Ring) -> Poly:
    mapping = {}
    for v in p.variables():
        if v.kind == "diff":
            plan = plan_map[v.name]
            if v.order >= len(plan.states):
                raise DomainError("internal: derivative beyond the state range")
            mapping[v] = _aux(plan.states[v.order])
    return p.rename(mapping, ring=mring)


class _JointModel:
    """States for several input functions and the derivatives they determine."""

    def __init__(self, inputs, indep: str, params, add_constraints: bool, reserved=()):
        used = set(reserved) | set(params) | {indep}
        for p in inputs:
            used |= set(diffring.functions_in(p))
        self.param_relations_src = [p for p in inputs if not diffring.functions_in(p)]
        self.plans = [_plan_input(p, used, add_constraints) for p in inputs if diffring.functions_in(p)]
        self.plan_map = {pl.fn: pl for pl in self.plans}
        if len(self.plan_map) != len(self.plans):
            raise DomainError("two inputs define the same function")
        states = [s for pl in self.plans for s in pl.states]
        self.ring = Ring((), indep, tuple(params), tuple(states))
        self.states = states
        self.x = VarId("indep", indep)
        self.rhs: dict = {}
        self.constraints = []
        for pl in self.plans:
            if pl.kind == "alg":
                v = _aux(pl.states[0])
                q = _to_model_poly(pl.source, self.plan_map, self.ring)
                qx = q.diff(self.x)
                qv = q.diff(v)
                if qv.is_zero():
                    raise DomainError(f"order-0 input for {pl.fn} does not involve {pl.fn}")
                self.rhs[pl.states[0]] = RationalExpr(-qx, qv).simplified()
                self.constraints.append(q)
            else:
                for j in range(pl.order - 1):
                    self.rhs[pl.states[j]] = RationalExpr.of(self.ring.aux_var(pl.states[j + 1]))
                r = diffring.solve_highest(pl.lho, pl.fn)
                self.rhs[pl.states[-1]] = RationalExpr(
                    _to_model_poly(r.num, self.plan_map, self.ring), _to_model_poly(r.den, self.plan_map, self.ring)
                ).simplified()
                if getattr(pl, "add_constraint", False):
                    self.constraints.append(_to_model_poly(pl.source, self.plan_map, self.ring))
        self.param_relations = [p.rename({}, ring=self.ring) for p in self.param_relations_src]
        self._deriv_cache: dict = {}

    def rhs_list(self):
        return [self.rhs[s] for s in self.states]

    def in_inputs(self, p: Poly | None) -> Poly | None:
        """Rewrite a polynomial in the states as one in the input functions."""
        if p is None:
            return None
        ring = Ring(tuple(pl.fn for pl in self.plans), self.ring.indep, self.ring.params)
        mapping = {}
        for pl in self.plans:
            for j, s in enumerate(pl.states):
                mapping[_aux(s)] = dvar(pl.fn, j)
        return p.rename(mapping, ring=ring)

    def derivative_expr(self, fn: str, j: int) -> RationalExpr:
        """``fn^(j)`` as a rational expression in the states."""
        pl = self.plan_map[fn]
        if j < len(pl.states) and (pl.kind == "diff" or j == 0):
            return RationalExpr.of(self.ring.aux_var(pl.states[j]))
        key = (fn, j)
        if key not in self._deriv_cache:
            prev = self.derivative_expr(fn, j - 1)
            self._deriv_cache[key] = _lie_rational(prev, [_aux(s) for s in self.states], self.rhs_list(), self.x)
        return self._deriv_cache[key]

    def express(self, expr: RationalExpr) -> RationalExpr:
        """Rewrite a rational expression in the input functions via the states."""
        binds = {}
        for part in (expr.num, expr.den):
            for v in part.variables():
                if v.kind == "diff":
                    if v.name not in self.plan_map:
                        raise DomainError(f"relation uses unknown function {v.name!r}")
                    binds[v] = self.derivative_expr(v.name, v.order)
        num = _rebind(expr.num, binds, self.ring)
        den = _rebind(expr.den, binds, self.ring)
        return (num / den).simplified()

    def model(self, output: RationalExpr) -> DynModel:
        return DynModel(
            self.ring,
            tuple(self.states),
            tuple(self.rhs_list()),
            output,
            tuple(self.constraints),
            tuple(self.param_relations),
        )

    def bound(self) -> int:
        return sum(pl.order for pl in self.plans)

    def differentiations(self) -> int:
        return sum(1 for pl in self.plans if pl.differentiated)


def _rebind(p: Poly, binds: dict, ring: Ring) -> RationalExpr:
    """Substitute diff variables by model expressions and move into ``ring``."""
    if not binds:
        return RationalExpr.of(p.rename({}, ring=ring))
    big = p.ring.merge(ring)
    r = substitute(p.to_ring(big), {v: RationalExpr(e.num.to_ring(big), e.den.to_ring(big)) for v, e in binds.items()})
    return RationalExpr(r.num.to_ring(ring), r.den.to_ring(ring))


ALPHA = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b, "/": lambda a, b: a / b}


def arith_model(inputs, relation: RationalExpr, params=(), add_constraints: bool = False, reserved=()):
    """Joint model for ``w = relation(x, f_1, ..., f_N)``; returns ``(model, joint)``."""
    indep = relation.ring.indep
    joint = _JointModel(inputs, indep, params, add_constraints, reserved)
    out = joint.express(relation)
    return joint.model(out), joint


def build_arith_model(p: Poly, q: Poly, alpha: str, target: str = "w"):
    """Two-input model for ``w = alpha(f, g)``."""
    fy = diffring.functions_in(p)
    fz = diffring.functions_in(q)
    if len(fy) != 1 or len(fz) != 1 or fy == fz:
        raise DomainError("arith needs two inputs in distinct functions")
    ring = p.ring.merge(q.ring)
    rel = ALPHA[alpha](RationalExpr.of(ring.fn(fy[0])), RationalExpr.of(ring.fn(fz[0])))
    return arith_model([p.to_ring(ring), q.to_ring(ring)], rel, ring.params, reserved=(target,))


def arithmetic_method2(inputs, relation: RationalExpr, target: str = "w", limits=None, timeout=None,
                       strategy: str = "reduced") -> AdeResult:
    """ADE for a rational relation of several D-algebraic functions."""
    start = time.monotonic()
    model, joint = arith_model(inputs, relation, relation.ring.params, reserved=(target,))
    res = sys_to_min_diff_poly(model, target, limits=limits, strategy=strategy, timeout=timeout)
    res.bound = joint.bound()
    res.differentiations = joint.differentiations()
    res.stats["input_orders"] = [pl.source_order for pl in joint.plans]
    res.saturation_denominator = joint.in_inputs(res.saturation_denominator)
    res.elapsed_ms = int((time.monotonic() - start) * 1000)
    return res


def unary_dalg(p: Poly, expr: RationalExpr, target: str = "w", limits=None, timeout=None,
               strategy: str = "reduced") -> AdeResult:
    """ADE for ``w = expr(x, f)`` where ``p(f) = 0``.

    When ``p`` is not linear in its highest derivative, ``p`` itself is kept
    as an algebraic constraint on the states of the differentiated model.
    """
    start = time.monotonic()
    model, joint = arith_model([p], expr, expr.ring.params, add_constraints=True, reserved=(target,))
    res = sys_to_min_diff_poly(model, target, limits=limits, strategy=strategy, timeout=timeout)
    res.bound = joint.bound()
    res.differentiations = joint.differentiations()
    res.stats["input_orders"] = [pl.source_order for pl in joint.plans]
    res.saturation_denominator = joint.in_inputs(res.saturation_denominator)
    res.elapsed_ms = int((time.monotonic() - start) * 1000)
    return res


# ---------------------------------------------------------------------------
# composition


def invert_chain(n: int, fy: str, fz: str, fw: str, ring: Ring) -> list:
    """``a_k`` with ``y^(k) = a_k(w^(<=k), z^(<=k))`` from ``w^(k) = S_k(y, z)``."""
    chain = composition_chain(n, fy, fz, ring)
    zp = ring.fn(fz, 1)
    out = [RationalExpr.of(ring.fn(fw, 0))]
    for k in range(1, n + 1):
        S = chain[k]
        yk = dvar(fy, k)
        parts = S.coeffs_in(yk)
        rest = parts.get(0, ring.zero())
        binds = {dvar(fy, i): out[i] for i in range(k)}
        rest_r = substitute(rest, binds) if not rest.is_zero() else RationalExpr.of(rest)
        ak = (RationalExpr.of(ring.fn(fw, k)) - rest_r) / RationalExpr.of(zp**k)
        out.append(ak.simplified())
    return out


def _inner_joint(q: Poly, indep: str, params, reserved):
    return _JointModel([q], indep, params, add_constraints=False, reserved=reserved)


def build_composition_model(p: Poly, q: Poly, target: str = "w", strategy: str = "inverse"):
    """Model for ``w = f(g)`` with ``p(f) = 0`` (outer) and ``q(g) = 0`` (inner).

    ``strategy="inverse"`` inverts the chain-rule system for the outer
    derivatives; ``strategy="chain"`` uses states ``f^(j)(g)`` directly.
    Returns ``(model, info)`` where ``info`` has ``bound`` and
    ``differentiations``.
    """
    fy = diffring.functions_in(p)
    fz = diffring.functions_in(q)
    if len(fy) != 1 or len(fz) != 1:
        raise DomainError("composition needs one function per input")
    fy, fz = fy[0], fz[0]
    if fy == fz:
        ring = p.ring.extend(functions=[_fresh(fz + "_in", set(p.ring.functions) | {target})])
        new = ring.functions[-1]
        q = q.rename({v: dvar(new, v.order) for v in q.variables() if v.kind == "diff"}, ring=ring)
        p = p.to_ring(ring)
        fz = new
    ring = p.ring.merge(q.ring)
    if target in ring.functions:
        raise DomainError(f"output name {target!r} clashes with an input function")
    params = ring.params
    indep = ring.indep
    inner = _inner_joint(q.to_ring(ring), indep, params, reserved=(target, fy))
    z_const = inner.plans[0].kind == "alg" and inner.rhs[inner.states[0]].num.is_zero()
    if z_const:
        raise DomainError("the inner function is constant; composition degenerates")
    n = diffring.order(p, fy)
    used = set(inner.states) | set(params) | {indep, target, fy, fz}
    x = VarId("indep", indep)
    zexpr = lambda j: inner.derivative_expr(fz, j)  # noqa: E731
    if n == 0:
        # algebraic outer function: w satisfies p(x -> g, y -> w) = 0
        wname = _fresh(f"{target}_0", used)
        mring = inner.ring.extend(aux=[wname])
        w = _aux(wname)
        pw = p.rename({dvar(fy, 0): VarId("diff", fy, 0)}, ring=p.ring)
        py = pw.diff(dvar(fy, 0))
        px = pw.diff(x)
        bind = {dvar(fy, 0): RationalExpr.of(mring.aux_var(wname)), x: RationalExpr.of(mring.aux_var(inner.states[0]))}
        cons = _rebind_ring(pw, bind, mring)
        zp = _move(zexpr(1), mring)
        rhs_w = (-(_rebind_ring(px, bind, mring)) * zp / _rebind_ring(py, bind, mring)).simplified()
        states = tuple(inner.states) + (wname,)
        rhs = tuple(_move(inner.rhs[s], mring) for s in inner.states) + (rhs_w,)
        constraints = tuple(_move_poly(c, mring) for c in inner.constraints) + (cons.num,)
        model = DynModel(mring, states, rhs, RationalExpr.of(mring.var(w)), constraints,
                         tuple(_move_poly(c, mring) for c in inner.param_relations))
        return model, {"bound": inner.bound() + 0, "differentiations": inner.differentiations()}
    p1, diffed = diffring.make_lho(p, fy)
    n1 = diffring.order(p1, fy)
    wnames = []
    for j in range(n1):
        nm = _fresh(f"{target}_{j}", used)
        used.add(nm)
        wnames.append(nm)
    mring = inner.ring.extend(aux=wnames)
    inner_rhs = tuple(_move(inner.rhs[s], mring) for s in inner.states)
    v0 = RationalExpr.of(mring.aux_var(inner.states[0]))
    if strategy == "chain":
        zp = _move(zexpr(1), mring)
        r = diffring.solve_highest(p1, fy)
        bind = {dvar(fy, j): RationalExpr.of(mring.aux_var(wnames[j])) for j in range(n1)}
        bind[x] = v0
        rp = (_rebind_ring(r.num, bind, mring) / _rebind_ring(r.den, bind, mring)).simplified()
        rhs_w = [(zp * RationalExpr.of(mring.aux_var(wnames[j + 1]))).simplified() for j in range(n1 - 1)]
        rhs_w.append((zp * rp).simplified())
    elif strategy == "inverse":
        work = ring.extend(functions=[target])
        a = invert_chain(n1, fy, fz, target, work)
        bind = {dvar(fy, k): a[k] for k in range(n1 + 1)}
        bind[x] = RationalExpr.of(work.fn(fz, 0))
        R = substitute(p1.to_ring(work), bind)
        Rn = R.num
        wn = dvar(target, n1)
        parts = Rn.coeffs_in(wn)
        if set(parts) - {0, 1} or 1 not in parts:
            raise DalgError("internal: substituted outer equation is not linear in its top derivative")
        rp_w = RationalExpr(-parts.get(0, work.zero()), parts[1]).simplified()
        # move w^(j) -> states, z^(j) -> inner expressions
        binds = {dvar(target, j): RationalExpr.of(mring.aux_var(wnames[j])) for j in range(n1)}
        zvars = {v for part in (rp_w.num, rp_w.den) for v in part.variables() if v.kind == "diff" and v.name == fz}
        for v in zvars:
            binds[v] = _move(zexpr(v.order), mring)
        rp = (_rebind_ring(rp_w.num, binds, mring) / _rebind_ring(rp_w.den, binds, mring)).simplified()
        rhs_w = [RationalExpr.of(mring.aux_var(wnames[j + 1])) for j in range(n1 - 1)] + [rp]
    else:
        raise DomainError(f"unknown composition strategy {strategy!r}")
    states = tuple(inner.states) + tuple(wnames)
    rhs = inner_rhs + tuple(rhs_w)
    model = DynModel(mring, states, rhs, RationalExpr.of(mring.aux_var(wnames[0])),
                     tuple(_move_poly(c, mring) for c in inner.constraints),
                     tuple(_move_poly(c, mring) for c in inner.param_relations))
    info = {"bound": inner.bound() + n1, "differentiations": inner.differentiations() + (1 if diffed else 0)}
    return model, info


def _move_poly(p: Poly, ring: Ring) -> Poly:
    return p.rename({}, ring=ring)


def _move(r: RationalExpr, ring: Ring) -> RationalExpr:
    return RationalExpr(_move_poly(r.num, ring), _move_poly(r.den, ring))


def _rebind_ring(p: Poly, binds: dict, ring: Ring) -> RationalExpr:
    """Substitute variables of ``p`` by expressions living in ``ring``."""
    big = p.ring.merge(ring)
    conv = {v: RationalExpr(e.num.to_ring(big), e.den.to_ring(big)) for v, e in binds.items()}
    r = substitute(p.to_ring(big), conv)
    return RationalExpr(r.num.to_ring(ring), r.den.to_ring(ring))


def compose_method2(p: Poly, q: Poly, target: str = "w", limits=None, timeout=None,
                    strategy: str = "inverse", reduction: str = "reduced") -> AdeResult:
    """ADE for ``f(g)`` with ``p(f) = 0`` (outer) and ``q(g) = 0`` (inner)."""
    start = time.monotonic()
    model, info = build_composition_model(p, q, target, strategy)
    res = sys_to_min_diff_poly(model, target, limits=limits, strategy=reduction, timeout=timeout)
    res.bound = info["bound"]
    res.differentiations = info["differentiations"]
    res.stats["input_orders"] = [diffring.order(p, fy) for fy in diffring.functions_in(p)] + [
        diffring.order(q, fz) for fz in diffring.functions_in(q)]
    res.elapsed_ms = int((time.monotonic() - start) * 1000)
    return res


# ---------------------------------------------------------------------------
# inverse functions


def inverse_dalg(p: Poly, fn: str | None = None, out_fn: str = "g", out_indep: str = "y") -> AdeResult:
    """ADE for the compositional inverse of a solution of ``p``.

    Substitutes ``x -> g(y)``, ``f -> y`` and ``f^(k)(g(y)) = b_k`` with
    ``b_1 = 1/g'`` and ``b_(k+1) = b_k' / g'``, then clears denominators.
    """
    start = time.monotonic()
    fn = diffring._target(p, fn)
    n = diffring.order(p, fn)
    ring = p.ring
    if out_fn in ring.params or out_indep in ring.params or out_fn == out_indep:
        raise DomainError("output names clash with parameters or each other")
    gring = Ring((out_fn,), out_indep, ring.params)
    gp = gring.fn(out_fn, 1)
    b = [RationalExpr.of(gring.x())]
    if n >= 1:
        b.append(RationalExpr(gring.one(), gp))
    for _ in range(2, n + 1):
        b.append((b[-1].derivative() / RationalExpr.of(gp)).simplified())
    binds = {dvar(fn, k): b[k] for k in range(n + 1)}
    binds[VarId("indep", ring.indep)] = RationalExpr.of(gring.fn(out_fn, 0))
    ade = diffring.clear_denominators(_substitute_across(p, binds, gring))
    if ade.is_zero():
        raise DomainError("the inverse construction degenerated (is the function invertible?)")
    return AdeResult(ade=ade, target=out_fn, method="II", elapsed_ms=int((time.monotonic() - start) * 1000),
                     bound=n, saturation_denominator=gp)


def _add_frac(a: RationalExpr, b: RationalExpr) -> RationalExpr:
    if a.den == b.den:
        return RationalExpr(a.num + b.num, a.den)
    q = exact_divide(a.den, b.den)
    if q is not None:
        return RationalExpr(a.num + b.num * q, a.den)
    q = exact_divide(b.den, a.den)
    if q is not None:
        return RationalExpr(a.num * q + b.num, b.den)
    return a + b


def _substitute_across(p: Poly, binds: dict, target_ring: Ring) -> RationalExpr:
    """Substitute every non-parameter variable of ``p`` by expressions in ``target_ring``."""
    missing = [v for v in p.variables() if v not in binds and v.kind != "param"]
    if missing:
        raise DomainError(f"no binding for {sorted(map(str, missing))}")
    result = RationalExpr.of(target_ring.zero())
    cache: dict = {}
    for mon, c in p.monomials().items():
        term = RationalExpr.of(target_ring.const(c))
        for v, e in mon:
            if v.kind == "param":
                term = term * target_ring.param(v.name) ** e
                continue
            if (v, e) not in cache:
                cache[(v, e)] = binds[v] ** e
            term = term * cache[(v, e)]
        result = _add_frac(result, term)
    return result.simplified()


def derivative_method(p: Poly, fn: str | None = None) -> AdeResult:
    start = time.monotonic()
    fn = diffring._target(p, fn)
    ade = diffring.derivative_ade(p, fn)
    return AdeResult(ade=ade, target=fn, method="II", elapsed_ms=int((time.monotonic() - start) * 1000),
                     bound=diffring.order(p, fn) + 1)


def antiderivative_method(p: Poly, fn: str | None = None) -> AdeResult:
    start = time.monotonic()
    fn = diffring._target(p, fn)
    ade = diffring.antiderivative_ade(p, fn)
    return AdeResult(ade=ade, target=fn, method="II", elapsed_ms=int((time.monotonic() - start) * 1000),
                     bound=diffring.order(p, fn) + 1)


__all__ = [
    "DynModel",
    "model_from_text",
    "sys_to_min_diff_poly",
    "build_arith_model",
    "arithmetic_method2",
    "unary_dalg",
    "build_composition_model",
    "compose_method2",
    "inverse_dalg",
    "invert_chain",
    "derivative_method",
    "antiderivative_method",
]

