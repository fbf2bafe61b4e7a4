"""Groebner bases, normal forms, elimination and saturation."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import proportional
from dalg import diffring as D
from dalg.errors import ComputationTimeout, DomainError, PreconditionError
from dalg.groebner import (
    Limits,
    TruncatedIdeal,
    buchberger,
    eliminate_linear,
    elimination_ideal,
    exact_divide,
    groebner,
    normal_form,
    s_polynomial,
    satisfies_buchberger_criterion,
    saturate,
    select_minimal,
)
from dalg.parser import parse_ade
from dalg.polyring import MonomialOrder, Ring, VarId

R = Ring((), "x", (), ("y", "t"))
X, Y, T = VarId("indep", "x"), VarId("aux", "y"), VarId("aux", "t")
x, y, t = R.x(), R.var(Y), R.var(T)


def test_normal_form_examples():
    lex = MonomialOrder.lex([Y, X])
    assert normal_form(y**2, [y], lex).is_zero()
    assert normal_form(x**2 + y, [y - x], lex) == x**2 + x


def test_buchberger_examples():
    lex = MonomialOrder.lex([Y, X])
    G = groebner([x**2 - 1], lex)
    assert [g for g in G] == [x**2 - 1]
    lex = MonomialOrder.lex([X, Y])
    G = groebner([x * y - 1, y**2 - x], lex)
    assert any(proportional(g, y**3 - 1) for g in G)
    assert satisfies_buchberger_criterion(list(G), lex)
    assert elimination_ideal(G, {Y}) == [y**3 - 1]
    assert elimination_ideal(G, {X, Y}) == list(G)


def test_buchberger_on_truncated_ideal_and_determinism():
    ideal = TruncatedIdeal([x * y - 1, y**2 - x], MonomialOrder.block_elimination([X, Y], [X]))
    G1, G2 = buchberger(ideal), buchberger(ideal)
    assert [str(g) for g in G1] == [str(g) for g in G2]


def test_elimination_precondition():
    G = groebner([x * y - 1, y**2 - x], MonomialOrder.degrevlex([X, Y]))
    with pytest.raises(PreconditionError):
        elimination_ideal(G, {Y})
    G = groebner([x * y - 1, y**2 - x], MonomialOrder.lex([Y, X]))
    with pytest.raises(PreconditionError):
        elimination_ideal(G, {Y})


def test_saturation_oracles():
    order = MonomialOrder.degrevlex([X, Y])
    sat = saturate(TruncatedIdeal([x * y], order), x)
    assert [proportional(g, y) for g in sat.generators] == [True]
    sat = saturate(TruncatedIdeal([x**2], order), x)
    assert len(sat.generators) == 1 and sat.generators[0].is_constant()
    with pytest.raises(DomainError):
        saturate(TruncatedIdeal([x], order), R.zero())


def test_select_minimal():
    ring = Ring(("y",), "x", ())
    P = lambda s: parse_ade(s, ring)  # noqa: E731
    assert select_minimal([P("y'''"), P("y'*y"), P("y^2")], "y") == P("y^2")
    assert select_minimal([P("y''+y"), P("y'^3")], "y") == P("y'^3")
    assert select_minimal([P("-2*y'")], "y") == P("y'")
    with pytest.raises(DomainError):
        select_minimal([], "y")


def test_timeout_carries_stats():
    ring = Ring((), "x", (), tuple(f"v{i}" for i in range(5)))
    v = [ring.aux_var(f"v{i}") for i in range(5)]
    gens = [v[i] ** 3 - v[(i + 1) % 5] * v[(i + 2) % 5] + ring.x() for i in range(5)]
    order = MonomialOrder.lex([VarId("aux", f"v{i}") for i in range(5)] + [X])
    with pytest.raises(ComputationTimeout) as info:
        groebner(gens, order, limits=Limits(max_seconds=0.05))
    assert "steps" in info.value.stats


def test_exact_divide():
    assert exact_divide(x**2 - y**2, x - y) == x + y
    assert exact_divide(x**2 + 1, x - y) is None


def test_eliminate_linear_keeps_elimination_ideal():
    ring = Ring(("w", "y", "z"), "x", ())
    P = lambda s: parse_ade(s, ring)  # noqa: E731
    gens = [P("y^2-x"), P("z^3-y"), P("w-y-z")]
    Yv, Zv = VarId("diff", "y"), VarId("diff", "z")
    W = VarId("diff", "w")
    reduced = eliminate_linear(gens, [Yv, Zv])
    assert len(reduced) == 2
    order = MonomialOrder.nested([[Yv, Zv], [W, X]])
    full = elimination_ideal(groebner(gens, order), {W, X})
    short = elimination_ideal(groebner(reduced, order), {W, X})
    assert [str(g) for g in full] == [str(g) for g in short]


# --- properties ------------------------------------------------------------

R3 = Ring((), "x", (), ("a", "b"))
A, B = VarId("aux", "a"), VarId("aux", "b")
MONS = [R3.one(), R3.x(), R3.var(A), R3.var(B), R3.var(A) * R3.var(B), R3.var(A) ** 2, R3.var(B) ** 2]

small = st.lists(st.tuples(st.integers(-3, 3).filter(bool), st.integers(0, len(MONS) - 1)), min_size=1, max_size=4)


def mk(spec):
    out = R3.zero()
    for c, i in spec:
        out = out + R3.const(c) * MONS[i]
    return out


@settings(max_examples=25, deadline=None)
@given(st.lists(small, min_size=1, max_size=3), st.sampled_from(["lex", "degrevlex", "block"]))
def test_buchberger_criterion_and_membership(specs, kind):
    gens = [mk(s) for s in specs]
    ranking = [A, B, X]
    order = MonomialOrder.nested([[A], [B, X]]) if kind == "block" else getattr(MonomialOrder, kind)(ranking)
    try:
        G = groebner(gens, order, limits=Limits(max_seconds=5))
    except ComputationTimeout:
        return
    elems = list(G)
    assert satisfies_buchberger_criterion(elems, order)
    # reduced: no term of an element is divisible by another leading monomial
    leads = [g.leading_term(order)[0] for g in elems]
    for g, lm in zip(elems, leads):
        for other in leads:
            if other is lm:
                continue
            for mono in g.monomials():
                d = dict(mono)
                assert not all(d.get(v, 0) >= e for v, e in other)
    rng = random.Random(len(elems))
    for _ in range(20):
        combo = R3.zero()
        for g in gens:
            combo = combo + mk([(rng.randint(-3, 3) or 1, rng.randrange(len(MONS)))]) * g
        assert normal_form(combo, elems, order).is_zero()
    if kind == "block":
        for e in elimination_ideal(G, {B, X}):
            assert A not in e.variables()
            assert normal_form(e, elems, order).is_zero()


@settings(max_examples=20, deadline=None)
@given(small, small)
def test_saturation_contains_ideal_and_quotients(s1, s2):
    g, q = mk(s1), mk(s2)
    if q.is_zero() or q.is_constant():
        return
    order = MonomialOrder.degrevlex([A, B, X])
    ideal = TruncatedIdeal([q * g], order)
    try:
        sat = saturate(ideal, q, limits=Limits(max_seconds=5))
    except ComputationTimeout:
        return
    G = groebner(sat.generators, order)
    assert normal_form(q * g, list(G), order).is_zero()
    assert normal_form(g, list(G), order).is_zero()


def test_one_state_model_generators_form_a_basis():
    # u' = u^2 + x, z = u^3: derivatives of the defining polynomials under a
    # lex order ranking every z^(j) above every u^(j) and highest derivatives first
    ring = Ring(("u", "z"), "x", ())
    u_eq = parse_ade("u'-u^2-x", ring)
    z_eq = parse_ade("z-u^3", ring)
    n = 3
    gens = [D.nth_derivative(u_eq, k) for k in range(n)] + [D.nth_derivative(z_eq, k) for k in range(n + 1)]
    ranking = [D.dvar("z", k) for k in range(n, -1, -1)] + [D.dvar("u", k) for k in range(n, -1, -1)] + [X]
    order = MonomialOrder.lex(ranking)
    gens = [g.to_ring(ring) for g in gens]
    assert satisfies_buchberger_criterion(gens, order)
    assert s_polynomial(gens[0], gens[-1], order) is not None
