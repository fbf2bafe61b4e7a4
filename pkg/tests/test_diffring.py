"""Differential polynomials: derivation, l.h.o. handling, substitution, reduction."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import proportional
from dalg import diffring as D
from dalg.diffring import RationalExpr, dvar
from dalg.errors import DomainError, PreconditionError
from dalg.oracle import check_vanishing, series_from_ade
from dalg.parser import parse_ade
from dalg.polyring import Ring, VarId

R = Ring(("y", "z"), "x", ("g2", "g3"))


def P(src):
    return parse_ade(src, R)


def test_total_derivative_example():
    assert D.total_derivative(P("y'^3+x*y+1")) == P("3*y''*y'^2+y+x*y'")
    assert D.total_derivative(P("g2*g3+7")).is_zero()
    assert D.total_derivative(P("y*z")) == P("y'*z+y*z'")


def test_order_and_degree():
    assert D.order(P("y'^2-4*y^3-g2*y-g3"), "y") == 1
    assert D.order(P("y"), "y") == 0
    assert D.order(P("z"), "y") == -1
    assert D.degree(P("4*z^2*z''^2")) == 4
    assert D.degree(P("x^5*z")) == 1
    with pytest.raises(DomainError):
        D.degree(R.zero())


def test_lho_detection():
    assert D.is_lho(P("y''-y'^2+x*y+x"), "y")
    assert not D.is_lho(P("y'^3+x*y+1"), "y")
    q, diffed = D.make_lho(P("z'^2-z-1"), "z")
    assert diffed and q == P("2*z''*z'-z'")
    assert D.is_lho(q, "z")


def test_solve_highest():
    r = D.solve_highest(P("y''-6*y^2-x"), "y")
    assert proportional(r.num * P("1"), P("6*y^2+x")) and r.den.is_constant()
    assert D.solve_highest(P("y'-y"), "y").num == P("y")
    r = D.solve_highest(P("x*z''+z'"), "z")
    assert D.clear_denominators(r) == D.clear_denominators(RationalExpr(P("-z'"), P("x")))
    with pytest.raises(PreconditionError):
        D.solve_highest(P("y'^2-y"), "y")


def test_substitute_reciprocal():
    ring = Ring(("f", "g"), "x", ())
    g = RationalExpr.of(ring.fn("g"))
    one = RationalExpr.of(ring.one())
    f = one / g
    binds = {dvar("f", 0): f, dvar("f", 1): f.derivative(), dvar("f", 2): f.derivative().derivative()}
    out = D.clear_denominators(D.substitute(parse_ade("f''+f", ring), binds))
    assert proportional(out, parse_ade("g*g''-2*g'^2-g^2", ring))


def test_substitute_identity_and_clear():
    p = P("y'^2-4*y^3")
    ident = {dvar("y", 0): RationalExpr.of(P("y")), dvar("y", 1): RationalExpr.of(P("y'"))}
    assert proportional(D.clear_denominators(D.substitute(p, ident)), p)
    ring = Ring(("w", "y", "z"), "x", ())
    w, y, z = (RationalExpr.of(ring.fn(n)) for n in "wyz")
    assert D.clear_denominators(w - y / z) == parse_ade("w*z-y", ring)
    a, b = RationalExpr.of(ring.fn("y") + 1), RationalExpr.of(ring.fn("z"))
    assert D.clear_denominators((a / b) * (b / a)).is_constant()


def test_diff_reduce_examples():
    q = P("y''-24*y^2+2*g2")
    assert D.diff_reduce(q, q).is_zero()
    ring = Ring(("z",), "x", ())
    r = D.total_derivative(parse_ade("9*z^4-9*z^2-z'^2", ring))
    assert D.diff_reduce(r, parse_ade("-18*z^3+9*z+z''", ring)).is_zero()
    with pytest.raises(PreconditionError):
        D.diff_reduce(P("y"), P("y'^2-y"))


def test_ideal_reduce_handles_non_lho():
    wp = P("y'^2-4*y^3+g2*y+g3")
    assert D.ideal_reduce(P("y''-6*y^2+g2/2"), wp).is_zero()
    assert not D.ideal_reduce(P("y''-6*y^2"), wp).is_zero()
    assert D.ideal_reduce(wp * P("y+x"), wp).is_zero()


def test_pseudo_remainder():
    y = VarId("diff", "y")
    assert D.pseudo_remainder(P("y^3-y"), P("y^2-1"), y).is_zero()
    rem = D.pseudo_remainder(P("y^2"), P("2*y-1"), y)
    assert rem.degree(y) == 0 and rem == P("1")


def test_antiderivative_and_derivative():
    ring = Ring(("y",), "x", ())
    assert D.antiderivative_ade(parse_ade("y'-y", ring)) == parse_ade("y''-y'", ring)
    assert D.antiderivative_ade(parse_ade("y'^2+y^2-1", ring)) == parse_ade("y''^2+y'^2-1", ring)
    d = D.derivative_ade(parse_ade("y'-y", ring))
    exp = series_from_ade(parse_ade("y'-y", ring), [1], 20)
    assert check_vanishing(d, exp.derivative(), "y").passed


def test_derivative_of_sine_equation():
    ring = Ring(("y",), "x", ())
    p = parse_ade("y'^2+y^2-1", ring)
    d = D.derivative_ade(p)
    sine = series_from_ade(p, [0, 1], 30)
    assert check_vanishing(d, sine.derivative(), "y").passed


# --- properties -----------------------------------------------------------

SMALL = Ring(("y",), "x", ("a",))
BASIS = [SMALL.fn("y", k) for k in range(3)] + [SMALL.x(), SMALL.param("a"), SMALL.one()]

small_poly = st.lists(
    st.tuples(st.integers(-5, 5).filter(bool), st.lists(st.integers(0, len(BASIS) - 1), min_size=1, max_size=3)),
    min_size=1, max_size=4,
)


def build(spec):
    out = SMALL.zero()
    for c, idx in spec:
        term = SMALL.const(c)
        for i in idx:
            term = term * BASIS[i]
        out = out + term
    return out


@settings(max_examples=60, deadline=None)
@given(small_poly, small_poly)
def test_leibniz(a, b):
    p, q = build(a), build(b)
    dt = D.total_derivative
    assert dt(p * q) == dt(p) * q + p * dt(q)
    assert dt(p + q) == dt(p) + dt(q)


@settings(max_examples=60, deadline=None)
@given(small_poly)
def test_order_rises_by_one(a):
    p = build(a)
    n = D.order(p, "y") if not p.is_zero() else -1
    if n >= 1:
        assert D.order(D.total_derivative(p), "y") == n + 1
        lho, _ = D.make_lho(p, "y")
        assert D.is_lho(lho, "y")


@settings(max_examples=40, deadline=None)
@given(small_poly, small_poly)
def test_reduction_kills_ideal_combinations(a, b):
    q = parse_ade("y''-a*y'^2+x*y", SMALL)
    m1, m2 = build(a), build(b)
    combo = m1 * q + m2 * D.total_derivative(q)
    assert D.diff_reduce(combo, q).is_zero()


@settings(max_examples=40, deadline=None)
@given(small_poly, st.integers(-4, 4))
def test_derivation_commutes_with_specialisation(a, value):
    p = build(a)
    A = VarId("param", "a")
    assert D.total_derivative(p).subs({A: value}) == D.total_derivative(p.subs({A: value}))
