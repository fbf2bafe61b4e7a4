"""Dynamical models and their reduction to a single ADE."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import proportional
from dalg import diffring as D
from dalg import method1 as M1
from dalg import method2 as M2
from dalg import oracle as O
from dalg.errors import DomainError, ParseError
from dalg.parser import parse_ade, parse_expr
from dalg.polyring import Ring

YZ = Ring(("y", "z"), "x", ())


def P(src, ring=YZ):
    return parse_ade(src, ring)


def test_pass_through_model():
    model = M2.model_from_text(["u"], ["u"], "u")
    res = M2.sys_to_min_diff_poly(model)
    assert proportional(res.ade, parse_ade("z'-z", res.ade.ring))
    assert res.bound == 1 and res.method == "II"


def test_model_validation():
    with pytest.raises(DomainError):
        M2.model_from_text(["u", "v"], ["u"], "u")
    with pytest.raises(ParseError, match="known names: u, x"):
        M2.model_from_text(["u"], ["v"], "u")
    with pytest.raises(DomainError):
        M2.sys_to_min_diff_poly(M2.model_from_text(["u"], ["u"], "u"), "u")


def test_reduction_strategies_agree():
    model = M2.model_from_text(["y0", "y1"], ["y1", "6*y0^2+x"], "y0^2")
    a = M2.sys_to_min_diff_poly(model, "z")
    b = M2.sys_to_min_diff_poly(model, "z", strategy="full")
    assert a.ade == b.ade
    assert (a.order, a.degree) == (2, 5)


def test_arith_model_shapes():
    model, joint = M2.build_arith_model(P("y'-y"), P("z'-z"), "+")
    assert model.dimension == 2
    assert [str(r) for r in model.rhs] == ["y_0", "z_0"]
    assert str(model.output) == "z_0 + y_0"
    model, joint = M2.build_arith_model(P("y'^3+y+1"), P("z'^2-z-1"), "+")
    assert model.dimension == 4
    assert joint.differentiations() == 2 and joint.bound() == 4


def test_sum_with_the_zero_function_returns_the_input():
    res = M2.arithmetic_method2([P("y'-y"), P("z")], parse_expr("y+z", YZ))
    assert proportional(res.ade, parse_ade("w'-w", res.ade.ring))


def test_shift_by_an_algebraic_constant():
    # i^2 + 1 = 0 enters as an order-0 input in a parameter
    ring = Ring(("y",), "x", ("i",))
    inputs = [parse_ade("y*y''-y'^2", ring), parse_ade("i^2+1", ring)]
    rel = parse_expr("y+i", ring)
    want = parse_ade("w'^2 - w*w'' + i*w''", Ring(("w",), "x", ("i",)))
    assert proportional(M2.arithmetic_method2(inputs, rel).ade, want)
    assert proportional(M1.relation_method1(inputs, rel).ade, want)


def test_saturation_denominator_is_in_input_names():
    ring = Ring(("y",), "x", ("a",))
    res = M2.arithmetic_method2([parse_ade("y*y''-y'^2", ring)], parse_expr("y+a", ring))
    assert res.to_dict()["saturation_denominator"] == "y"


def test_unary_operations():
    ring = Ring(("t",), "x", ())
    res = M2.unary_dalg(parse_ade("t'-t^2-1", ring), parse_expr("(3*t-t^3)/(1-3*t^2)", ring), "z")
    assert proportional(res.ade, parse_ade("z'-3*z^2-3", res.ade.ring))
    assert res.order <= res.bound


def test_compose_strategies_agree():
    ring = Ring(("t", "y"), "x", ())
    p, q = parse_ade("t'-t^2-1", ring), parse_ade("y'-3", ring)
    a = M2.compose_method2(p, q, "z")
    b = M2.compose_method2(p, q, "z", strategy="chain")
    assert proportional(a.ade, b.ade)


def test_cross_method_agreement():
    p, q = P("y'*y+y''"), P("z'+x*z''")
    a, b = M1.compose_method1(p, q), M2.compose_method2(p, q)
    assert D.order(a.ade, "w") == D.order(b.ade, "w") == 3
    for res in (a, b):
        report = O.verify_compose(res.ade, "w", p, q, point=1)
        assert report["passed"] and len(report["runs"]) == 2


def test_inverse_functions():
    one = Ring(("y",), "x", ())
    res = M2.inverse_dalg(parse_ade("y'-1", one))
    assert proportional(res.ade, parse_ade("g'-1", res.ade.ring))
    square = parse_ade("x*y'-2*y", one)
    res = M2.inverse_dalg(square)
    assert proportional(res.ade, parse_ade("2*y*g'-g", res.ade.ring))
    # f(x) = x^2 near x = 1; its inverse is the square root near 1
    report = O.verify_inverse(res.ade, "g", square, jets=[O.parse_jet("1@1", "y")], count=1)
    assert report["passed"]


def test_inverse_rejects_clashing_names():
    ring = Ring(("y",), "x", ("g",))
    with pytest.raises(DomainError):
        M2.inverse_dalg(parse_ade("y'-g*y", ring))


def test_derivative_and_antiderivative():
    ring = Ring(("y",), "x", ())
    p = parse_ade("y''-6*y^2-x", ring)
    d = M2.derivative_method(p)
    assert d.order <= d.bound
    assert O.verify_derivative(d.ade, "y", p)["passed"]
    a = M2.antiderivative_method(p)
    assert O.verify_derivative(a.ade, "y", p, k=-1)["passed"]


# linear and Riccati inputs of order one or two
INPUTS_Y = ["y'-y", "y'-x*y", "y''+y", "y'-y^2-1", "x*y'-y", "y'^2-y", "y''-y'"]
INPUTS_Z = ["z'-z", "z'-2", "z''-z", "z'-z^2", "z'^2-z-1"]


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(INPUTS_Y), st.sampled_from(INPUTS_Z), st.sampled_from(["+", "*", "o"]))
def test_order_bound_and_soundness(py, qz, op):
    p, q = P(py), P(qz)
    if op == "o":
        res = M2.compose_method2(p, q, timeout=30)
    else:
        res = M2.arithmetic_method2([p, q], parse_expr(f"y{op}z", YZ), timeout=30)
    n, m = D.order(p, "y"), D.order(q, "z")
    d = sum(1 for s in (p, q) if not D.is_lho(s))
    assert res.order <= res.bound <= n + m + d
    if op == "o":
        report = O.verify_compose(res.ade, "w", p, q, point=1)
    else:
        report = O.verify_relation(res.ade, "w", [p, q], parse_expr(f"y{op}z", YZ), point=1)
    assert report["passed"], report
