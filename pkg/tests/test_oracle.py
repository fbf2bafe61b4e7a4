"""Exact truncated power series and the vanishing check."""

import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from dalg import oracle as O
from dalg.errors import DomainError
from dalg.oracle import InitialJet, TruncSeries
from dalg.parser import parse_ade
from dalg.polyring import Ring

Y = Ring(("y",), "x", ())
Z = Ring(("z",), "x", ())
WP = Ring(("y",), "x", ("g2", "g3"))


def Q(*vals):
    return [mpq(v) for v in vals]


def test_series_of_known_functions():
    exp = O.series_from_ade(parse_ade("z'-z", Z), [1], 5)
    assert exp.coeffs == Q(1, 1, "1/2", "1/6", "1/24", "1/120")
    tan = O.series_from_ade(parse_ade("t'-t^2-1", Ring(("t",), "x", ())), [0], 5)
    assert tan.coeffs == Q(0, 1, 0, "1/3", 0, "2/15")
    p1 = O.series_from_ade(parse_ade("y''-6*y^2-x", Y), [0, 0], 4)
    assert p1.coeffs == Q(0, 0, 0, "1/6", 0)


def test_series_combinations():
    exp = O.series_from_ade(parse_ade("z'-z", Z), [1], 6)
    assert (exp + exp).coeffs == [2 * c for c in exp.coeffs]
    cos = O.series_from_ade(parse_ade("y''+y", Y), [1, 0], 6)
    assert cos.reciprocal().coeffs[:5] == Q(1, 0, "1/2", 0, "5/24")
    tan = O.series_from_ade(parse_ade("y'-y^2-1", Y), [0], 7)
    tan3 = tan.compose(TruncSeries([0, 3, 0, 0, 0, 0, 0, 0]))
    assert tan3.coeffs[:6] == Q(0, 3, 0, 9, 0, "162/5")


def test_domain_errors():
    with pytest.raises(DomainError):
        TruncSeries([0, 1]).reciprocal()
    with pytest.raises(DomainError):
        TruncSeries([1, 0, 1]).reversion()
    # reversion expands the inverse at the value f(a)
    assert TruncSeries([1, 1], 0).reversion() == TruncSeries([0, 1], 1)
    with pytest.raises(DomainError):
        TruncSeries([1], 0) + TruncSeries([1], 1)
    with pytest.raises(DomainError):
        # leading coefficient x vanishes at the expansion point
        O.series_from_ade(parse_ade("x*y'-y", Y), [1], 4)


def test_vanishing_reports():
    tan = O.series_from_ade(parse_ade("y'-y^2-1", Y), [0], 20)
    tan3 = tan.compose(TruncSeries([0, 3] + [0] * 19))
    assert O.check_vanishing(parse_ade("z'-3*z^2-3", Z), tan3, "z").passed
    cos = O.series_from_ade(parse_ade("y''+y", Y), [1, 0], 20)
    bad = O.check_vanishing(parse_ade("z'-z", Z), cos, "z")
    assert not bad.passed and bad.first_nonzero in (0, 2)
    assert bad.to_dict()["first_nonzero"] == bad.first_nonzero
    with pytest.raises(DomainError):
        O.check_vanishing(parse_ade("z'-z", Z), TruncSeries([1, 1, 1]), "z")


def test_generic_jets_are_consistent():
    p = parse_ade("z'^2-z-1", Z)
    assert O.series_from_ade(p, [0, 1], 12).coeffs[:2] == Q(0, 1)
    rng = random.Random(3)
    for _ in range(5):
        jet = O.generic_jet(p, rng=rng)
        z0, z1 = jet.values
        assert z1**2 - z0 - 1 == 0 and z1 != 0
    wp = parse_ade("y'^2-4*y^3+g2*y+g3", WP)
    params = {"g2": 4, "g3": 0}
    # y(0) = 1, y'(0) = 0 satisfies the equation but sits on the zero set of the separant
    with pytest.raises(DomainError, match="singular"):
        O.series_from_ade(wp, [1, 0], 6, params=params)
    # every rational point of y'^2 = 4y^3 - 4y has y' = 0, so no generic jet exists
    with pytest.raises(DomainError, match="supply one explicitly"):
        O.generic_jet(wp, params=params, rng=rng, tries=60)
    params = {"g2": 1, "g3": -1}
    jet = O.generic_jet(wp, params=params, rng=rng)
    y0, y1 = jet.values
    assert y1**2 - 4 * y0**3 + y0 - 1 == 0 and y1 != 0
    series = O.series_from_ade(wp, jet.values, 12, params=params)
    assert O.check_vanishing(wp, series, "y", params).passed


def test_generic_jet_avoids_and_reports_failure():
    p = parse_ade("y'-y", Y)
    jet = O.generic_jet(p, avoid=[parse_ade("y-1", Y), parse_ade("y+1", Y)])
    assert jet.values[0] not in (1, -1)
    with pytest.raises(DomainError, match="supply one explicitly"):
        O.generic_jet(parse_ade("y'^2+y^2+1", Y), tries=50)


def test_parse_jet():
    jet = O.parse_jet("1, 1/2 @ 3/4", "y")
    assert jet == InitialJet("y", mpq(3, 4), Q(1, "1/2"))
    with pytest.raises(DomainError):
        O.parse_jet("@1", "y")


def test_verify_counts_distinct_runs():
    ade = parse_ade("w'-2*w", Ring(("w",), "x", ()))
    report = O.verify(ade, "w", lambda T, params, rng: (
        O.series_from_ade(parse_ade("y'-2*y", Y), [rng.randint(1, 9)], T + 1), []), count=3)
    assert report["passed"] and len(report["runs"]) == 3
    assert all(r["checked_up_to"] >= 8 for r in report["runs"])


def test_model_trajectories():
    from dalg.method2 import model_from_text

    model = model_from_text(["u", "v"], ["v", "-u"], "u")
    ser = O.solve_model_series(model, {"u": 1, "v": 0}, 6, {})
    assert ser["u"].coeffs == Q(1, 0, "-1/2", 0, "1/24", 0, "-1/720")


def test_residual_of_series_solutions():
    rng = random.Random(7)
    for src in ("y''-6*y^2-x", "y'-x*y^2", "x*y''+y'-y", "y'^2-y^3-1"):
        p = parse_ade(src, Y)
        jet = O.generic_jet(p, point=1, rng=rng)
        s = O.series_from_ade(p, jet.values, 14, point=1)
        assert O.check_vanishing(p, s, "y").passed


small = st.integers(-6, 6)
units = st.sampled_from([-3, -2, -1, 1, 2, 3, mpq(1, 2), mpq(-2, 3)])


@settings(max_examples=100, deadline=None)
@given(st.lists(small, min_size=2, max_size=9), units, st.lists(small, min_size=8, max_size=8), units)
def test_series_arithmetic_round_trips(fc, g0, gtail, h1):
    T = len(fc) - 1
    f = TruncSeries(fc)
    g = TruncSeries([g0] + gtail[:T])
    assert (f * g) / g == f
    assert g * g.reciprocal() == TruncSeries.constant(1, T)
    h = TruncSeries([0, h1] + gtail[: T - 1])
    x = TruncSeries.variable(T)
    assert h.reversion().compose(h) == x
    assert h.compose(h.reversion()) == x
    assert f.compose(x) == f
