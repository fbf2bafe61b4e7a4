"""Shared helpers for the test suite."""

import pytest

from dalg.parser import infer_ring, parse_ade, parse_expr
from dalg.polyring import Ring


def ring_of(*sources, indep="x", params=()):
    return infer_ring(sources, indep, params)


def ade(src, ring=None, params=(), indep="x"):
    """Parse ``src`` in ``ring`` or in a ring inferred from it."""
    ring = ring or ring_of(src, indep=indep, params=params)
    return parse_ade(src, ring)


def expr(src, ring):
    return parse_expr(src, ring)


def proportional(a, b) -> bool:
    """Equal after primitive-part normalisation, up to sign."""
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    if a.ring != b.ring:
        ring = a.ring.merge(b.ring)
        a, b = a.to_ring(ring), b.to_ring(ring)
    pa, pb = a.primitive_part(), b.primitive_part()
    return pa == pb or pa == -pb


@pytest.fixture
def xy_ring():
    return Ring(("y",), "x", ())
