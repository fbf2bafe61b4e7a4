"""Exact algebraic differential equations for combinations of D-algebraic functions."""

from dalg.errors import (
    ComputationTimeout,
    ContextMismatchError,
    DalgError,
    DomainError,
    ParseError,
    PartialResultError,
    PreconditionError,
)
from dalg.kernel import BACKEND
from dalg.polyring import MonomialOrder, Poly, Ring, VarId

__all__ = [
    "BACKEND",
    "ComputationTimeout",
    "ContextMismatchError",
    "DalgError",
    "DomainError",
    "MonomialOrder",
    "ParseError",
    "PartialResultError",
    "Poly",
    "PreconditionError",
    "Ring",
    "VarId",
]

__version__ = "0.1.0"
