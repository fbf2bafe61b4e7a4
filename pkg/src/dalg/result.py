"""Result record shared by both methods and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from dalg import diffring
from dalg.polyring import Poly


@dataclass
class AdeResult:
    """An ADE for the target function plus bookkeeping.

    ``bound`` is the order bound that applies to the construction (``None``
    when no bound is known), ``saturation_denominator`` the polynomial whose
    vanishing excludes solutions (Method II only).
    """

    ade: Poly
    target: str
    method: str
    elapsed_ms: int = 0
    bound: int | None = None
    verified: bool | None = None
    saturation_denominator: Poly | None = None
    differentiations: int = 0
    level: int | None = None
    stats: dict = field(default_factory=dict)
    verification: dict | None = None

    def __post_init__(self):
        if self.ade.is_zero():
            raise ValueError("an ADE result must be nonzero")
        self.ade = self.ade.primitive_part()

    @property
    def order(self) -> int:
        return diffring.order(self.ade, self.target)

    @property
    def degree(self) -> int:
        return diffring.degree(self.ade)

    def within_bound(self) -> bool:
        return self.bound is None or self.order <= self.bound

    def to_dict(self) -> dict:
        sat = self.saturation_denominator
        return {
            "ade": str(self.ade),
            "order": self.order,
            "degree": self.degree,
            "method": self.method,
            "elapsed_ms": int(self.elapsed_ms),
            "bound": self.bound,
            "verified": self.verified,
            "saturation_denominator": None if sat is None or sat.is_constant() else str(sat),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_text(self) -> str:
        lines = [f"{self.ade} = 0"]
        lines.append(f"order {self.order}, degree {self.degree}, method {self.method}, {int(self.elapsed_ms)} ms")
        if self.bound is not None:
            lines.append(f"order bound {self.bound}")
        sat = self.saturation_denominator
        if sat is not None and not sat.is_constant():
            lines.append(f"valid where {sat} != 0")
        if self.verified is not None:
            lines.append("verified by series oracle" if self.verified else "series oracle check FAILED")
        return "\n".join(lines)
