"""Exact sparse multivariate polynomials over Q.

A ``Poly`` stores its generators as a sorted tuple of ``VarId`` and its terms
as a dict from a packed exponent int to a ``gmpy2.mpq`` coefficient.  The
exponent of ``gens[i]`` sits in the 16-bit field starting at bit ``16*i``, so
multiplying monomials is integer addition.  Two polys with different
generator tuples are remapped onto the union before arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Mapping, NamedTuple

from gmpy2 import mpq, mpz

from dalg.errors import ContextMismatchError, DomainError
from dalg.kernel import mul_terms

FIELD = 16
MASK = (1 << FIELD) - 1
MAX_EXP = (1 << (FIELD - 1)) - 1

KINDS = ("param", "indep", "diff", "aux")
_KIND_RANK = {k: i for i, k in enumerate(KINDS)}
_MPQ = type(mpq(0))
_MPZ = type(mpz(0))


def rational(value) -> mpq:
    """Convert int, str, Fraction, mpz or mpq to an exact ``mpq``."""
    if isinstance(value, _MPQ):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, bool):
        return mpq(int(value))
    if isinstance(value, (int, _MPZ, str)):
        return mpq(value)
    if isinstance(value, float):
        raise DomainError("floating-point coefficients are not exact; pass a Fraction or string")
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def _is_scalar(value) -> bool:
    return isinstance(value, (int, _MPQ, _MPZ, Fraction)) and not isinstance(value, bool)


class VarId(NamedTuple):
    """A ring variable: ``kind`` is one of param, indep, diff, aux."""

    kind: str
    name: str
    order: int = 0

    @property
    def key(self):
        """Ranking key; larger keys rank higher."""
        return (_KIND_RANK[self.kind], self.order, self.name)

    def __str__(self) -> str:
        if self.kind != "diff":
            return self.name
        if self.order <= 2:
            return self.name + "'" * self.order
        return f"{self.name}^({self.order})"


def var_key(v: VarId):
    return v.key


def diff_var(name: str, order: int = 0) -> VarId:
    return VarId("diff", name, order)


@dataclass(frozen=True)
class Ring:
    """Context shared by all polys that may be combined.

    ``functions`` are differential indeterminates, ``indep`` names the
    independent variable, ``params`` are algebraic constants and ``aux`` are
    extra algebraic variables such as the saturation variable.
    """

    functions: tuple = ()
    indep: str = "x"
    params: tuple = ()
    aux: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "aux", tuple(self.aux))
        names = list(self.functions) + list(self.params) + list(self.aux) + [self.indep]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate names in ring context: {names}")

    def contains(self, v: VarId) -> bool:
        if v.kind == "diff":
            return v.name in self.functions
        if v.kind == "indep":
            return v.name == self.indep and v.order == 0
        if v.kind == "param":
            return v.name in self.params and v.order == 0
        if v.kind == "aux":
            return v.name in self.aux and v.order == 0
        return False

    def var(self, v: VarId) -> "Poly":
        if not self.contains(v):
            raise ContextMismatchError(f"variable {v} is not in the ring context")
        return Poly(self, (v,), {1: mpq(1)})

    def fn(self, name: str, order: int = 0) -> "Poly":
        return self.var(VarId("diff", name, order))

    def x(self) -> "Poly":
        return self.var(VarId("indep", self.indep))

    def param(self, name: str) -> "Poly":
        return self.var(VarId("param", name))

    def aux_var(self, name: str) -> "Poly":
        return self.var(VarId("aux", name))

    def const(self, c) -> "Poly":
        c = rational(c)
        return Poly(self, (), {0: c} if c else {})

    def zero(self) -> "Poly":
        return Poly(self, (), {})

    def one(self) -> "Poly":
        return self.const(1)

    def extend(self, functions: Iterable[str] = (), params: Iterable[str] = (), aux: Iterable[str] = ()) -> "Ring":
        """Return a context containing this one plus the given names."""
        fs = list(self.functions) + [f for f in functions if f not in self.functions]
        ps = list(self.params) + [p for p in params if p not in self.params]
        xs = list(self.aux) + [a for a in aux if a not in self.aux]
        return Ring(tuple(fs), self.indep, tuple(ps), tuple(xs))

    def merge(self, other: "Ring") -> "Ring":
        if other.indep != self.indep:
            raise ContextMismatchError(f"independent variables differ: {self.indep} vs {other.indep}")
        return self.extend(other.functions, other.params, other.aux)


Monomial = tuple  # tuple of (VarId, exponent) pairs sorted by ranking key


def _unpack(m: int, n: int) -> list:
    out = []
    for _ in range(n):
        out.append(m & MASK)
        m >>= FIELD
    return out


def _pack(exps) -> int:
    m = 0
    for i, e in enumerate(exps):
        if e:
            if e > MAX_EXP:
                raise DomainError(f"exponent {e} exceeds the supported maximum {MAX_EXP}")
            m |= e << (FIELD * i)
    return m


def _remap(terms: dict, positions: list) -> dict:
    """Move each exponent field ``i`` to field ``positions[i]``."""
    if all(p == i for i, p in enumerate(positions)):
        return terms
    n = len(positions)
    out = {}
    for m, c in terms.items():
        nm = 0
        for i in range(n):
            e = m & MASK
            if e:
                nm |= e << (FIELD * positions[i])
            m >>= FIELD
        out[nm] = c
    return out


def _union_gens(a: tuple, b: tuple) -> tuple:
    if a == b:
        return a
    return tuple(sorted(set(a) | set(b), key=var_key))


class Poly:
    """Immutable sparse polynomial with rational coefficients."""

    __slots__ = ("ring", "gens", "terms")

    def __init__(self, ring: Ring, gens: tuple, terms: dict):
        self.ring = ring
        self.gens = gens
        self.terms = terms

    # construction ---------------------------------------------------------

    @classmethod
    def from_monomials(cls, ring: Ring, mapping: Mapping) -> "Poly":
        """Build from ``{((VarId, e), ...): coefficient}``."""
        used = set()
        for mono in mapping:
            for v, e in mono:
                if e:
                    if not ring.contains(v):
                        raise ContextMismatchError(f"variable {v} is not in the ring context")
                    used.add(v)
        gens = tuple(sorted(used, key=var_key))
        index = {v: i for i, v in enumerate(gens)}
        terms: dict = {}
        for mono, c in mapping.items():
            c = rational(c)
            m = 0
            for v, e in mono:
                if e:
                    if e < 0 or e > MAX_EXP:
                        raise DomainError(f"bad exponent {e}")
                    m += e << (FIELD * index[v])
            v0 = terms.get(m, 0) + c
            if v0:
                terms[m] = v0
            else:
                terms.pop(m, None)
        return cls(ring, gens, terms)

    def _with(self, gens: tuple, terms: dict) -> "Poly":
        return Poly(self.ring, gens, terms)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.ring != self.ring:
                raise ContextMismatchError("polynomials belong to different ring contexts")
            return other
        if _is_scalar(other):
            return self.ring.const(other)
        return NotImplemented

    def _aligned(self, other: "Poly"):
        if self.gens == other.gens:
            return self.gens, self.terms, other.terms
        gens = _union_gens(self.gens, other.gens)
        idx = {v: i for i, v in enumerate(gens)}
        ta = _remap(self.terms, [idx[v] for v in self.gens])
        tb = _remap(other.terms, [idx[v] for v in other.gens])
        return gens, ta, tb

    def with_gens(self, gens: tuple) -> dict:
        """Terms re-packed for the generator tuple ``gens`` (a superset)."""
        idx = {v: i for i, v in enumerate(gens)}
        try:
            return _remap(self.terms, [idx[v] for v in self.gens])
        except KeyError as exc:
            raise ContextMismatchError(f"variable {exc.args[0]} missing from target generators") from None

    # basic queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self) -> mpq:
        if not self.is_constant():
            raise DomainError("polynomial is not constant")
        return self.terms.get(0, mpq(0))

    def monomials(self) -> dict:
        """Canonical ``{((VarId, e), ...): coefficient}`` view."""
        n = len(self.gens)
        out = {}
        for m, c in self.terms.items():
            exps = _unpack(m, n)
            out[tuple((v, e) for v, e in zip(self.gens, exps) if e)] = c
        return out

    def variables(self) -> set:
        used = 0
        for m in self.terms:
            used |= m
        return {v for i, v in enumerate(self.gens) if (used >> (FIELD * i)) & MASK}

    def trimmed(self) -> "Poly":
        """Same poly with unused generators dropped."""
        used = self.variables()
        if len(used) == len(self.gens):
            return self
        gens = tuple(v for v in self.gens if v in used)
        old = {v: i for i, v in enumerate(self.gens)}
        out = {}
        for m, c in self.terms.items():
            nm = 0
            for j, v in enumerate(gens):
                nm |= ((m >> (FIELD * old[v])) & MASK) << (FIELD * j)
            out[nm] = c
        return Poly(self.ring, gens, out)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if _is_scalar(other):
            c = rational(other)
            return self.terms == ({0: c} if c else {})
        if not isinstance(other, Poly):
            return NotImplemented
        if self.ring != other.ring:
            return False
        if self.gens == other.gens:
            return self.terms == other.terms
        return self.monomials() == other.monomials()

    def __hash__(self) -> int:
        return hash(frozenset(self.monomials().items()))

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        gens, ta, tb = self._aligned(other)
        out = dict(ta)
        for m, c in tb.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return self._with(gens, out)

    __radd__ = __add__

    def __neg__(self):
        return self._with(self.gens, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def scale(self, c) -> "Poly":
        c = rational(c)
        if not c:
            return self.ring.zero()
        return self._with(self.gens, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        gens, ta, tb = self._aligned(other)
        return self._with(gens, mul_terms(ta, tb))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            c = rational(other)
            if not c:
                raise ZeroDivisionError("division of a polynomial by zero")
            return self.scale(1 / c)
        if isinstance(other, Poly) and other.is_constant():
            return self / other.constant_value()
        raise DomainError("only division by nonzero constants is supported; use exact_divide")

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise DomainError("polynomial powers need a nonnegative integer exponent")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # calculus and substitution ---------------------------------------------

    def diff(self, v: VarId) -> "Poly":
        """Partial derivative with respect to the variable ``v``."""
        if v not in self.gens:
            return self.ring.zero()
        s = FIELD * self.gens.index(v)
        one = 1 << s
        out = {}
        for m, c in self.terms.items():
            e = (m >> s) & MASK
            if e:
                out[m - one] = c * e
        return self._with(self.gens, out)

    def degree(self, v: VarId | None = None) -> int:
        """Degree in ``v``, or total degree over all variables; -1 for zero."""
        if not self.terms:
            return -1
        if v is None:
            return max(sum(_unpack(m, len(self.gens))) for m in self.terms)
        if v not in self.gens:
            return 0
        s = FIELD * self.gens.index(v)
        return max((m >> s) & MASK for m in self.terms)

    def degree_in(self, kinds: Iterable[str]) -> int:
        """Total degree counting only variables of the given kinds."""
        if not self.terms:
            return -1
        kinds = set(kinds)
        sel = [i for i, v in enumerate(self.gens) if v.kind in kinds]
        best = 0
        for m in self.terms:
            best = max(best, sum((m >> (FIELD * i)) & MASK for i in sel))
        return best

    def coeffs_in(self, v: VarId) -> dict:
        """Coefficients as a polynomial in ``v``: ``{exponent: Poly}``."""
        if v not in self.gens:
            return {0: self} if self.terms else {}
        s = FIELD * self.gens.index(v)
        groups: dict = {}
        for m, c in self.terms.items():
            e = (m >> s) & MASK
            groups.setdefault(e, {})[m - (e << s)] = c
        return {e: self._with(self.gens, t) for e, t in groups.items()}

    def subs(self, mapping: Mapping) -> "Poly":
        """Substitute polynomials (or scalars) for variables."""
        sub = {}
        for v, val in mapping.items():
            if v in self.gens:
                sub[v] = val if isinstance(val, Poly) else self.ring.const(val)
        if not sub:
            return self
        keep = tuple(v for v in self.gens if v not in sub)
        keep_idx = {v: i for i, v in enumerate(keep)}
        n = len(self.gens)
        # group terms by the exponents of substituted variables
        groups: dict = {}
        for m, c in self.terms.items():
            exps = _unpack(m, n)
            skey = tuple(exps[i] for i, v in enumerate(self.gens) if v in sub)
            km = 0
            for i, v in enumerate(self.gens):
                if v not in sub and exps[i]:
                    km |= exps[i] << (FIELD * keep_idx[v])
            groups.setdefault(skey, {})[km] = c
        svars = [v for v in self.gens if v in sub]
        powers: dict = {}

        def power(v, e):
            key = (v, e)
            if key not in powers:
                powers[key] = sub[v] ** e
            return powers[key]

        result = self.ring.zero()
        for skey, kterms in groups.items():
            factor = Poly(self.ring, keep, kterms)
            for v, e in zip(svars, skey):
                if e:
                    factor = factor * power(v, e)
            result = result + factor
        return result

    def evaluate(self, values: Mapping):
        """Evaluate at rational values; returns ``mpq`` when fully assigned."""
        missing = [v for v in self.variables() if v not in values]
        if missing:
            return self.subs({v: rational(values[v]) for v in self.gens if v in values})
        n = len(self.gens)
        vals = [rational(values[v]) if v in values else mpq(0) for v in self.gens]
        total = mpq(0)
        for m, c in self.terms.items():
            t = c
            for x, e in zip(vals, _unpack(m, n)):
                if e:
                    t *= x ** e
            total += t
        return total

    def rename(self, mapping: Mapping, ring: Ring | None = None) -> "Poly":
        """Rename variables, optionally into another ring context."""
        ring = ring or self.ring
        mono = {}
        for mon, c in self.monomials().items():
            nm = {}
            for v, e in mon:
                w = mapping.get(v, v)
                nm[w] = nm.get(w, 0) + e
            key = tuple(sorted(nm.items(), key=lambda p: var_key(p[0])))
            mono[key] = mono.get(key, 0) + c
        return Poly.from_monomials(ring, mono)

    def to_ring(self, ring: Ring) -> "Poly":
        """Same poly viewed in a larger context."""
        for v in self.variables():
            if not ring.contains(v):
                raise ContextMismatchError(f"variable {v} is not in the target ring")
        p = self if all(ring.contains(v) for v in self.gens) else self.trimmed()
        return Poly(ring, p.gens, p.terms)

    # normalisation ------------------------------------------------------------

    def leading_term(self, order=None):
        """``(monomial, coefficient)`` of the largest term under ``order``.

        ``order`` defaults to degrevlex on all variables ranked by key.
        """
        if not self.terms:
            raise DomainError("zero polynomial has no leading term")
        if order is None:
            order = MonomialOrder.degrevlex(sorted(self.gens, key=var_key, reverse=True))
        best = None
        best_key = None
        for mon, c in self.monomials().items():
            k = order.key(mon)
            if best_key is None or k > best_key:
                best, best_key = (mon, c), k
        return best

    def content(self) -> mpq:
        """Rational content with the sign of the leading coefficient."""
        if not self.terms:
            raise DomainError("content of the zero polynomial is undefined")
        nums = [int(c.numerator) for c in self.terms.values()]
        dens = [int(c.denominator) for c in self.terms.values()]
        g = reduce(gcd, nums)
        lcm = reduce(lambda a, b: a * b // gcd(a, b), dens)
        cont = mpq(abs(g), lcm)
        if self.leading_term()[1] < 0:
            cont = -cont
        return cont

    def primitive_part(self) -> "Poly":
        """Integer coefficients with gcd 1 and positive leading coefficient."""
        return self.scale(1 / self.content())

    # printing -----------------------------------------------------------------

    def sorted_monomials(self, order=None) -> list:
        order = order or MonomialOrder.degrevlex(sorted(self.gens, key=var_key, reverse=True))
        return sorted(self.monomials().items(), key=lambda mc: order.key(mc[0]), reverse=True)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mon, c in self.sorted_monomials():
            factors = []
            for v, e in sorted(mon, key=lambda p: var_key(p[0])):
                factors.append(str(v) if e == 1 else f"{v}^{e}")
            body = "*".join(factors)
            neg = c < 0
            a = -c if neg else c
            if not body:
                text = _fmt_rational(a)
            elif a == 1:
                text = body
            else:
                text = f"{_fmt_rational(a)}*{body}"
            if not parts:
                parts.append(("-" if neg else "") + text)
            else:
                parts.append((" - " if neg else " + ") + text)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Poly({self})"


def _fmt_rational(c: mpq) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class MonomialOrder:
    """Monomial order described by weight rows over a variable ranking.

    ``kind`` is ``lex``, ``degrevlex`` or ``block``.  A block order is a
    sequence of blocks, each compared by degrevlex and earlier blocks
    dominating; the elimination order with one eliminated block is the
    two-block case.  ``ranking`` lists variables from largest to smallest.
    """

    def __init__(self, kind: str, blocks):
        if kind not in ("lex", "degrevlex", "block"):
            raise DomainError(f"unknown monomial order kind {kind!r}")
        self.kind = kind
        self.blocks = tuple(tuple(b) for b in blocks if b)
        self.ranking = tuple(v for b in self.blocks for v in b)
        if len(set(self.ranking)) != len(self.ranking):
            raise DomainError("a variable appears twice in the monomial order")
        self.position = {v: i for i, v in enumerate(self.ranking)}

    @classmethod
    def lex(cls, ranking) -> "MonomialOrder":
        return cls("lex", [tuple(ranking)])

    @classmethod
    def degrevlex(cls, ranking) -> "MonomialOrder":
        return cls("degrevlex", [tuple(ranking)])

    @classmethod
    def block_elimination(cls, ranking, block) -> "MonomialOrder":
        """Eliminate ``block``: its variables dominate everything else."""
        block = set(block)
        high = [v for v in ranking if v in block]
        low = [v for v in ranking if v not in block]
        return cls("block", [high, low])

    @classmethod
    def nested(cls, blocks) -> "MonomialOrder":
        return cls("block", blocks)

    @property
    def elimination_block(self) -> tuple:
        return self.blocks[0] if self.kind == "block" and len(self.blocks) > 1 else ()

    def row_spec(self) -> list:
        """List of ``(kind, positions)`` per block, positions into ranking."""
        out = []
        start = 0
        for b in self.blocks:
            pos = list(range(start, start + len(b)))
            out.append(("lex" if self.kind == "lex" else "degrevlex", pos))
            start += len(b)
        return out

    def rows(self, exps) -> tuple:
        """Weight rows for an exponent vector aligned with ``ranking``."""
        out = []
        for kind, pos in self.row_spec():
            if kind == "lex":
                out.extend(exps[p] for p in pos)
            else:
                s = sum(exps[p] for p in pos)
                out.append(s)
                for p in reversed(pos[1:]):
                    s -= exps[p]
                    out.append(s)
        return tuple(out)

    def key(self, monomial) -> tuple:
        exps = [0] * len(self.ranking)
        for v, e in monomial:
            try:
                exps[self.position[v]] += e
            except KeyError:
                raise ContextMismatchError(f"variable {v} is not ranked by this monomial order") from None
        return self.rows(exps)

    def compare(self, m1, m2) -> int:
        k1, k2 = self.key(m1), self.key(m2)
        return (k1 > k2) - (k1 < k2)

    def __eq__(self, other) -> bool:
        return isinstance(other, MonomialOrder) and (self.kind, self.blocks) == (other.kind, other.blocks)

    def __hash__(self) -> int:
        return hash((self.kind, self.blocks))

    def __repr__(self) -> str:
        blocks = " > ".join("{" + ", ".join(map(str, b)) + "}" for b in self.blocks)
        return f"MonomialOrder({self.kind}, {blocks})"
