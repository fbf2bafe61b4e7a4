"""Buchberger Groebner bases, normal forms, elimination and saturation.

Polynomials are translated once into an order-preserving integer packing
(``Encoding``) so the inner loops only add and compare Python ints; the hot
reduction loop lives in ``dalg.kernel``.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from gmpy2 import mpq

from dalg.errors import ComputationTimeout, ContextMismatchError, DomainError, PreconditionError
from dalg.kernel import divide_single, normal_form as _kernel_nf
from dalg.polyring import FIELD, MASK, MonomialOrder, Poly, Ring, VarId, var_key

ROW_BITS = 32
DEFAULT_MAX_SECONDS = 120.0
DEFAULT_MAX_STEPS = 10**6


@dataclass
class Limits:
    """Resource caps for one basis computation."""

    max_seconds: float | None = DEFAULT_MAX_SECONDS
    max_steps: int = DEFAULT_MAX_STEPS


@dataclass
class GBStats:
    pairs: int = 0
    pairs_skipped: int = 0
    zero_reductions: int = 0
    steps: int = 0
    basis_size: int = 0
    max_basis: int = 0
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class Encoding:
    """Order-preserving packing of monomials into Python ints.

    A monomial becomes ``(K << ebits) | E``: ``E`` holds the exponents in
    16-bit fields (one per ranked variable, top bit of each field kept
    clear as a guard) and ``K`` the weight rows of the order in 32-bit
    fields.  Both parts are linear in the exponents, so monomial products are
    integer sums and comparing ints compares monomials.
    """

    def __init__(self, order: MonomialOrder):
        self.order = order
        self.ranking = order.ranking
        n = len(self.ranking)
        self.n = n
        self.ebits = FIELD * n
        self.emask = (1 << self.ebits) - 1
        self.guard = sum(1 << (FIELD * i + FIELD - 1) for i in range(n))
        self.nrows = len(order.rows([0] * n))
        self.vec = []
        for i in range(n):
            unit = [0] * n
            unit[i] = 1
            rows = order.rows(unit)
            w = 0
            for r in rows:
                w = (w << ROW_BITS) | r
            self.vec.append((w << self.ebits) | (1 << (FIELD * i)))
        self.position = order.position
        self._sorted = sorted(range(n), key=lambda i: var_key(self.ranking[i]))

    def encode(self, p: Poly) -> dict:
        if any(v not in self.position for v in p.gens):
            p = p.trimmed()
        try:
            vecs = [self.vec[self.position[v]] for v in p.gens]
        except KeyError as exc:
            raise ContextMismatchError(f"variable {exc.args[0]} is not ranked by the monomial order") from None
        out = {}
        k = len(vecs)
        for m, c in p.terms.items():
            cm = 0
            for i in range(k):
                e = m & MASK
                if e:
                    cm += e * vecs[i]
                m >>= FIELD
            out[cm] = c
        return out

    def exps(self, cm: int) -> list:
        e = cm & self.emask
        out = []
        for _ in range(self.n):
            out.append(e & MASK)
            e >>= FIELD
        return out

    def from_exps(self, exps) -> int:
        cm = 0
        for i, e in enumerate(exps):
            if e:
                cm += e * self.vec[i]
        return cm

    def decode(self, terms: dict, ring: Ring) -> Poly:
        used = 0
        for cm in terms:
            used |= cm & self.emask
        idx = [i for i in self._sorted if (used >> (FIELD * i)) & MASK]
        gens = tuple(self.ranking[i] for i in idx)
        out = {}
        for cm, c in terms.items():
            m = 0
            for j, i in enumerate(idx):
                m |= ((cm >> (FIELD * i)) & MASK) << (FIELD * j)
            out[m] = c
        return Poly(ring, gens, out)

    def total_degree(self, cm: int) -> int:
        # the base-2^16 digit sum equals the value modulo 2^16 - 1
        return (cm & self.emask) % MASK

    def leading(self, terms: dict) -> int:
        return max(terms)


def _monic(terms: dict):
    lm = max(terms)
    lc = terms[lm]
    if lc != 1:
        inv = 1 / lc
        terms = {m: c * inv for m, c in terms.items()}
    return lm, terms


class TruncatedIdeal:
    """Finite generator list in a finite polynomial ring with an order."""

    def __init__(self, generators, order: MonomialOrder, ring: Ring | None = None):
        gens = [g for g in generators if not g.is_zero()]
        if ring is None:
            if not gens:
                raise DomainError("cannot infer the ring of an empty ideal")
            ring = gens[0].ring
        for g in gens:
            if g.ring != ring:
                raise ContextMismatchError("ideal generators belong to different ring contexts")
        self.generators = gens
        self.order = order
        self.ring = ring

    def __len__(self) -> int:
        return len(self.generators)


class GroebnerBasis:
    """Reduced Groebner basis; ``elements`` are monic, sorted by leading monomial."""

    def __init__(self, elements: list, order: MonomialOrder, ring: Ring, stats: GBStats | None = None):
        self.elements = elements
        self.order = order
        self.ring = ring
        self.stats = stats or GBStats()

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def is_unit(self) -> bool:
        return len(self.elements) == 1 and self.elements[0].is_constant()


class _Engine:
    """Mutable state of one Buchberger run on encoded term dicts."""

    def __init__(self, enc: Encoding, limits: Limits, stats: GBStats):
        self.enc = enc
        self.stats = stats
        self.start = time.monotonic()
        deadline = None if limits.max_seconds is None else self.start + limits.max_seconds
        self.deadline = deadline
        self.budget = [0, limits.max_steps, deadline]
        self.polys: list = []  # monic term dicts
        self.lm: list = []
        self.lexp: list = []
        self.sugar: list = []
        self.active: list = []  # indices forming the current basis G
        self.pairs: list = []  # heap of (sugar, lcm, i, j)
        self._red = None

    def _check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ComputationTimeout("wall-clock limit exceeded", self.snapshot())

    def snapshot(self) -> dict:
        self.stats.steps = self.budget[0]
        self.stats.basis_size = len(self.active)
        self.stats.seconds = time.monotonic() - self.start
        return self.stats.as_dict()

    def reducers(self):
        if self._red is None:
            emask = self.enc.emask
            lms = [self.lm[i] for i in self.active]
            les = [m & emask for m in lms]
            tails = [[(m, c) for m, c in self.polys[i].items() if m != self.lm[i]] for i in self.active]
            self._red = (lms, les, tails)
        return self._red

    def reduce(self, terms: dict) -> dict:
        lms, les, tails = self.reducers()
        try:
            return _kernel_nf(terms, lms, les, tails, self.enc.emask, self.enc.guard, self.budget)
        except ComputationTimeout as exc:
            raise ComputationTimeout(str(exc), self.snapshot()) from None

    def divides(self, a_exp: int, b_exp: int) -> bool:
        g = self.enc.guard
        return ((b_exp | g) - a_exp) & g == g

    def lcm(self, i: int, j: int) -> int:
        ei, ej = self.enc.exps(self.lm[i]), self.enc.exps(self.lm[j])
        return self.enc.from_exps([a if a > b else b for a, b in zip(ei, ej)])

    def coprime(self, i: int, j: int) -> bool:
        ei = self.lm[i] & self.enc.emask
        ej = self.lm[j] & self.enc.emask
        # fields are nonzero exactly where some bit is set; spread to a support mask
        return _support(ei) & _support(ej) == 0

    def pair_sugar(self, i: int, j: int, lcm: int) -> int:
        td = self.enc.total_degree
        d = td(lcm)
        return max(self.sugar[i] - td(self.lm[i]), self.sugar[j] - td(self.lm[j])) + d

    def add(self, terms: dict, sugar: int) -> None:
        lm, terms = _monic(terms)
        h = len(self.polys)
        self.polys.append(terms)
        self.lm.append(lm)
        self.lexp.append(lm & self.enc.emask)
        self.sugar.append(sugar)
        self.update(h)
        self._red = None
        self.stats.max_basis = max(self.stats.max_basis, len(self.active))

    def update(self, h: int) -> None:
        """Gebauer-Moeller installation of the new element ``h``."""
        emask = self.enc.emask
        lcms = {g: self.lcm(h, g) for g in self.active}
        cand = list(self.active)
        kept = []
        for idx, g1 in enumerate(cand):
            if self.coprime(h, g1):
                kept.append(g1)
                continue
            l1 = lcms[g1] & emask
            redundant = False
            for g2 in cand[idx + 1:]:
                if self.divides(lcms[g2] & emask, l1):
                    redundant = True
                    break
            if not redundant:
                for g2 in kept:
                    if self.divides(lcms[g2] & emask, l1):
                        redundant = True
                        break
            if not redundant:
                kept.append(g1)
        new_pairs = [g for g in kept if not self.coprime(h, g)]
        self.stats.pairs_skipped += len(cand) - len(new_pairs)
        # drop old pairs made redundant by h
        he = self.lexp[h]
        survivors = []
        for item in self.pairs:
            _, lcm, i, j = item
            le = lcm & emask
            if self.divides(he, le) and lcms_ne(self, i, h, lcm, lcms) and lcms_ne(self, j, h, lcm, lcms):
                self.stats.pairs_skipped += 1
                continue
            survivors.append(item)
        for g in new_pairs:
            lcm = lcms[g]
            i, j = (g, h) if g < h else (h, g)
            survivors.append((self.pair_sugar(i, j, lcm), lcm, i, j))
        heapq.heapify(survivors)
        self.pairs = survivors
        self.active = [g for g in self.active if not self.divides(he, self.lexp[g])] + [h]

    def spoly(self, i: int, j: int, lcm: int) -> dict:
        out = {}
        si = lcm - self.lm[i]
        for m, c in self.polys[i].items():
            if m != self.lm[i]:
                out[m + si] = c
        sj = lcm - self.lm[j]
        for m, c in self.polys[j].items():
            if m != self.lm[j]:
                mm = m + sj
                v = out.get(mm)
                if v is None:
                    out[mm] = -c
                else:
                    v = v - c
                    if v:
                        out[mm] = v
                    else:
                        del out[mm]
        return out

    def run(self) -> None:
        while self.pairs:
            self._check_time()
            sug, lcm, i, j = heapq.heappop(self.pairs)
            self.stats.pairs += 1
            s = self.spoly(i, j, lcm)
            if not s:
                self.stats.zero_reductions += 1
                continue
            h = self.reduce(s)
            if not h:
                self.stats.zero_reductions += 1
                continue
            self.add(h, sug)
            if self.enc.total_degree(self.lm[-1]) == 0:
                # the ideal is the whole ring
                self.active = [len(self.polys) - 1]
                self.pairs = []
                self._red = None
                return

    def reduced_basis(self) -> list:
        order = sorted(self.active, key=lambda g: self.lm[g])
        lms = [self.lm[g] for g in order]
        les = [m & self.enc.emask for m in lms]
        tails = [[(m, c) for m, c in self.polys[g].items() if m != self.lm[g]] for g in order]
        out = []
        for k, g in enumerate(order):
            tail = dict(tails[k])
            if tail:
                try:
                    tail = _kernel_nf(tail, lms, les, tails, self.enc.emask, self.enc.guard, self.budget)
                except ComputationTimeout as exc:
                    raise ComputationTimeout(str(exc), self.snapshot()) from None
            tail[lms[k]] = mpq(1)
            out.append(tail)
        return out


def lcms_ne(eng: _Engine, a: int, h: int, lcm: int, lcms: dict) -> bool:
    """True when lcm(lm a, lm h) differs from ``lcm``."""
    other = lcms.get(a)
    if other is None:
        other = eng.lcm(a, h)
    return other != lcm


def _support(e: int) -> int:
    """Bitmask with the low bit of each nonzero 16-bit field set."""
    out = 0
    i = 0
    while e:
        if e & MASK:
            out |= 1 << i
        e >>= FIELD
        i += 1
    return out


def _prepare(polys, order: MonomialOrder):
    polys = [p for p in polys if not p.is_zero()]
    ring = polys[0].ring if polys else None
    for p in polys:
        if p.ring != ring:
            raise ContextMismatchError("polynomials belong to different ring contexts")
    return polys, ring


def buchberger(ideal: TruncatedIdeal, limits: Limits | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal under its monomial order."""
    return groebner(ideal.generators, ideal.order, limits=limits, ring=ideal.ring)


def groebner(polys, order: MonomialOrder, limits: Limits | None = None, ring: Ring | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of the polynomials under ``order``."""
    polys, pring = _prepare(polys, order)
    ring = ring or pring
    stats = GBStats()
    if not polys:
        return GroebnerBasis([], order, ring, stats)
    enc = Encoding(order)
    eng = _Engine(enc, limits or Limits(), stats)
    encoded = [enc.encode(p) for p in polys]
    # smaller generators first: cheaper reducers early, deterministic order
    encoded.sort(key=lambda t: (enc.total_degree(max(t)), max(t), len(t)))
    for terms in encoded:
        eng._check_time()
        if eng.active:
            terms = eng.reduce(terms)
            if not terms:
                continue
        sugar = max(enc.total_degree(m) for m in terms)
        eng.add(terms, sugar)
        if enc.total_degree(eng.lm[-1]) == 0:
            eng.active = [len(eng.polys) - 1]
            eng.pairs = []
            break
    eng.run()
    basis = eng.reduced_basis()
    eng.snapshot()
    elements = [enc.decode(t, ring) for t in basis]
    return GroebnerBasis(elements, order, ring, stats)


def normal_form(p: Poly, G, order: MonomialOrder) -> Poly:
    """Remainder of full multivariate division of ``p`` by the list ``G``."""
    G = [g for g in G if not g.is_zero()]
    if p.is_zero():
        return p
    for g in G:
        if g.ring != p.ring:
            raise ContextMismatchError("polynomials belong to different ring contexts")
    enc = Encoding(order)
    lms, les, tails = [], [], []
    for g in G:
        lm, terms = _monic(enc.encode(g))
        lms.append(lm)
        les.append(lm & enc.emask)
        tails.append([(m, c) for m, c in terms.items() if m != lm])
    budget = [0, 1 << 62, None]
    rem = _kernel_nf(enc.encode(p), lms, les, tails, enc.emask, enc.guard, budget)
    return enc.decode(rem, p.ring)


def s_polynomial(f: Poly, g: Poly, order: MonomialOrder) -> Poly:
    enc = Encoding(order)
    lf, tf = _monic(enc.encode(f))
    lg, tg = _monic(enc.encode(g))
    ef, eg = enc.exps(lf), enc.exps(lg)
    lcm = enc.from_exps([max(a, b) for a, b in zip(ef, eg)])
    out = {}
    for m, c in tf.items():
        out[m + lcm - lf] = c
    for m, c in tg.items():
        mm = m + lcm - lg
        out[mm] = out.get(mm, 0) - c
    return enc.decode({m: c for m, c in out.items() if c}, f.ring)


def satisfies_buchberger_criterion(G, order: MonomialOrder) -> bool:
    """Check that every S-polynomial of ``G`` reduces to zero modulo ``G``."""
    G = [g for g in G if not g.is_zero()]
    for i in range(len(G)):
        for j in range(i + 1, len(G)):
            if not normal_form(s_polynomial(G[i], G[j], order), G, order).is_zero():
                return False
    return True


def elimination_ideal(G: GroebnerBasis, keep) -> list:
    """Basis elements free of the eliminated variables."""
    keep = set(keep)
    order = G.order
    ranked = set(order.ranking)
    drop = ranked - keep
    if drop:
        if order.kind == "block":
            # every eliminated variable must sit in a block above every kept one
            seen_keep = False
            for block in order.blocks:
                has_keep = any(v in keep for v in block)
                has_drop = any(v in drop for v in block)
                if has_keep and has_drop:
                    raise PreconditionError("an order block mixes kept and eliminated variables")
                if has_drop and seen_keep:
                    raise PreconditionError("eliminated variables must rank above kept ones")
                seen_keep = seen_keep or has_keep
        elif order.kind == "lex":
            rank = order.ranking
            first_keep = min((i for i, v in enumerate(rank) if v in keep), default=len(rank))
            if any(v in drop for v in rank[first_keep:]):
                raise PreconditionError("lex order is not compatible with the elimination split")
        else:
            raise PreconditionError("elimination needs a block or lex order")
    return [g for g in G.elements if g.variables() <= keep]


def eliminate_linear(polys, elim_vars) -> list:
    """Remove eliminated variables that some generator pins down linearly.

    If ``g = c*v + h`` with ``c`` a nonzero constant and ``v`` not in ``h``,
    then ``v`` is replaced by ``-h/c`` everywhere and ``g`` is dropped.  The
    elimination ideal with respect to the remaining variables is unchanged.
    """
    polys = [p for p in polys if not p.is_zero()]
    pending = list(elim_vars)
    while True:
        best = None
        for i, g in enumerate(polys):
            gv = g.variables()
            for v in pending:
                if v not in gv or g.degree(v) != 1:
                    continue
                parts = g.coeffs_in(v)
                c = parts.get(1)
                if c is None or not c.is_constant():
                    continue
                if best is None or len(g) < best[0]:
                    best = (len(g), i, v, c.constant_value())
        if best is None:
            return polys
        _, i, v, c = best
        g = polys.pop(i)
        pending.remove(v)
        rest = g.coeffs_in(v).get(0)
        value = g.ring.zero() if rest is None else rest.scale(-1 / c)
        out = []
        for p in polys:
            if v in p.variables():
                p = p.subs({v: value})
            if not p.is_zero():
                out.append(p)
        polys = out


def saturate(ideal: TruncatedIdeal, Q: Poly, limits: Limits | None = None, aux_name: str = "t_") -> TruncatedIdeal:
    """Generators of ``I : Q^oo`` via an auxiliary variable ``t`` with ``t*Q - 1``."""
    if Q.is_zero():
        raise DomainError("cannot saturate by the zero polynomial")
    ring = ideal.ring
    name = aux_name
    while name in ring.aux or name in ring.functions or name in ring.params or name == ring.indep:
        name += "_"
    big = ring.extend(aux=[name])
    t = VarId("aux", name)
    gens = [g.to_ring(big) for g in ideal.generators]
    gens.append(big.var(t) * Q.to_ring(big) - 1)
    order = MonomialOrder.nested([(t,)] + list(ideal.order.blocks))
    G = groebner(gens, order, limits=limits, ring=big)
    keep = set(ideal.order.ranking)
    elems = [g.to_ring(ring) for g in elimination_ideal(G, keep)]
    return TruncatedIdeal(elems, ideal.order, ring)


def exact_divide(p: Poly, d: Poly):
    """Return ``p / d`` when ``d`` divides ``p`` exactly, else ``None``."""
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero():
        return p
    if d.ring != p.ring:
        raise ContextMismatchError("polynomials belong to different ring contexts")
    if not d.variables() <= p.variables() and not d.is_constant():
        return None
    gens = tuple(sorted(set(p.gens) | set(d.gens), key=var_key, reverse=True))
    enc = Encoding(MonomialOrder.degrevlex(gens))
    ld, td = _monic(enc.encode(d))
    tail = [(m, c) for m, c in td.items() if m != ld]
    quo, rem = divide_single(enc.encode(p), ld, ld & enc.emask, tail, enc.emask, enc.guard)
    if rem:
        return None
    # undo the monic scaling of d
    dterms = enc.encode(d)
    lcoef = dterms[max(dterms)]
    return enc.decode({m: c / lcoef for m, c in quo.items()}, p.ring)


def diff_order(p: Poly, fn: str) -> int:
    orders = [v.order for v in p.variables() if v.kind == "diff" and v.name == fn]
    return max(orders) if orders else -1


def select_minimal(polys, fn: str) -> Poly:
    """Element of least (order, degree) in ``fn``; ties by smallest degrevlex terms.

    Elements not involving ``fn`` are skipped.  The result is primitive with
    positive leading coefficient.
    """
    cands = [p for p in polys if not p.is_zero() and diff_order(p, fn) >= 0]
    if not cands:
        raise DomainError(f"no nonzero polynomial involving {fn} to select from")

    gens = set()
    for p in cands:
        gens |= p.variables()
    o = MonomialOrder.degrevlex(sorted(gens, key=var_key, reverse=True))

    def key(p):
        q = p.primitive_part()
        terms = tuple((o.key(m), c) for m, c in q.sorted_monomials(o))
        return (diff_order(p, fn), q.degree_in(("diff",)), terms)

    best = min(cands, key=key)
    return best.primitive_part()
