"""Pure-Python hot kernels.

Monomials are packed Python ints, so a monomial product is one integer
addition.  ``normal_form`` works on the order-preserving packing produced by
``dalg.groebner.Encoding``: comparing two packed monomials as ints compares
them under the monomial order, and the low ``emask`` bits hold the exponent
vector with one guard bit per field for divisibility tests.

``dalg/_kernel.pyx`` is a line-for-line typed copy of this module.
"""

from heapq import heapify, heappop, heappush
from time import monotonic

from dalg.errors import ComputationTimeout


def mul_terms(a, b):
    """Product of two term dicts ``{packed monomial: coefficient}``."""
    if len(a) < len(b):
        a, b = b, a
    out = {}
    get = out.get
    for mb, cb in b.items():
        for ma, ca in a.items():
            m = ma + mb
            v = get(m)
            if v is None:
                out[m] = ca * cb
            else:
                out[m] = v + ca * cb
    return {m: c for m, c in out.items() if c}


def normal_form(f, lms, les, tails, emask, guard, budget):
    """Fully reduce ``f`` modulo monic reducers.

    ``lms[k]`` is the packed leading monomial of reducer ``k``, ``les[k]`` its
    exponent part and ``tails[k]`` the list of its remaining ``(monomial,
    coefficient)`` pairs.  ``budget`` is a mutable ``[steps, max_steps,
    deadline]`` list; ``steps`` is updated in place.  Returns the remainder
    as a term dict.
    """
    h = dict(f)
    heap = [-m for m in h]
    heapify(heap)
    rem = {}
    nred = len(lms)
    steps = budget[0]
    max_steps = budget[1]
    deadline = budget[2]
    while heap:
        m = -heappop(heap)
        c = h.pop(m, None)
        if c is None:
            continue
        e = (m & emask) | guard
        k = 0
        while k < nred:
            if (e - les[k]) & guard == guard:
                break
            k += 1
        if k == nred:
            rem[m] = c
            continue
        shift = m - lms[k]
        for mt, ct in tails[k]:
            mm = mt + shift
            v = h.get(mm)
            if v is None:
                h[mm] = -c * ct
                heappush(heap, -mm)
            else:
                v = v - c * ct
                if v:
                    h[mm] = v
                else:
                    del h[mm]
        steps += 1
        # one step can be slow when coefficients grow, so check the clock every time
        if steps > max_steps:
            budget[0] = steps
            raise ComputationTimeout("reduction step cap exceeded", {"steps": steps})
        if deadline is not None and monotonic() > deadline:
            budget[0] = steps
            raise ComputationTimeout("wall-clock limit exceeded", {"steps": steps})
    budget[0] = steps
    return rem


def divide_single(f, lm, le, tail, emask, guard):
    """Divide ``f`` by one monic polynomial; return ``(quotient, remainder)``."""
    h = dict(f)
    heap = [-m for m in h]
    heapify(heap)
    quo = {}
    rem = {}
    while heap:
        m = -heappop(heap)
        c = h.pop(m, None)
        if c is None:
            continue
        if (((m & emask) | guard) - le) & guard != guard:
            rem[m] = c
            continue
        shift = m - lm
        quo[shift] = c
        for mt, ct in tail:
            mm = mt + shift
            v = h.get(mm)
            if v is None:
                h[mm] = -c * ct
                heappush(heap, -mm)
            else:
                v = v - c * ct
                if v:
                    h[mm] = v
                else:
                    del h[mm]
    return quo, rem
