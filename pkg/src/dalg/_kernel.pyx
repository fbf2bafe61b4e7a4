# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels; typed copy of ``dalg._kernel_py``."""

from heapq import heapify, heappop, heappush
from time import monotonic

from dalg.errors import ComputationTimeout


def mul_terms(dict a, dict b):
    """Product of two term dicts ``{packed monomial: coefficient}``."""
    cdef dict out = {}
    cdef object m, v, ma, ca, mb, cb
    if len(a) < len(b):
        a, b = b, a
    for mb, cb in b.items():
        for ma, ca in a.items():
            m = ma + mb
            v = out.get(m)
            if v is None:
                out[m] = ca * cb
            else:
                out[m] = v + ca * cb
    return {m: v for m, v in out.items() if v}


def normal_form(dict f, list lms, list les, list tails, object emask, object guard, list budget):
    """Fully reduce ``f`` modulo monic reducers (see ``dalg._kernel_py``)."""
    cdef dict h = dict(f)
    cdef list heap = [-m for m in h]
    cdef dict rem = {}
    cdef Py_ssize_t k, nred = len(lms)
    cdef long long steps = budget[0]
    cdef long long max_steps = budget[1]
    cdef object deadline = budget[2]
    cdef object m, c, e, shift, mt, ct, mm, v
    cdef list tail
    heapify(heap)
    while heap:
        m = -heappop(heap)
        c = h.pop(m, None)
        if c is None:
            continue
        e = (m & emask) | guard
        k = 0
        while k < nred:
            if (e - <object>les[k]) & guard == guard:
                break
            k += 1
        if k == nred:
            rem[m] = c
            continue
        shift = m - <object>lms[k]
        tail = <list>tails[k]
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


def divide_single(dict f, object lm, object le, list tail, object emask, object guard):
    """Divide ``f`` by one monic polynomial; return ``(quotient, remainder)``."""
    cdef dict h = dict(f)
    cdef list heap = [-m for m in h]
    cdef dict quo = {}
    cdef dict rem = {}
    cdef object m, c, shift, mt, ct, mm, v
    heapify(heap)
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
