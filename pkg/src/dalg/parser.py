"""Recursive-descent parser for the ADE text grammar.

::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('+'|'-') factor | base ('^' uint)?
    base   := rational | name | deriv | '(' expr ')'
    deriv  := name "'"+ | name '^(' uint ')'

An equation ``LHS = RHS`` becomes ``LHS - RHS``.  ADE sources may divide
only by constants; rational expressions are accepted where a relation or a
model right-hand side is expected.
"""

from __future__ import annotations

import re

from gmpy2 import mpq

from dalg.diffring import RationalExpr
from dalg.errors import ParseError
from dalg.polyring import Poly, Ring, VarId

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|('+)|(\^\()|([-+*/^()=]))")
NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(src: str) -> list:
    toks = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", *_where(src, pos))
        start = m.start(m.lastindex)
        kind = ("int", "name", "primes", "dpow", "op")[m.lastindex - 1]
        toks.append(_Tok(kind, m.group(m.lastindex), start))
        pos = m.end()
    toks.append(_Tok("end", "", n))
    return toks


def _where(src: str, pos: int):
    line = src.count("\n", 0, pos) + 1
    col = pos - (src.rfind("\n", 0, pos) + 1) + 1
    return line, col


def scan_names(src: str) -> list:
    """Names occurring in ``src`` in order of first appearance."""
    seen = []
    for tok in _tokenize(src):
        if tok.kind == "name" and tok.text not in seen:
            seen.append(tok.text)
    return seen


class _Parser:
    def __init__(self, src: str, ring: Ring):
        self.src = src
        self.ring = ring
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, *_where(self.src, tok.pos))

    def expect(self, text: str):
        t = self.peek()
        if t.kind != "op" or t.text != text:
            self.error(f"expected {text!r}" + (" but input ended" if t.kind == "end" else f", got {t.text!r}"))
        return self.take()

    def uint(self) -> int:
        t = self.peek()
        if t.kind != "int":
            self.error("expected an unsigned integer" + (" but input ended" if t.kind == "end" else ""))
        self.take()
        return int(t.text)

    def parse_top(self):
        left = self.expr()
        t = self.peek()
        if t.kind == "op" and t.text == "=":
            self.take()
            right = self.expr()
            left = left - right
            t = self.peek()
        if t.kind != "end":
            self.error(f"unexpected {t.text!r}")
        return left

    def expr(self):
        val = self.term()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in "+-":
                self.take()
                rhs = self.term()
                val = val + rhs if t.text == "+" else val - rhs
            else:
                return val

    def term(self):
        val = self.factor()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in "*/":
                self.take()
                rhs = self.factor()
                if t.text == "*":
                    val = val * rhs
                else:
                    if rhs.num.is_zero():
                        self.error("division by zero", t)
                    val = val / rhs
            else:
                return val

    def factor(self):
        t = self.peek()
        if t.kind == "op" and t.text in "+-":
            self.take()
            val = self.factor()
            return -val if t.text == "-" else val
        base = self.base()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.take()
            base = base ** self.uint()
        return base

    def base(self):
        t = self.peek()
        if t.kind == "int":
            self.take()
            num = int(t.text)
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "/" and self.toks[self.i + 1].kind == "int":
                after = self.toks[self.i + 2]
                # keep "1/2^3" as 1/(2^3) by not swallowing a denominator that is raised to a power
                if not (after.kind == "op" and after.text == "^"):
                    self.take()
                    den = int(self.take().text)
                    if den == 0:
                        self.error("zero denominator in rational literal", nxt)
                    return self.const(mpq(num, den))
            return self.const(mpq(num))
        if t.kind == "name":
            self.take()
            nxt = self.peek()
            if nxt.kind == "primes":
                self.take()
                return self.derivative(t, len(nxt.text))
            if nxt.kind == "dpow":
                self.take()
                k = self.uint()
                self.expect(")")
                return self.derivative(t, k)
            return self.name(t)
        if t.kind == "op" and t.text == "(":
            self.take()
            val = self.expr()
            self.expect(")")
            return val
        if t.kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {t.text!r}")

    def const(self, c):
        return RationalExpr.of(self.ring.const(c))

    def name(self, tok: _Tok):
        r = self.ring
        nm = tok.text
        if nm in r.functions:
            return RationalExpr.of(r.fn(nm, 0))
        if nm == r.indep:
            return RationalExpr.of(r.x())
        if nm in r.params:
            return RationalExpr.of(r.param(nm))
        if nm in r.aux:
            return RationalExpr.of(r.aux_var(nm))
        known = sorted(set(r.functions) | set(r.params) | set(r.aux) | {r.indep})
        self.error(f"undeclared name {nm!r}; known names: {', '.join(known)}", tok)

    def derivative(self, tok: _Tok, k: int):
        r = self.ring
        nm = tok.text
        if nm in r.functions:
            return RationalExpr.of(r.fn(nm, k))
        if nm in r.params or nm in r.aux:
            self.error(f"cannot differentiate parameter {nm!r}", tok)
        if nm == r.indep:
            self.error(f"write derivatives of the independent variable {nm!r} explicitly", tok)
        self.name(tok)


def parse_expr(src: str, ring: Ring) -> RationalExpr:
    """Parse text that may contain division by non-constant expressions."""
    return _Parser(src, ring).parse_top()


def parse_ade(src: str, ring: Ring) -> Poly:
    """Parse an ADE source (an equation or an expression) to a polynomial."""
    r = _Parser(src, ring).parse_top()
    if not r.den.is_constant():
        raise ParseError("division by a non-constant expression is not allowed in an ADE", 1, None)
    return r.num.scale(1 / r.den.constant_value())


def parse_relation(src: str):
    """Split ``"w = expr"`` into ``("w", "expr")``; a bare expression gets ``None``."""
    if "=" not in src:
        return None, src
    lhs, rhs = src.split("=", 1)
    lhs = lhs.strip()
    if not NAME_RE.fullmatch(lhs):
        raise ParseError(f"relation must start with a function name, got {lhs!r}", 1, 1)
    return lhs, rhs


def infer_ring(sources, indep: str = "x", params=(), extra_functions=()) -> Ring:
    """Context whose functions are all names that are not ``indep`` or parameters."""
    fns = list(extra_functions)
    for src in sources:
        for nm in scan_names(src):
            if nm != indep and nm not in params and nm not in fns:
                fns.append(nm)
    return Ring(tuple(fns), indep, tuple(params))


def diff_var_name(v: VarId) -> str:
    return str(v)
