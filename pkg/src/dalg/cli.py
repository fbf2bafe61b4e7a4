"""Command-line front end (``dalg``).

Every subcommand parses its ADEs, runs Method I and/or Method II, checks
the result with the series oracle unless ``--no-verify`` is given, and
prints text or JSON.  Exit codes: 0 success, 2 parse/usage/domain error,
3 timeout or no result within the level cap, 4 oracle failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from dalg import diffring, method1, method2, oracle
from dalg.errors import ComputationTimeout, DalgError, PartialResultError
from dalg.parser import NAME_RE, infer_ring, parse_ade, parse_expr, parse_relation
from dalg.polyring import Poly, Ring
from dalg.result import AdeResult

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TIMEOUT = 3
EXIT_ORACLE = 4

DEFAULT_TIMEOUT = 120.0
DEFAULT_MAX_J = 6


class UsageError(DalgError):
    """Bad combination of command-line inputs."""


# ---------------------------------------------------------------------------
# input handling


def read_source(text: str) -> str:
    """ADE text, or the contents of an ``.ade`` file (``#`` starts a comment)."""
    if text.endswith(".ade") and Path(text).is_file():
        lines = []
        for line in Path(text).read_text().splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                lines.append(line)
        if not lines:
            raise UsageError(f"{text} contains no equation")
        return " ".join(lines)
    return text


def _params(args) -> tuple:
    if not args.params:
        return ()
    names = tuple(p.strip() for p in args.params.split(",") if p.strip())
    for n in names:
        if not NAME_RE.fullmatch(n):
            raise UsageError(f"invalid parameter name {n!r}")
    return names


def _inputs(args):
    """Parse every ``-e`` source in one shared context."""
    sources = [read_source(s) for s in (args.equation or [])]
    if not sources:
        raise UsageError("at least one -e/--equation is required")
    params = _params(args)
    ring = infer_ring(sources, args.indep, params)
    polys = [parse_ade(s, ring) for s in sources]
    for s, p in zip(sources, polys):
        fns = diffring.functions_in(p)
        if len(fns) > 1:
            raise UsageError(f"equation {s!r} involves several functions {fns}; declare parameters with --params")
        if p.is_zero():
            raise UsageError(f"equation {s!r} is identically zero")
    return ring, polys


def _single(polys, what: str) -> list:
    out = [p for p in polys if diffring.functions_in(p)]
    if not out:
        raise UsageError(f"{what} needs an equation involving a function")
    return out


def _fresh_name(preferred, used) -> str:
    for name in preferred:
        if name not in used:
            return name
    k = 1
    while f"w{k}" in used:
        k += 1
    return f"w{k}"


def _relation(args, ring: Ring, default_target: str = "w"):
    text = args.rel
    if text is None:
        raise UsageError("--rel is required, e.g. --rel \"w=y+z\"")
    target, rhs = parse_relation(text)
    target = target or default_target
    if target in ring.functions or target in ring.params or target == ring.indep:
        raise UsageError(f"output name {target!r} clashes with an input name")
    return target, parse_expr(rhs, ring)


def _jets(args, fns) -> list | None:
    if not args.jet:
        return None
    if len(args.jet) > len(fns):
        raise UsageError(f"got {len(args.jet)} jets for {len(fns)} functions")
    jets = [oracle.parse_jet(t, f) for t, f in zip(args.jet, fns)]
    return jets + [None] * (len(fns) - len(jets))


def _timeout(args) -> float:
    return float(args.timeout)


def _methods(args) -> list:
    return ["I", "II"] if args.method == "both" else [args.method]


# ---------------------------------------------------------------------------
# subcommands; each returns a list of (AdeResult, verifier) pairs


def cmd_arith(args):
    ring, polys = _inputs(args)
    target, rel = _relation(args, ring)
    fns = [diffring.functions_in(p)[0] for p in polys if diffring.functions_in(p)]
    jets = _jets(args, fns)
    jets_full = None
    if jets is not None:
        it = iter(jets)
        jets_full = [next(it) if diffring.functions_in(p) else None for p in polys]
    out = []
    for m in _methods(args):
        if m == "I":
            res = method1.relation_method1(polys, rel, target, max_j=args.max_j, timeout=_timeout(args),
                                           continue_past_first=args.continue_past_first)
        else:
            res = method2.arithmetic_method2(polys, rel, target, timeout=_timeout(args))
        out.append((res, lambda r: oracle.verify_relation(r.ade, r.target, polys, rel, jets=jets_full)))
    return out


def cmd_unary(args):
    if args.expr is not None:
        args.rel = args.expr
    ring, polys = _inputs(args)
    p = _single(polys, "unary")
    if len(p) != 1 or len(polys) != 1:
        raise UsageError("unary takes exactly one equation")
    p = p[0]
    target, expr = _relation(args, ring)
    jets = _jets(args, diffring.functions_in(p))
    out = []
    for m in _methods(args):
        if m == "I":
            res = method1.relation_method1([p], expr, target, max_j=args.max_j, timeout=_timeout(args),
                                           continue_past_first=args.continue_past_first)
        else:
            res = method2.unary_dalg(p, expr, target, timeout=_timeout(args))
        out.append((res, lambda r: oracle.verify_relation(r.ade, r.target, [p], expr, jets=jets)))
    return out


def cmd_compose(args):
    ring, polys = _inputs(args)
    if len(polys) != 2:
        raise UsageError("compose takes exactly two equations, outer first")
    outer, inner = polys
    fo, fi = diffring.functions_in(outer), diffring.functions_in(inner)
    if not fo or not fi:
        raise UsageError("both compose inputs must involve a function")
    used = set(ring.functions) | set(ring.params) | {ring.indep}
    if args.rel:
        target = args.rel.split("=", 1)[0].strip()
        if not NAME_RE.fullmatch(target) or target in used:
            raise UsageError(f"invalid or clashing output name {target!r}")
    else:
        target = _fresh_name(("z", "w", "h"), used)
    jets = _jets(args, fo + fi)
    out = []
    for m in _methods(args):
        if m == "I":
            res = method1.compose_method1(outer, inner, target, max_j=args.max_j, timeout=_timeout(args),
                                          continue_past_first=args.continue_past_first)
        else:
            res = method2.compose_method2(outer, inner, target, timeout=_timeout(args))
        out.append((res, lambda r: oracle.verify_compose(r.ade, r.target, outer, inner, jets=jets)))
    return out


def _inverse_names(args, ring: Ring):
    used = set(ring.functions) | set(ring.params) | {ring.indep}
    fn, indep = "g", None
    if args.rel:
        text = args.rel.strip()
        if "(" in text:
            fn, rest = text.split("(", 1)
            indep = rest.rstrip(")").strip()
            fn = fn.strip()
        else:
            fn = text
    if indep is None:
        indep = _fresh_name(("y", "t", "s"), used | {fn})
    for nm in (fn, indep):
        if not NAME_RE.fullmatch(nm):
            raise UsageError(f"invalid name {nm!r}")
    if fn == indep or fn in ring.params or indep in ring.params:
        raise UsageError("output names clash with parameters or each other")
    return fn, indep


def cmd_inverse(args):
    ring, polys = _inputs(args)
    if len(polys) != 1:
        raise UsageError("inverse takes exactly one equation")
    p = _single(polys, "inverse")[0]
    fn, indep = _inverse_names(args, ring)
    jets = _jets(args, diffring.functions_in(p))
    res = method2.inverse_dalg(p, out_fn=fn, out_indep=indep)
    return [(res, lambda r: oracle.verify_inverse(r.ade, r.target, p, jets=jets))]


def _deriv_common(args, k: int):
    ring, polys = _inputs(args)
    if len(polys) != 1:
        raise UsageError("this operation takes exactly one equation")
    p = _single(polys, "this operation")[0]
    jets = _jets(args, diffring.functions_in(p))
    res = method2.derivative_method(p) if k == 1 else method2.antiderivative_method(p)
    return [(res, lambda r: oracle.verify_derivative(r.ade, r.target, p, k=k, jets=jets))]


def cmd_derivative(args):
    return _deriv_common(args, 1)


def cmd_antiderivative(args):
    return _deriv_common(args, -1)


def load_model(path: str, indep_default: str = "x", params_default=()):
    """Read the model JSON ``{"indep", "params", "states", "rhs", "output"}``."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read model file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed model JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("model JSON must be an object")
    for key in ("states", "rhs", "output"):
        if key not in data:
            raise UsageError(f"model JSON lacks {key!r}")
    states, rhs = data["states"], data["rhs"]
    if not isinstance(states, list) or not isinstance(rhs, list) or not isinstance(data["output"], str):
        raise UsageError("states and rhs must be lists and output a string")
    if len(states) != len(rhs):
        raise UsageError(f"model has {len(states)} states but {len(rhs)} right-hand sides")
    params = tuple(data.get("params", params_default))
    indep = data.get("indep", indep_default)
    return method2.model_from_text(states, rhs, data["output"], indep=indep, params=params)


def cmd_sys2min(args):
    model = load_model(args.model, args.indep, _params(args))
    used = set(model.states) | set(model.ring.params) | {model.ring.indep}
    target = args.rel.strip() if args.rel else _fresh_name(("z", "w", "f"), used)
    if target in used or not NAME_RE.fullmatch(target):
        raise UsageError(f"invalid or clashing output name {target!r}")
    initial = None
    if args.jet:
        vals = oracle.parse_jet(args.jet[0], "model").values
        if len(vals) != len(model.states):
            raise UsageError("the jet for sys2min lists one initial value per state")
        initial = dict(zip(model.states, vals))
    res = method2.sys_to_min_diff_poly(model, target, timeout=_timeout(args))
    return [(res, lambda r: oracle.verify_model(r.ade, r.target, model, initial=initial))]


# ---------------------------------------------------------------------------
# identity proving


def _load_side(text: str, indep: str, params) -> Poly:
    if text.endswith(".json") and Path(text).is_file():
        data = json.loads(Path(text).read_text())
        if isinstance(data, list):
            data = data[0]
        text = data["ade"]
    else:
        text = read_source(text)
    ring = infer_ring([text], indep, params)
    p = parse_ade(text, ring)
    fns = diffring.functions_in(p)
    if len(fns) != 1:
        raise UsageError(f"each side must involve exactly one function, got {fns}")
    return p


def _same_function(a: Poly, b: Poly):
    fa, fb = diffring.functions_in(a)[0], diffring.functions_in(b)[0]
    if fa == fb:
        ring = a.ring.merge(b.ring)
        return a.to_ring(ring), b.to_ring(ring), fa
    ring = a.ring.merge(Ring((), b.ring.indep, b.ring.params))
    mapping = {v: diffring.dvar(fa, v.order) for v in b.variables() if v.kind == "diff"}
    return a.to_ring(ring), b.rename(mapping, ring=ring), fa


def proportional(a: Poly, b: Poly) -> bool:
    pa, pb = a.primitive_part(), b.primitive_part()
    return pa == pb or pa == -pb


def prove(lhs: Poly, rhs: Poly, seed: int = 1) -> dict:
    """Compare two ADEs: proportionality, ideal reduction, then series."""
    a, b, fn = _same_function(lhs, rhs)
    steps = []
    if proportional(a, b):
        steps.append({"step": "proportional", "result": True})
        return {"status": "proven", "relation": "proportional", "steps": steps}
    steps.append({"step": "proportional", "result": False})
    for name, x, y in (("lhs in [rhs]", a, b), ("rhs in [lhs]", b, a)):
        r = diffring.ideal_reduce(x, y, fn)
        steps.append({"step": f"reduce {name}", "result": r.is_zero()})
        if r.is_zero():
            return {"status": "proven", "relation": name, "steps": steps}
    for name, x, y in (("lhs is a first integral of rhs", a, b), ("rhs is a first integral of lhs", b, a)):
        r = diffring.ideal_reduce(diffring.total_derivative(x), y, fn)
        steps.append({"step": f"reduce derivative: {name}", "result": r.is_zero()})
        if r.is_zero():
            return {"status": "first-integral", "relation": name, "steps": steps}
    # series solutions of the lower-order side must satisfy the other side
    low, high = (a, b) if diffring.order(a, fn) <= diffring.order(b, fn) else (b, a)
    params = sorted({v.name for p in (a, b) for v in p.variables() if v.kind == "param"})

    def build(T, prm, rng):
        jet = oracle.generic_jet(low, 0, params=prm, rng=rng, fn=fn, free=[n for n in params])
        return oracle.series_from_ade(low, jet.values, T + 1, jet.point, prm, fn), [jet]

    rep = oracle.verify(high, fn, build, params, seed=seed)
    steps.append({"step": "series", "result": rep["passed"]})
    if rep["passed"]:
        return {"status": "consistent", "relation": "series agree", "steps": steps}
    return {"status": "refuted" if rep["passed"] is False and rep["runs"] else "unknown",
            "relation": None, "steps": steps}


def cmd_prove(args):
    params = _params(args)
    lhs = _load_side(args.lhs, args.indep, params)
    rhs = _load_side(args.rhs, args.indep, params)
    return prove(lhs, rhs)


# ---------------------------------------------------------------------------
# verify an ADE given by the user


def cmd_verify(args):
    if args.ade is None:
        raise UsageError("verify needs --ade")
    ade_text = read_source(args.ade)
    op = args.op
    if op == "sys2min":
        model = load_model(args.model, args.indep, _params(args))
        ring = infer_ring([ade_text], model.ring.indep, model.ring.params)
        ade = parse_ade(ade_text, ring)
        fn = _ade_function(ade)
        return oracle.verify_model(ade, fn, model)
    ring, polys = _inputs(args)
    if op in ("arith", "unary"):
        target, rel = _relation(args, ring)
        ade = parse_ade(ade_text, infer_ring([ade_text], ring.indep, ring.params))
        fns = [diffring.functions_in(p)[0] for p in polys if diffring.functions_in(p)]
        return oracle.verify_relation(ade, _ade_function(ade), polys, rel, jets=_jets(args, fns))
    if op == "inverse":
        p = _single(polys, op)[0]
        _, indep = _inverse_names(args, ring)
        ade = parse_ade(ade_text, infer_ring([ade_text], indep, ring.params))
        jets = _jets(args, diffring.functions_in(p))
        return oracle.verify_inverse(ade, _ade_function(ade), p, jets=jets)
    ade = parse_ade(ade_text, infer_ring([ade_text], ring.indep, ring.params))
    fn = _ade_function(ade)
    if op == "compose":
        if len(polys) != 2:
            raise UsageError("compose takes exactly two equations, outer first")
        fns = diffring.functions_in(polys[0]) + diffring.functions_in(polys[1])
        return oracle.verify_compose(ade, fn, polys[0], polys[1], jets=_jets(args, fns))
    p = _single(polys, op)[0]
    jets = _jets(args, diffring.functions_in(p))
    k = 1 if op == "derivative" else -1
    return oracle.verify_derivative(ade, fn, p, k=k, jets=jets)


def _ade_function(ade: Poly) -> str:
    fns = diffring.functions_in(ade)
    if len(fns) != 1:
        raise UsageError(f"the ADE must involve exactly one function, got {fns}")
    return fns[0]


# ---------------------------------------------------------------------------
# output


def _render(results, fmt: str) -> str:
    if fmt == "json":
        dicts = [r.to_dict() for r in results]
        return json.dumps(dicts[0] if len(dicts) == 1 else dicts)
    return "\n\n".join(r.to_text() for r in results)


def _emit(text: str, args) -> None:
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    env = os.environ.get("DALG_TIMEOUT")
    default_timeout = DEFAULT_TIMEOUT
    if env:
        try:
            default_timeout = float(env)
        except ValueError:
            pass
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-e", "--equation", action="append", help="input ADE text or .ade file (repeatable)")
    common.add_argument("--rel", help="relation 'w=expr', or the output name")
    common.add_argument("--method", choices=("I", "II", "both"), default="II")
    common.add_argument("--indep", default="x", help="independent variable (default x)")
    common.add_argument("--params", help="comma-separated parameter names")
    common.add_argument("--max-j", type=int, default=DEFAULT_MAX_J, help="Method I level cap (default 6)")
    common.add_argument("--timeout", type=float, default=default_timeout,
                        help=f"seconds per computation (default {default_timeout:g}; env DALG_TIMEOUT)")
    common.add_argument("--continue-past-first", action="store_true",
                        help="Method I: keep raising the level after the first hit")
    common.add_argument("--no-verify", action="store_true", help="skip the series oracle")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--jet", action="append", help="oracle jet 'v0,v1,...[@a]' per input (repeatable)")
    common.add_argument("--out", help="write the result to this file")

    parser = argparse.ArgumentParser(prog="dalg", description="ADEs for operations on D-algebraic functions.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("arith", parents=[common], help="rational relation of several functions")
    un = sub.add_parser("unary", parents=[common], help="rational expression in one function")
    un.add_argument("--expr", help="same as --rel")
    sub.add_parser("compose", parents=[common], help="composition f(g(x)); outer equation first")
    sub.add_parser("inverse", parents=[common], help="compositional inverse; --rel 'g(y)' names the output")
    sub.add_parser("derivative", parents=[common], help="derivative of a solution")
    sub.add_parser("antiderivative", parents=[common], help="antiderivative of a solution")
    sm = sub.add_parser("sys2min", parents=[common], help="ADE for the output of a rational model")
    sm.add_argument("model", help="model JSON file")
    pr = sub.add_parser("prove", parents=[common], help="compare two ADEs")
    pr.add_argument("--lhs", required=True, help="ADE text, .ade file or result .json")
    pr.add_argument("--rhs", required=True, help="ADE text, .ade file or result .json")
    ve = sub.add_parser("verify", parents=[common], help="check a given ADE with the series oracle")
    ve.add_argument("--op", required=True,
                    choices=("arith", "unary", "compose", "inverse", "derivative", "antiderivative", "sys2min"))
    ve.add_argument("--ade", required=True, help="ADE text or .ade file to check")
    ve.add_argument("--model", help="model JSON file (for --op sys2min)")
    return parser


COMMANDS = {
    "arith": cmd_arith,
    "unary": cmd_unary,
    "compose": cmd_compose,
    "inverse": cmd_inverse,
    "derivative": cmd_derivative,
    "antiderivative": cmd_antiderivative,
    "sys2min": cmd_sys2min,
}


def run(args) -> int:
    if args.command == "prove":
        report = cmd_prove(args)
        if args.format == "json":
            _emit(json.dumps(report), args)
        else:
            lines = [f"{s['step']}: {s['result']}" for s in report["steps"]]
            lines.append(f"status: {report['status']}" + (f" ({report['relation']})" if report["relation"] else ""))
            _emit("\n".join(lines), args)
        return EXIT_ORACLE if report["status"] == "refuted" else EXIT_OK
    if args.command == "verify":
        if args.op == "sys2min" and not args.model:
            raise UsageError("--op sys2min needs --model")
        report = cmd_verify(args)
        if args.format == "json":
            _emit(json.dumps(report), args)
        else:
            verdict = {True: "passed", False: "FAILED", None: "not checkable"}[report["passed"]]
            extra = f" ({report['note']})" if report.get("note") else ""
            bad = next((r for r in report.get("runs", []) if r.get("passed") is False), None)
            if bad is not None:
                extra += f" (coefficient {bad['first_nonzero']} is {bad['value']}, truncation {bad['truncation']})"
            _emit(f"series oracle: {verdict}{extra}", args)
        return EXIT_ORACLE if report["passed"] is False else EXIT_OK
    pairs = COMMANDS[args.command](args)
    results: list[AdeResult] = []
    code = EXIT_OK
    for res, check in pairs:
        if not args.no_verify:
            rep = check(res)
            res.verification = rep
            res.verified = rep["passed"]
            if rep["passed"] is False:
                code = EXIT_ORACLE
        results.append(res)
    _emit(_render(results, args.format), args)
    return code


_VALUE_OPTIONS = {"-e", "--equation", "--rel", "--expr", "--lhs", "--rhs", "--ade", "--jet"}


def _join_negative_values(argv: list) -> list:
    """Let equation values start with '-' (``-e "-z'^2+z"``)."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") and len(argv[i + 1]) > 1:
            nxt = argv[i + 1]
            if not nxt.startswith("--") and not (len(nxt) == 2 and nxt[1].isalpha()):
                out.append(f"{a}={nxt}" if a.startswith("--") else a + nxt)
                i += 2
                continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_join_negative_values(argv))
    try:
        return run(args)
    except (ComputationTimeout, PartialResultError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc), "stats": getattr(exc, "stats", {})}
        if isinstance(exc, PartialResultError):
            diag["last_level"] = exc.last_level
        print(f"dalg: {exc}", file=sys.stderr)
        print(json.dumps(diag, default=str), file=sys.stderr)
        return EXIT_TIMEOUT
    except (DalgError, ValueError) as exc:
        print(f"dalg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
