"""Compare the compiled and pure-Python kernels on a few representative workloads.

Each backend runs in its own interpreter (``DALG_PURE_PYTHON=1`` selects the
fallback), so both see a cold cache.  Usage::

    python benchmarks/bench_kernel.py [--repeat 3] [--json]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = {
    "groebner-cyclic4": """
from dalg.groebner import groebner
from dalg.polyring import MonomialOrder, Ring, VarId
names = ("a", "b", "c", "d")
R = Ring((), "x", (), names)
a, b, c, d = (R.var(VarId("aux", n)) for n in names)
gens = [a + b + c + d, a*b + b*c + c*d + d*a, a*b*c + b*c*d + c*d*a + d*a*b, a*b*c*d - 1]
groebner(gens, MonomialOrder.degrevlex([VarId("aux", n) for n in names]))
""",
    "method1-sum-table1": """
from dalg.parser import parse_ade
from dalg.polyring import Ring
from dalg import method1
R = Ring(("y", "z"), "x", ())
method1.arithmetic_method1(parse_ade("y'-x*y^2", R), parse_ade("-z'^2+z+x+1", R), "+")
""",
    "method1-compose-table1": """
from dalg.parser import parse_ade
from dalg.polyring import Ring
from dalg import method1
R = Ring(("y", "z"), "x", ())
method1.compose_method1(parse_ade("x*y'-x^2+y-1", R), parse_ade("z*z'+3*z'+2*x^2+2", R))
""",
    "method2-sir": """
from dalg.method2 import model_from_text, sys_to_min_diff_poly
m = model_from_text(["S", "T", "R"], ["-beta*S*T-delta*S+mu", "beta*S*T-gamma*T+nu", "delta*S+gamma*T"],
                    "R", params=["beta", "delta", "gamma", "mu", "nu"])
sys_to_min_diff_poly(m, "f")
""",
}

RUNNER = """
import sys, time
import dalg
src = sys.stdin.read()
start = time.perf_counter()
exec(compile(src, "<workload>", "exec"), {})
print(dalg.BACKEND, time.perf_counter() - start)
"""


def run_once(code: str, pure: bool) -> tuple:
    env = dict(os.environ)
    if pure:
        env["DALG_PURE_PYTHON"] = "1"
    else:
        env.pop("DALG_PURE_PYTHON", None)
    proc = subprocess.run([sys.executable, "-c", RUNNER], input=code, capture_output=True, text=True, env=env,
                          check=True)
    backend, seconds = proc.stdout.split()
    return backend, float(seconds)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="runs per workload and backend (best is reported)")
    ap.add_argument("--only", action="append", choices=sorted(WORKLOADS), help="restrict to these workloads")
    ap.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = ap.parse_args(argv)
    rows = []
    for name in args.only or WORKLOADS:
        code = WORKLOADS[name]
        best = {}
        for pure in (False, True):
            times = []
            for _ in range(args.repeat):
                backend, seconds = run_once(code, pure)
                times.append(seconds)
            best["pure" if pure else backend] = min(times)
        compiled = best.get("cython")
        rows.append({
            "workload": name,
            "cython_s": compiled,
            "pure_s": best["pure"],
            "speedup": None if compiled is None else best["pure"] / compiled,
        })
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{'workload':<26}{'cython (s)':>12}{'pure (s)':>12}{'speedup':>10}")
    for r in rows:
        cy = "n/a" if r["cython_s"] is None else f"{r['cython_s']:.3f}"
        sp = "n/a" if r["speedup"] is None else f"{r['speedup']:.2f}x"
        print(f"{r['workload']:<26}{cy:>12}{r['pure_s']:>12.3f}{sp:>10}")
    return 0


if __name__ == "__main__":
    start = time.perf_counter()
    code = main()
    print(f"total {time.perf_counter() - start:.1f}s", file=sys.stderr)
    sys.exit(code)
