"""Compare the numba and pure-Python backends on the integer kernels.

Each backend runs in its own interpreter (the backend is fixed at import
time by TWOPARABOLIC_NO_JIT).  The script prints timings per case and checks
that both backends produce the same results.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

CASES = {
    "coset 2/5": ("index", 2, 5),
    "coset 11/3": ("index", 3, 11),
    "coset 6/3 (overflow 10^4)": ("index", 3, 6),
    "search 3/2 S4 E6": ("search", 2, 3, 4, 6, False),
    "search 8/3 S5 E6 strong": ("search", 3, 8, 5, 6, True),
}


def worker(repeat):
    from twoparabolic._accel import backend_name
    from twoparabolic.fpgroups import behr_mennicke, embed_delta, todd_coxeter
    from twoparabolic.search import RELATION, STRONG, SearchBounds, search_witness

    def run(case):
        if case[0] == "index":
            _, p, r = case
            t = todd_coxeter(behr_mennicke(p), embed_delta(p, r), 10_000)
            return [t.status, t.index, t.table.tolist() if t.complete else None]
        _, p, r, S, E, strong = case
        mode = STRONG if strong else RELATION
        return [str(w.word) for w in search_witness(p, r, SearchBounds(S, E, mode))]

    report = {"backend": backend_name(), "cases": {}}
    for name, case in CASES.items():
        t0 = time.perf_counter()
        first = run(case)  # includes compilation on the numba backend
        cold = time.perf_counter() - t0
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = run(case)
            best = min(best, time.perf_counter() - t0)
            assert out == first
        digest = hashlib.sha256(json.dumps(first).encode()).hexdigest()[:16]
        report["cases"][name] = {"cold": cold, "best": best, "digest": digest}
    print(json.dumps(report))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.repeat)
        return 0

    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, TWOPARABOLIC_NO_JIT=flag)
        cmd = [sys.executable, __file__, "--worker", "--repeat", str(args.repeat)]
        res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        rep = json.loads(res.stdout.strip().splitlines()[-1])
        results[rep["backend"]] = rep["cases"]

    jit, py = results.get("numba"), results["python"]
    same = True
    print(f"{'case':28s} {'numba cold':>11s} {'numba':>9s} {'python':>9s} {'speedup':>8s}  same")
    for name in CASES:
        p = py[name]
        if jit is None:
            print(f"{name:28s} {'-':>11s} {'-':>9s} {p['best']:9.4f} {'-':>8s}  -")
            continue
        j = jit[name]
        ok = j["digest"] == p["digest"]
        same &= ok
        print(f"{name:28s} {j['cold']:11.3f} {j['best']:9.4f} {p['best']:9.4f} {p['best'] / j['best']:7.1f}x  {ok}")
    if jit is None:
        print("numba is not installed; only the python backend was timed")
    print("outputs identical" if same else "OUTPUTS DIFFER")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
