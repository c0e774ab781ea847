"""Compare the compiled and pure-Python truncated multiplication kernels.

    python3 benchmarks/bench_kernels.py [--sizes 64,256,1024] [--bits 64,1024] [--repeat 5]

Inputs are random signed integer vectors; both kernels must agree exactly
before any timing is reported. A last section times an end-to-end pmf
extraction with each backend forced through ``CRITCOMP_PURE_PYTHON``.
"""
import argparse
import os
import random
import subprocess
import sys
import timeit

from critcomp.pseries import _kernels_py

try:
    from critcomp.pseries import _kernels as compiled
except ImportError:
    compiled = None


def vector(rng, n, bits):
    return [rng.getrandbits(bits) * rng.choice((-1, 1)) for _ in range(n)]


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def end_to_end(pure: bool) -> float:
    env = dict(os.environ, CRITCOMP_PURE_PYTHON="1" if pure else "0")
    code = ("import time; from critcomp import catalog; e = catalog.get('supertrees'); "
            "t = time.perf_counter(); e.exact_pmf(300); print(time.perf_counter() - t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,256,1024")
    ap.add_argument("--bits", default="64,1024")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()
    if compiled is None:
        print("compiled kernel not available; only the fallback can be timed")
    rng = random.Random(2024)
    print(f"{'n':>6} {'bits':>6} {'python [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}")
    for n in map(int, args.sizes.split(",")):
        for bits in map(int, args.bits.split(",")):
            a, b = vector(rng, n, bits), vector(rng, n, bits)
            ref = _kernels_py.mullow(a, b, n)
            tp = best(lambda: _kernels_py.mullow(a, b, n), args.repeat)
            if compiled is not None:
                assert compiled.mullow(a, b, n) == ref, "kernels disagree"
                tc = best(lambda: compiled.mullow(a, b, n), args.repeat)
                print(f"{n:>6} {bits:>6} {tp * 1e3:>12.3f} {tc * 1e3:>14.3f} {tp / tc:>8.2f}")
            else:
                print(f"{n:>6} {bits:>6} {tp * 1e3:>12.3f} {'-':>14} {'-':>8}")
    if not args.skip_end_to_end:
        tp, tc = end_to_end(True), end_to_end(False)
        print(f"supertrees pmf at n=300: python {tp:.2f} s, default backend {tc:.2f} s")


if __name__ == "__main__":
    main()
