"""Benchmark the compiled Taylor kernels against the numpy fallback.

Two measurements:
  * raw kernel throughput (mul/compose on random order-3 jet data), timed
    in-process for both backends;
  * end-to-end jet evaluation of a catalog immersion, timed in fresh
    subprocesses so the backend choice (CONFFLAT_JET_BACKEND) takes effect.

Run:  python3 benchmarks/bench_jets.py [--repeat 5]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

_MAP_SNIPPET = """
import time
import numpy as np
from confflat.catalog import default_catalog
from confflat.jets import BACKEND, evaluate_jet

item = default_catalog()["s3xs1"]
rng = np.random.default_rng(0)
pts = item.smooth_map.domain.sample_points(40, rng)
for pt in pts[:5]:
    evaluate_jet(item.smooth_map, pt)          # warm up
t0 = time.perf_counter()
for _ in range(5):
    for pt in pts:
        evaluate_jet(item.smooth_map, pt)
dt = time.perf_counter() - t0
print(f"{BACKEND} {dt / (5 * len(pts)) * 1e6:.1f}")
"""


def bench_kernels(repeat):
    from confflat.jets import _taylor_cy, _taylor_py
    rng = np.random.default_rng(0)
    n = 6
    a = [rng.standard_normal(), rng.standard_normal(n),
         rng.standard_normal((n, n)), rng.standard_normal((n, n, n))]
    b = [rng.standard_normal(), rng.standard_normal(n),
         rng.standard_normal((n, n)), rng.standard_normal((n, n, n))]
    coeffs = rng.standard_normal(4)
    results = {}
    for label, mod in (("cython", _taylor_cy), ("python", _taylor_py)):
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            for _ in range(2000):
                mod.mul(3, *a, *b)
                mod.compose(3, *a, *coeffs)
            best = min(best, time.perf_counter() - t0)
        results[label] = best / 4000 * 1e6
    return results


def bench_maps():
    results = {}
    for backend in ("cython", "python"):
        env = dict(os.environ, CONFFLAT_JET_BACKEND=backend,
                   PYTHONPATH=os.pathsep.join(sys.path))
        out = subprocess.run([sys.executable, "-c", _MAP_SNIPPET], env=env,
                             capture_output=True, text=True, check=True)
        name, usec = out.stdout.split()
        assert name == backend, f"backend override ignored: got {name}"
        results[backend] = float(usec)
    return results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print("Taylor kernel microbenchmark (order 3, n=6, usec per call):")
    kr = bench_kernels(args.repeat)
    for label, usec in kr.items():
        print(f"  {label:8s} {usec:8.2f}")
    print(f"  speedup  {kr['python'] / kr['cython']:8.2f}x")

    print("Full jet of the product-of-spheres immersion (usec per point):")
    mr = bench_maps()
    for label, usec in mr.items():
        print(f"  {label:8s} {usec:8.1f}")
    print(f"  speedup  {mr['python'] / mr['cython']:8.2f}x")


if __name__ == "__main__":
    main()
