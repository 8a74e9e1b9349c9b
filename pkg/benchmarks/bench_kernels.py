"""Compiled vs pure-Python kernels on realistic inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from sigsub import kernels
from sigsub.graph import edge_endpoints
from sigsub.simulate import HomogeneousModelSpec, sample_homogeneous
from sigsub.stats import score_from_pvalue


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled extension not built; only the Python backend is available")

    print(f"{'case':<34}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for V, n in ((70, 100), (70, 1000), (200, 400)):
        spec = HomogeneousModelSpec(V, 1, 20, 0.5, 0.1, 0.3)
        ds, _ = sample_homogeneous(spec, n, "conditioned", seed=1)
        k0, k1 = ds.class_counts()
        us, vs = edge_endpoints(V)
        p = kernels.fisher_pvalues(k0, k1, ds.n0, ds.n1, backend="python")
        scores = score_from_pvalue(p)
        cases = {
            f"fisher V={V} n={n}":
                lambda b: kernels.fisher_pvalues(k0, k1, ds.n0, ds.n1, backend=b),
            f"coherent V={V} n={n} m=1 s=20":
                lambda b: kernels.coherent_threshold(us, vs, scores, V, 1, 20, backend=b),
            f"coherent V={V} n={n} m=10 s=500":
                lambda b: kernels.coherent_threshold(us, vs, scores, V, 10, 500, backend=b),
        }
        for name, fn in cases.items():
            tp = best_of(lambda: fn("python"), args.repeat)
            if kernels.BACKEND == "cython":
                tc = best_of(lambda: fn("cython"), args.repeat)
                print(f"{name:<34}{tp * 1e3:>12.3f}{tc * 1e3:>12.3f}{tp / tc:>10.1f}")
            else:
                print(f"{name:<34}{tp * 1e3:>12.3f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
