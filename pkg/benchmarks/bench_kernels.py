"""Compare the compiled and NumPy displacement kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--points 100000] [--cutoff 20] [--repeat 3]

The workload is the single-mode grid reconstruction inner loop: a weighted
sum of displacement matrices, followed by a batch of traces.
"""
import argparse
import time

import numpy as np

from bosonic_dilation import kernels


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--cutoff", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    alphas = 3 * (rng.normal(size=args.points) + 1j * rng.normal(size=args.points))
    weights = rng.normal(size=args.points).astype(complex)
    T = rng.normal(size=(args.cutoff, args.cutoff)) + 0j

    results = {}
    for name, impl in sorted(kernels.BACKENDS.items()):
        t_acc, acc = _best(lambda: impl.accumulate_displacements(alphas, weights, args.cutoff), args.repeat)
        t_tr, tr = _best(lambda: impl.displacement_traces(T, alphas), args.repeat)
        results[name] = (t_acc, t_tr, acc, tr)
        print(f"{name:>7}: accumulate {t_acc:7.3f}s   traces {t_tr:7.3f}s")

    if len(results) == 2:
        (_, _, a1, t1), (_, _, a2, t2) = results["cython"], results["python"]
        print(f"speedup: accumulate x{results['python'][0] / results['cython'][0]:.2f}, "
              f"traces x{results['python'][1] / results['cython'][1]:.2f}")
        print(f"max difference: accumulate {np.max(np.abs(a1 - a2)):.2e}, traces {np.max(np.abs(t1 - t2)):.2e}")
    else:
        print("compiled extension not available; only the NumPy backend was timed")


if __name__ == "__main__":
    main()
