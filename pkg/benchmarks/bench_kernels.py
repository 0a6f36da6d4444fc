"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best wall time of several repeats for both backends,
their speed ratio and the largest relative disagreement between them.
"""
import argparse
import timeit

import numpy as np

from wptrace import _pykernels as py
from wptrace import graphlab

try:
    from wptrace import _ckernels as cy
except ImportError:
    cy = None


def _cases(rng):
    theta = rng.uniform(-4, 4, (2000, 8))
    s = rng.uniform(-4, 4, (2000, 8))
    G = graphlab.random_regular(1000, 3, seed=0)
    indptr, indices = G.csr()
    f, g = rng.normal(size=8001), rng.normal(size=8001)
    return {
        "expansion r=8, 2000 points": lambda k: k.expansion(theta, s),
        "trace_half r=8, 2000 points": lambda k: k.trace_half(theta, s),
        "nb traces n=1000 d=3 l<=12": lambda k: k.nb_closed_walk_traces(indptr, indices, 12),
        "trapz_convolve 8001 samples": lambda k: k.trapz_convolve(f, g, 1e-3),
    }


def _disagreement(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':32s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max rel diff':>13s}")
    for name, fn in _cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        if cy is None:
            print(f"{name:32s} {t_py:11.4f} {'-':>11s} {'-':>8s} {'-':>13s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        diff = _disagreement(fn(cy), fn(py))
        print(f"{name:32s} {t_py:11.4f} {t_cy:11.4f} {t_py / t_cy:8.1f} {diff:13.1e}")


if __name__ == "__main__":
    main()
