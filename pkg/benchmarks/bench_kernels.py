"""Time the compiled and numpy exhaustive-search backends on the same inputs.

    python3 benchmarks/bench_kernels.py --n 16 --M 64 128 --k 2 3 --repeats 3
"""
import argparse
import math
import time

import numpy as np

from srlab import kernels
from srlab.approx import RANK_TOL, TIE_TOL
from srlab.dictionary import random_dictionary


def time_call(fn, args, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--M", type=int, nargs="+", default=[64, 128])
    p.add_argument("--k", type=int, nargs="+", default=[2, 3])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    backends = kernels.backends()
    names = sorted(backends)
    print(f"backends: {', '.join(names)} (default {kernels.BACKEND})")
    print(f"{'M':>6} {'k':>3} {'supports':>10} " + " ".join(f"{b + ' s':>12}" for b in names)
          + f" {'speedup':>8} {'same':>5}")
    y = np.random.default_rng(args.seed).standard_normal(args.n)
    for M in args.M:
        C = random_dictionary(args.n, M, args.seed)
        for k in args.k:
            call = (C.gram, C.atoms @ y, k, RANK_TOL, TIE_TOL * float(y @ y))
            res = {b: time_call(backends[b].exhaustive_search, call, args.repeats) for b in names}
            same = len({(tuple(s), e) for _, (s, e) in res.values()}) == 1
            speed = res["python"][0] / res["cython"][0] if "cython" in res else float("nan")
            print(f"{M:>6} {k:>3} {math.comb(M, k):>10} "
                  + " ".join(f"{res[b][0]:>12.4f}" for b in names) + f" {speed:>8.1f} {str(same):>5}")


if __name__ == "__main__":
    main()
