"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Results from both paths are compared before any timing is reported.
"""

import argparse
import math
import time

import numpy as np

from folkreg import _kernels as K
from folkreg.turan import max_kp_free_oracle


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def scan_case(a, b, seed):
    rng = np.random.default_rng(seed)
    adj = rng.random((a, b)) < 0.5
    D = math.lcm(*range(1, a + 1)) * math.lcm(*range(1, b + 1))
    return adj, int(adj.sum()), D, 1, 10


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        print("numba unavailable (or FOLKREG_DISABLE_NUMBA set); nothing to compare")
        return

    rows = []
    for a in (8, 10, 12, 14):
        case = scan_case(a, a, a)
        K.gray_scan_numba(*case)  # compile outside the timing
        tn, rn = best_of(lambda: K.gray_scan_numba(*case), args.repeat)
        tp, rp = best_of(lambda: K.gray_scan_numpy(*case), args.repeat)
        assert tuple(rn) == tuple(rp), (a, rn, rp)
        rows.append((f"gray_scan {a}x{a}", tn, tp))

    for n, k in ((200, 8), (600, 16), (1200, 32)):
        rng = np.random.default_rng(n)
        upper = np.triu(rng.random((n, n)) < 0.5, 1)
        adj = upper | upper.T
        labels = rng.integers(-1, k, n).astype(np.int64)
        K.class_pair_counts_numba(adj, labels, k)
        tn, rn = best_of(lambda: K.class_pair_counts_numba(adj, labels, k), args.repeat)
        tp, rp = best_of(lambda: K.class_pair_counts_numpy(adj, labels, k), args.repeat)
        assert (rn == rp).all()
        rows.append((f"class_pair_counts n={n} k={k}", tn, tp))

    for p, k in ((3, 2), (4, 2)):
        orig = K.kp_free_max
        tn, rn = best_of(lambda: max_kp_free_oracle(p, k), args.repeat)
        K.kp_free_max = K.kp_free_max_numpy
        try:
            tp, rp = best_of(lambda: max_kp_free_oracle(p, k), args.repeat)
        finally:
            K.kp_free_max = orig
        assert rn == rp
        rows.append((f"kp_free oracle p={p} k={k}", tn, tp))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba s':>10}  {'numpy s':>10}  {'ratio':>7}")
    for name, tn, tp in rows:
        print(f"{name:<{width}}  {tn:>10.5f}  {tp:>10.5f}  {tp / tn:>7.1f}")


if __name__ == "__main__":
    main()
