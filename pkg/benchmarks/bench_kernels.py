"""Compare the numba and numpy GF(2^w) kernels on scheme-sized workloads.

    python benchmarks/bench_kernels.py [--symbols 4096] [--repeat 5]
"""

import argparse
import time

import numpy as np

from pcd2d import _kernels
from pcd2d.mds import build_generator


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--symbols", type=int, default=4096, help="symbols per subfile")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba unavailable or disabled; only the numpy path can run")

    rng = np.random.default_rng(0)
    cases = []
    for k, n in ((48, 60), (120, 180), (300, 420)):
        code = build_generator(k, n)
        exp, log = code.field.tables()
        X = rng.integers(0, code.field.order, size=(k, args.symbols))
        sub = code.generator[:, n - k:]
        cases.append((f"encode [{n},{k}] x{args.symbols}", lambda u, G=code.generator.T, X=X, e=exp, l=log:
                      _kernels.matmul(G, X, e, l, use_numba=u)))
        cases.append((f"inverse {k}x{k} GF({code.field.order})",
                      lambda u, A=sub, e=exp, l=log, q=code.field.order: _kernels.inverse(A, e, l, q, use_numba=u)))

    print(f"{'kernel':<34}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, fn in cases:
        t_np, ref = best_of(lambda: fn(False), args.repeat)
        if _kernels.HAS_NUMBA:
            fn(True)  # compile
            t_nb, out = best_of(lambda: fn(True), args.repeat)
            assert np.array_equal(ref, out), name
            print(f"{name:<34}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<34}{t_np:>12.4f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
