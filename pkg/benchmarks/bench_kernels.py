"""Time the numba and numpy kernel backends side by side.

    python3 benchmarks/bench_kernels.py --sizes 100000 1000000 --repeats 5
"""

import argparse
import time

import numpy as np

from pharma_bertrand import _kernels


def param_table(rng, n):
    theta = rng.uniform(0.01, 0.7, n)
    alpha = rng.uniform((1 + theta) / 2 + 0.01, 0.99)
    return np.column_stack([
        alpha, theta, rng.uniform(0.01, 1, n), rng.uniform(0, 200, n),
        rng.uniform(119, 231, n), rng.uniform(49, 231, n), rng.uniform(49, 231, n),
        rng.uniform(0, 200, n), rng.uniform(0, 200, n),
    ])


def best_of(f, repeats):
    f()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        f()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10**5, 10**6])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    slopes, costs, offered = (0.9, 1.0, 0.6), (0.323, 0.34, 0.152), (True, True, True)
    print(f"{'kernel':<18}{'n':>10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}  same")
    for n in args.sizes:
        table = param_table(rng, n)
        v = rng.random(n)
        cases = {
            "closed_form_batch": (lambda b: _kernels.closed_form_batch(table, backend=b),
                                  lambda x, y: np.allclose(x, y, rtol=1e-13, atol=0)),
            "count_choices": (lambda b: _kernels.count_choices(v, slopes, costs, offered, backend=b),
                              np.array_equal),
        }
        for name, (f, same) in cases.items():
            t_np = best_of(lambda: f("numpy"), args.repeats)
            t_nb = best_of(lambda: f("numba"), args.repeats)
            agree = same(f("numpy"), f("numba"))
            print(f"{name:<18}{n:>10}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
