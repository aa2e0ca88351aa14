"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --n 100 200 400 --repeat 5

Each kernel is run once per backend before timing so numba compilation is
excluded. Results of the two paths are compared as a sanity check.
"""

import argparse
import time

import numpy as np

from rdream import _accel
from rdream._kernels import opg_gradients, pair_sums, weight_matrix


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, rng):
    z1 = rng.standard_normal((n, 1))
    z2 = rng.standard_normal((n, 2))
    u = rng.uniform(-0.5, 0.5, n)
    v = np.ones(n)
    x = rng.standard_normal((n, 8))
    y = x.sum(axis=1) + rng.standard_normal(n)
    h0 = np.sqrt(7) * 2.34 * n ** (-1 / 14)
    return {
        "pair_sums q=1": lambda: pair_sums(z1, 0.5 * n ** -0.2, u, v),
        "pair_sums q=2": lambda: pair_sums(z2, 0.5 * n ** (-1 / 6), u, v),
        "weight_matrix q=1": lambda: weight_matrix(z1, 0.5 * n ** -0.2),
        "opg_gradients p=8": lambda: opg_gradients(x, x, y, h0)[0],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba not installed; only the numpy path is available")
        return
    print(f"{'kernel':<20}{'n':>6}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in args.n:
        jobs = cases(n, np.random.default_rng(args.seed))
        for name, fn in jobs.items():
            out, ms = {}, {}
            for b in ("numpy", "numba"):
                _accel.set_backend(b)
                out[b] = fn()
                ms[b] = 1e3 * best_of(fn, args.repeat)
            _accel.set_backend("numba")
            if not np.allclose(np.asarray(out["numpy"]), np.asarray(out["numba"]), rtol=1e-9, atol=1e-12):
                print(f"  warning: {name} differs between backends at n={n}")
            print(f"{name:<20}{n:>6}{ms['numpy']:>12.2f}{ms['numba']:>12.2f}{ms['numpy'] / ms['numba']:>10.1f}")


if __name__ == "__main__":
    main()
