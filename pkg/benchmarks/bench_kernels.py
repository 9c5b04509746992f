"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--size 256] [--repeat 5]
"""

import argparse
import time

import numpy as np

from rhizome.kernels import get_backend


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sites", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.size
    passable = rng.random((n, n)) > 0.05
    c = rng.random((n, n))
    c[~passable] = 0.0
    free = np.argwhere(passable)
    seeds = free[rng.choice(len(free), args.sites, replace=False)][:, ::-1]
    labels = np.arange(args.sites)

    backends = {"python": get_backend("python")}
    try:
        backends["cython"] = get_backend("cython")
    except ImportError:
        print("compiled backend not built; timing the fallback only")

    results = {}
    for name, mod in backends.items():
        results[name] = (
            best_of(lambda: mod.diffuse(c, passable, 0.2, 0.01), args.repeat),
            best_of(lambda: mod.front_propagate(passable, seeds, labels, -1), args.repeat),
        )

    print(f"grid {n}x{n}, {args.sites} sites, best of {args.repeat}")
    print(f"{'backend':<8} {'diffuse (ms)':>13} {'front (ms)':>12}")
    for name, (d, f) in results.items():
        print(f"{name:<8} {d * 1e3:13.3f} {f * 1e3:12.1f}")
    if len(results) == 2:
        (pd, pf), (cd, cf) = results["python"], results["cython"]
        print(f"speed-up  {pd / cd:12.1f}x {pf / cf:11.1f}x")


if __name__ == "__main__":
    main()
