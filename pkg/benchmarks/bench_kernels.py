"""Time the numpy and numba flavours of each hot kernel.

    python benchmarks/bench_kernels.py [--pairs 100000] [--taus 65] [--grid 257] [--repeat 5]

JIT compilation is done once before timing and reported separately.
"""

import argparse
import time

import numpy as np

from homsim import _kernels, fock


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--pairs", type=int, default=100_000)
    ap.add_argument("--taus", type=int, default=65)
    ap.add_argument("--grid", type=int, default=257)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    key = _kernels.stream_key(7, 0)
    delta_f = np.random.default_rng(0).normal(size=args.pairs)
    taus = np.linspace(0.0, 4.0, args.taus)
    grid = fock.FrequencyGrid.covering(1.0, n_points=args.grid)
    state = fock.make_product_state(grid, 1.0, ridge_width=0.25)
    kernel = state._kernel()

    cases = {
        "counter_uniforms": (
            lambda: _kernels.counter_uniforms_numpy(key, 0, args.pairs),
            lambda: _kernels.counter_uniforms_numba(key, 0, args.pairs),
        ),
        "coincidence_moments": (
            lambda: _kernels.coincidence_moments_numpy(delta_f, taus, True, 2),
            lambda: _kernels.coincidence_moments_numba(delta_f, taus, True, 2),
        ),
        "exchange_overlap": (
            lambda: _kernels.exchange_overlap_numpy(kernel, grid.points, taus),
            lambda: _kernels.exchange_overlap_numba(kernel, grid.points, taus),
        ),
    }

    print(f"pairs={args.pairs} taus={args.taus} grid={args.grid} repeat={args.repeat}")
    print(f"{'kernel':<22}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'jit [s]':>10}{'max |diff|':>13}")
    for name, (np_fn, nb_fn) in cases.items():
        if not _kernels.HAVE_NUMBA:
            t_np = best_of(np_fn, args.repeat)
            print(f"{name:<22}{t_np:>12.4f}{'n/a':>12}")
            continue
        t0 = time.perf_counter()
        nb_out = nb_fn()
        jit = time.perf_counter() - t0
        np_out = np_fn()
        if isinstance(np_out, tuple):
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(np_out, nb_out))
        else:
            diff = float(np.max(np.abs(np_out - nb_out)))
        t_np = best_of(np_fn, args.repeat)
        t_nb = best_of(nb_fn, args.repeat)
        print(f"{name:<22}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{jit:>10.3f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
