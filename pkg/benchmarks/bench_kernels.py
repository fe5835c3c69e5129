"""Time the compiled kernels against the numpy fallback, and the full
per-replicate pipeline.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from khmgof import _kernels_py, kernels
from khmgof.families import Normal
from khmgof.harness import ExperimentConfig, replicate_statistics, sample_model
from khmgof.regression import compute_residuals, estimated_empirical_process
from khmgof.transform import scale_transform_path, transform_path

try:
    from khmgof import _ckernels
except ImportError:
    _ckernels = None


def _inputs(rng):
    n = 2000
    counts = np.ones(n)
    H, G = rng.normal(size=(n, 2)), rng.normal(size=(n, 2))
    x = np.sort(rng.uniform(0, 2, n))
    y = rng.normal(size=n)
    vals, left = rng.normal(size=n), rng.normal(size=n)
    grid = 10**6
    inc = rng.normal(size=grid) / np.sqrt(grid)
    keeps = np.array([990_000, 999_000, 999_900])
    return {
        "transform_sums (n=2000)": lambda m: m.transform_sums(counts, H, G),
        "boxcar_smooth (n=2000)": lambda m: m.boxcar_smooth(x, y, 0.04),
        "path_abs_max (n=2000)": lambda m: m.path_abs_max(vals, left),
        "bridge_ratio_integral (1e6 steps)": lambda m: m.bridge_ratio_integral(inc, 1.0 / grid, keeps),
    }


def _best(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.2 and number < 10**5:
        number *= 10
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)

    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':36s}{'numpy [ms]':>12s}{'cython [ms]':>13s}{'speedup':>9s}")
    for name, call in _inputs(rng).items():
        t_py = _best(lambda: call(_kernels_py), args.repeat)
        if _ckernels is None:
            print(f"{name:36s}{1e3 * t_py:12.3f}{'-':>13s}{'-':>9s}")
            continue
        t_c = _best(lambda: call(_ckernels), args.repeat)
        print(f"{name:36s}{1e3 * t_py:12.3f}{1e3 * t_c:13.3f}{t_py / t_c:9.1f}")

    fam = Normal()
    cfg = ExperimentConfig(n=200, reps=1)
    print()
    print(f"{'pipeline (n=200, a=0.04)':36s}{'time [ms]':>12s}")
    res = compute_residuals(sample_model(cfg, 0), 0.04)
    steps = {
        "residuals": lambda: compute_residuals(sample_model(cfg, 0), 0.04),
        "v_hat path": lambda: estimated_empirical_process(res, fam),
        "w_n path": lambda: transform_path(res, fam),
        "w_tilde_n path": lambda: scale_transform_path(res, 1.0, fam),
        "one replicate (V, W)": lambda: replicate_statistics(cfg, 0, 0),
    }
    for name, fn in steps.items():
        print(f"{name:36s}{1e3 * _best(fn, args.repeat):12.3f}")


if __name__ == "__main__":
    main()
