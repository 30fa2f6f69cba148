"""Time the compiled graph kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py --sizes 200 1000 4000 --dim 2 --repeat 5
"""
import argparse
import timeit

import numpy as np

from monocalc import _kernels_py

try:
    from monocalc import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _monotone_sample(m, dim, rng):
    ys = rng.normal(size=(m, dim))
    return ys, ys + 0.1 * np.sign(ys)


def bench(m, dim, repeat, rng):
    ys, yss = _monotone_sample(m, dim, rng)
    X = rng.normal(size=(m, dim))
    XS = rng.normal(size=(m, dim))
    cases = {
        "min_pairwise_gap": lambda mod: mod.min_pairwise_gap(ys, yss),
        "min_gap_many": lambda mod: mod.min_gap_many(ys, yss, X, XS),
        "fitz_max_many": lambda mod: mod.fitz_max_many(ys, yss, X, XS),
    }
    rows = []
    for name, call in cases.items():
        t_py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=repeat))
        if _ckernels is None:
            rows.append((name, m, t_py, np.nan))
            continue
        t_c = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=repeat))
        a, b = np.asarray(call(_kernels_py)), np.asarray(call(_ckernels))
        if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
            raise AssertionError(f"{name}: backends disagree")
        rows.append((name, m, t_py, t_c))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 1000, 4000])
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18}{'m':>7}{'numpy [ms]':>13}{'cython [ms]':>13}{'speedup':>9}")
    for m in args.sizes:
        for name, size, t_py, t_c in bench(m, args.dim, args.repeat, rng):
            print(f"{name:<18}{size:>7}{1e3 * t_py:>13.3f}{1e3 * t_c:>13.3f}{t_py / t_c:>9.1f}")


if __name__ == "__main__":
    main()
