"""Compare the compiled and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 12,16,20,24] [--repeat 5]

Each kernel runs ``repeat`` times per size; the best wall time is reported.
Both backends must produce identical results, which is checked before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from dtqc import _kernels_py

try:
    from dtqc import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None


def cases(impl, n):
    states = impl.enumerate_constrained(n)
    half = n // 2
    return {
        "enumerate": lambda: impl.enumerate_constrained(n),
        "pxp_coo": lambda: impl.pxp_coo(states, n, half, 1.0, 1.618),
        "occupations": lambda: impl.occupations(states, n),
        "region_counts": lambda: impl.region_counts(states, 0, half),
    }


def check_agreement(n):
    a, b = _kernels_py, _compiled
    sa, sb = a.enumerate_constrained(n), b.enumerate_constrained(n)
    assert np.array_equal(sa, sb)
    for x, y in zip(a.pxp_coo(sa, n, n // 2, 1.0, 1.618), b.pxp_coo(sb, n, n // 2, 1.0, 1.618)):
        assert np.array_equal(np.asarray(x), np.asarray(y))
    assert np.array_equal(a.occupations(sa, n), b.occupations(sb, n))
    assert np.array_equal(a.region_counts(sa, 0, n // 2), b.region_counts(sb, 0, n // 2))


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="12,16,20,24")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    if _compiled is None:
        print("compiled extension not built; only the numpy backend is available")
    print(f"{'N':>3} {'dim':>7} {'kernel':<14} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in sizes:
        if _compiled is not None:
            check_agreement(n)
        dim = len(_kernels_py.enumerate_constrained(n))
        py = cases(_kernels_py, n)
        cy = cases(_compiled, n) if _compiled is not None else {}
        for name, fn in py.items():
            t_py = best(fn, args.repeat) * 1e3
            if name in cy:
                t_cy = best(cy[name], args.repeat) * 1e3
                print(f"{n:>3} {dim:>7} {name:<14} {t_py:>10.3f} {t_cy:>10.3f} {t_py / t_cy:>7.1f}x")
            else:
                print(f"{n:>3} {dim:>7} {name:<14} {t_py:>10.3f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
