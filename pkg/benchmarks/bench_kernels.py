"""Time the compiled kernels against the NumPy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import timeit

import numpy as np

from eqmeasure import _kernels_py

try:
    from eqmeasure import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    z = np.linspace(-0.95, 0.95, 2000)
    c0, c1 = rng.standard_normal(200), rng.standard_normal(200)
    xf = np.array([-4.0, -2.0, -1.2, 1.2, 2.0, 4.0])
    xp = rng.uniform(-1.0, 1.0, 2000)
    return {
        "hyp2f1_series": lambda m: m.hyp2f1_series(0.3, -1.7, 2.2, z, 2000, 1e-16),
        "column_recurrence": lambda m: m.column_recurrence(c0, c1, 150, 0.3, 2.5, 0.0, 1.0),
        "miller_ratios": lambda m: m.miller_ratios(xf, 100, 400, 0.195, 1.61),
        "pairwise_force": lambda m: m.pairwise_force(xp, 4.0, 1.61),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = {"python": _kernels_py}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{'kernel':<20}" + "".join(f"{name:>14}" for name in backends) + ("     speedup" if _ckernels else ""))
    for name, fn in cases().items():
        times = {b: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for b, m in backends.items()}
        line = f"{name:<20}" + "".join(f"{t * 1e3:>11.2f} ms" for t in times.values())
        if _ckernels is not None:
            line += f"{times['python'] / times['cython']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
