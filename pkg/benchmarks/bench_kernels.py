"""Compiled vs pure-Python amplitude kernel: wall time and agreement.

Run with ``python benchmarks/bench_kernels.py``.  Exits nonzero if the
compiled extension is not built.
"""
import sys
import timeit

from xyotto import dynamics
from xyotto._backend import integrate_block_ext, integrate_block_py
from xyotto.model import ModelParams

CASES = [
    # (Jx, Jy, h1, h2, tau)
    (10.0, 2.0, 4.0, 1.0, 0.1),
    (10.0, 2.0, 4.0, 1.0, 2.0),
    (10.0, 2.0, 4.0, 1.0, 50.0),
    (0.01, 2.0, 4.0, 1.0, 10.0),
    (10.0, 1.6, 4.0, 1.0, 20.0),
]


def best_of(fn, repeat=5):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.Timer(fn).repeat(repeat, n)) / n


def main():
    if integrate_block_ext is None:
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'params':<34}{'steps':>7}{'python ms':>12}{'cython ms':>12}{'speedup':>9}{'|dP|':>10}")
    for jx, jy, h1, h2, tau in CASES:
        p = ModelParams(jx, jy, h1, h2)
        s = dynamics.FieldSchedule(h1, h2, tau)
        a = dynamics.integrate_amplitudes(p, s, kernel=integrate_block_py)
        b = dynamics.integrate_amplitudes(p, s, kernel=integrate_block_ext)
        t_py = best_of(lambda: dynamics.integrate_amplitudes(p, s, kernel=integrate_block_py), 3)
        t_ext = best_of(lambda: dynamics.integrate_amplitudes(p, s, kernel=integrate_block_ext))
        label = f"Jx={jx:g} Jy={jy:g} tau={tau:g}"
        print(f"{label:<34}{b.steps:>7}{t_py * 1e3:>12.3f}{t_ext * 1e3:>12.3f}"
              f"{t_py / t_ext:>8.0f}x{abs(a.p1 - b.p1):>10.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
