"""Compiled vs pure-Python kernels, and banded vs single-grid products.

Run: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from diomhd import _kernels_py
from diomhd.mhd import rhs_array
from diomhd.random_fields import random_state
from diomhd.spectral import get_lattice

try:
    from diomhd import _kernels as _compiled
except ImportError:
    _compiled = None


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def row(name, t_py, t_c):
    if t_c is None:
        print(f"{name:34s} python {t_py * 1e3:9.3f} ms   compiled n/a")
    else:
        print(f"{name:34s} python {t_py * 1e3:9.3f} ms   compiled {t_c * 1e3:9.3f} ms   x{t_py / t_c:6.1f}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    phi = (1 + 5**0.5) / 2

    for n in (64 * 64, 256 * 256):
        w = rng.uniform(0, 1, n) * 10.0 ** rng.integers(0, 30, n)
        v = rng.uniform(0, 1, n)
        t_py = best(lambda: _kernels_py.compensated_dot(w, v), args.repeat)
        t_c = best(lambda: _compiled.compensated_dot(w, v), args.repeat) if _compiled else None
        row(f"compensated_dot n={n}", t_py, t_c)

    for K in (100, 500, 1000):
        t_py = best(lambda: _kernels_py.diophantine_scan(1.0, phi, 2.0, K), args.repeat)
        t_c = best(lambda: _compiled.diophantine_scan(1.0, phi, 2.0, K), args.repeat) if _compiled else None
        row(f"diophantine_scan K={K}", t_py, t_c)

    for M in (32, 64):
        lat = get_lattice(M)
        y = random_state(lat, 0).as_array()
        t_b = best(lambda: rhs_array(lat, y, (1.0, phi), banded=True), args.repeat)
        t_p = best(lambda: rhs_array(lat, y, (1.0, phi), banded=False), args.repeat)
        print(f"{'rhs M=' + str(M):34s} padded {t_p * 1e3:9.3f} ms   banded   {t_b * 1e3:9.3f} ms   x{t_b / t_p:6.1f} cost")


if __name__ == "__main__":
    main()
