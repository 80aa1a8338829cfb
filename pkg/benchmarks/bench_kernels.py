"""Compare the compiled and numpy kernels on projection sweeps and hook walks.

    python benchmarks/bench_kernels.py [--grid 64] [--square 40] [--repeat 5]

Both backends are run on identical inputs; the script also checks that the
outputs agree bit for bit.
"""
import argparse
import time

import numpy as np

from bead_atlas import _kernels_py
from bead_atlas.shapes import boundary_from_profile, square_profile
from bead_atlas.solver.grid import apply_boundary

try:
    from bead_atlas import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_projection(mod, n, sweeps, repeat):
    b = boundary_from_profile(square_profile(8))
    rng = np.random.default_rng(0)
    x0 = apply_boundary(rng.normal(0, 0.3, (n + 1, n + 1)), b)
    wx = np.ones(n + 1)
    wx[[0, -1]] = 0
    wy = wx.copy()

    def run():
        x = x0.copy()
        mx = np.zeros((n, n + 1))
        my = np.zeros((n + 1, n))
        for _ in range(sweeps):
            mod.project_sweep(x, mx, my, wx, wy, 0.5 / n)
        return x

    return _best(run, repeat)


def bench_hook(mod, k, walks, repeat):
    N = k * k
    u = np.random.default_rng(1).random(8 * N + 16)

    def run():
        res = []
        for _ in range(walks):
            rows = np.full(k, k, dtype=np.int64)
            r = np.zeros(N, dtype=np.int64)
            c = np.zeros(N, dtype=np.int64)
            mod.hook_walk(rows, u, r, c)
            res.append(r)
        return np.array(res)

    return _best(run, repeat)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--sweeps", type=int, default=200)
    ap.add_argument("--square", type=int, default=40)
    ap.add_argument("--walks", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    mods = [("python", _kernels_py)] + ([("cython", _kernels_c)] if _kernels_c else [])
    print(f"{'kernel':<26s}{'backend':<10s}{'seconds':>10s}")
    for label, fn, args in ((f"projection {a.grid}^2 x{a.sweeps}", bench_projection, (a.grid, a.sweeps, a.repeat)),
                            (f"hook walk {a.square}x{a.square} x{a.walks}", bench_hook, (a.square, a.walks, a.repeat))):
        outs = []
        for name, mod in mods:
            t, out = fn(mod, *args)
            outs.append(out)
            print(f"{label:<26s}{name:<10s}{t:>10.4f}")
        if len(outs) == 2:
            print(f"{'':<26s}{'identical':<10s}{str(bool(np.array_equal(outs[0], outs[1]))):>10s}")
    if _kernels_c is None:
        print("compiled extension not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
