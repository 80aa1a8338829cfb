# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: projection sweeps and the hook walk.

Semantics match _kernels_py exactly (same update order, same uniform usage).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def project_sweep(double[:, ::1] x, double[:, ::1] mx, double[:, ::1] my,
                  double[::1] wx, double[::1] wy, double c):
    """One red-black Hildreth sweep over slab and monotone constraints.

    x is (nx+1, ny+1); mx holds slab multipliers of x-edges (nx, ny+1), my the
    monotone multipliers of y-edges (nx+1, ny).  wx[i], wy[j] are 0 for fixed
    boundary columns/rows and 1 otherwise.  Returns the largest node movement.
    """
    cdef Py_ssize_t nx1 = x.shape[0], ny1 = x.shape[1]
    cdef Py_ssize_t i, j, par
    cdef double wa, wb, ws, a, b, mu, d0, nm, delta, mv = 0.0, dm
    for par in range(2):
        for i in range(par, nx1 - 1, 2):
            wa = wx[i]
            wb = wx[i + 1]
            ws = wa + wb
            if ws == 0.0:
                continue
            for j in range(1, ny1 - 1):
                a = x[i, j]
                b = x[i + 1, j]
                mu = mx[i, j]
                d0 = (b + mu * wb) - (a - mu * wa)
                if d0 > c:
                    nm = (d0 - c) / ws
                elif d0 < -c:
                    nm = (d0 + c) / ws
                else:
                    nm = 0.0
                delta = nm - mu
                x[i, j] = a + delta * wa
                x[i + 1, j] = b - delta * wb
                mx[i, j] = nm
                dm = fabs(delta)
                if dm > mv:
                    mv = dm
    for par in range(2):
        for i in range(1, nx1 - 1):
            for j in range(par, ny1 - 1, 2):
                wa = wy[j]
                wb = wy[j + 1]
                ws = wa + wb
                if ws == 0.0:
                    continue
                a = x[i, j]
                b = x[i, j + 1]
                mu = my[i, j]
                d0 = (b + mu * wb) - (a - mu * wa)
                if d0 < 0.0:
                    nm = d0 / ws
                else:
                    nm = 0.0
                delta = nm - mu
                x[i, j] = a + delta * wa
                x[i, j + 1] = b - delta * wb
                my[i, j] = nm
                dm = fabs(delta)
                if dm > mv:
                    mv = dm
    return mv


def hook_walk(cnp.int64_t[::1] rows, double[::1] u,
              cnp.int64_t[::1] out_r, cnp.int64_t[::1] out_c):
    """Greene-Nijenhuis-Wilf hook walk on a straight shape.

    rows is consumed (row lengths shrink to zero).  out_r/out_c receive the
    corner removed when entry N, N-1, ..., 1 is placed.  Returns the number of
    uniforms used, or -1 if u ran out.
    """
    cdef Py_ssize_t nrows = rows.shape[0], ncols = 0, k, r, c, arm, leg, step
    cdef Py_ssize_t used = 0, nu = u.shape[0], remaining = 0, pick
    for r in range(nrows):
        remaining += rows[r]
    if nrows > 0:
        ncols = rows[0]
    cdef cnp.int64_t[::1] cols = np.zeros(ncols, dtype=np.int64)
    for r in range(nrows):
        for c in range(rows[r]):
            cols[c] += 1
    k = remaining
    while remaining > 0:
        if used >= nu:
            return -1
        pick = <Py_ssize_t>(u[used] * remaining)
        used += 1
        if pick >= remaining:
            pick = remaining - 1
        r = 0
        while pick >= rows[r]:
            pick -= rows[r]
            r += 1
        c = pick
        while True:
            arm = rows[r] - c - 1
            leg = cols[c] - r - 1
            if arm + leg == 0:
                break
            if used >= nu:
                return -1
            step = <Py_ssize_t>(u[used] * (arm + leg))
            used += 1
            if step >= arm + leg:
                step = arm + leg - 1
            if step < arm:
                c += step + 1
            else:
                r += step - arm + 1
        k -= 1
        out_r[k] = r
        out_c[k] = c
        rows[r] -= 1
        cols[c] -= 1
        remaining -= 1
    return used
