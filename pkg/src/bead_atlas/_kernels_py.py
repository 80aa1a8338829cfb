"""Pure-Python/numpy versions of the compiled kernels.

Same update order and uniform consumption as _kernels.pyx, so both backends
give identical results.  Within one colour class the constraints touch
disjoint node pairs, which is what allows the vectorised form here.
"""
import numpy as np


def project_sweep(x, mx, my, wx, wy, c):
    nx1, ny1 = x.shape
    mv = 0.0
    for par in (0, 1):
        i = np.arange(par, nx1 - 1, 2)
        wa = wx[i][:, None]
        wb = wx[i + 1][:, None]
        ws = wa + wb
        keep = ws[:, 0] > 0
        i, wa, wb, ws = i[keep], wa[keep], wb[keep], ws[keep]
        if i.size == 0:
            continue
        a = x[i, 1:-1]
        b = x[i + 1, 1:-1]
        mu = mx[i, 1:-1]
        d0 = (b + mu * wb) - (a - mu * wa)
        nm = np.where(d0 > c, (d0 - c) / ws, np.where(d0 < -c, (d0 + c) / ws, 0.0))
        delta = nm - mu
        x[i, 1:-1] = a + delta * wa
        x[i + 1, 1:-1] = b - delta * wb
        mx[i, 1:-1] = nm
        mv = max(mv, float(np.abs(delta).max(initial=0.0)))
    for par in (0, 1):
        j = np.arange(par, ny1 - 1, 2)
        wa = wy[j][None, :]
        wb = wy[j + 1][None, :]
        ws = wa + wb
        keep = ws[0] > 0
        j, wa, wb, ws = j[keep], wa[:, keep], wb[:, keep], ws[:, keep]
        if j.size == 0:
            continue
        a = x[1:-1, j]
        b = x[1:-1, j + 1]
        mu = my[1:-1, j]
        d0 = (b + mu * wb) - (a - mu * wa)
        nm = np.where(d0 < 0, d0 / ws, 0.0)
        delta = nm - mu
        x[1:-1, j] = a + delta * wa
        x[1:-1, j + 1] = b - delta * wb
        my[1:-1, j] = nm
        mv = max(mv, float(np.abs(delta).max(initial=0.0)))
    return mv


def hook_walk(rows, u, out_r, out_c):
    rows_l = [int(v) for v in rows]
    nrows = len(rows_l)
    ncols = rows_l[0] if nrows else 0
    cols = [0] * ncols
    for lr in rows_l:
        for c in range(lr):
            cols[c] += 1
    remaining = sum(rows_l)
    k = remaining
    used = 0
    nu = len(u)
    while remaining > 0:
        if used >= nu:
            return -1
        pick = int(u[used] * remaining)
        used += 1
        if pick >= remaining:
            pick = remaining - 1
        r = 0
        while pick >= rows_l[r]:
            pick -= rows_l[r]
            r += 1
        c = pick
        while True:
            arm = rows_l[r] - c - 1
            leg = cols[c] - r - 1
            if arm + leg == 0:
                break
            if used >= nu:
                return -1
            step = int(u[used] * (arm + leg))
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
        rows_l[r] -= 1
        cols[c] -= 1
        remaining -= 1
    rows[:] = rows_l
    return used
