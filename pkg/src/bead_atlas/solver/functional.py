"""Discrete entropy functional on grid height fields.

Each cell carries one horizontal slope s (mean of its bottom and top edge
differences) and two vertical slopes t_L, t_R (its left and right edges).  The
cell contributes area * (ent(s, t_L) + ent(s, t_R)) / 2.  This pairing is
concave in the node values, reflection symmetric and has no checkerboard
null space.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..entropy import PI, ent
from .grid import GridHeightField

T_FLOOR = 1e-8


def cell_slopes(v: np.ndarray, dx: float, dy: float):
    ex = np.diff(v, axis=0) / dx
    ey = np.diff(v, axis=1) / dy
    s = 0.5 * (ex[:, :-1] + ex[:, 1:])
    return s, ey[:-1, :], ey[1:, :]


def ent_functional(f: GridHeightField) -> float:
    s, tl, tr = cell_slopes(f.values, f.dx, f.dy)
    w = 0.5 * f.dx * f.dy
    return float(w * (np.sum(ent(s, tl)) + np.sum(ent(s, tr))))


def objective_and_gradient(v: np.ndarray, dx: float, dy: float, t_floor: float = T_FLOOR):
    """Objective and its gradient w.r.t. node values (boundary entries zeroed).

    The gradient clamps t at t_floor; cos(pi s) is floored at the smallest
    normal double so saturated cells push t down hard instead of producing nan.
    """
    s, tl, tr = cell_slopes(v, dx, dy)
    w = 0.5 * dx * dy
    F = w * (np.sum(ent(s, tl)) + np.sum(ent(s, tr)))
    c = np.maximum(np.cos(PI * s), np.finfo(float).tiny)
    tn = np.tan(PI * np.clip(s, -0.5 + 1e-9, 0.5 - 1e-9))
    tlc = np.maximum(tl, t_floor)
    trc = np.maximum(tr, t_floor)
    gs = -w * PI * (tlc + trc) * tn
    gtl = w * np.log(c / (PI * tlc))
    gtr = w * np.log(c / (PI * trc))
    gex = np.zeros((v.shape[0] - 1, v.shape[1]))
    gex[:, :-1] += 0.5 * gs
    gex[:, 1:] += 0.5 * gs
    gey = np.zeros((v.shape[0], v.shape[1] - 1))
    gey[:-1, :] += gtl
    gey[1:, :] += gtr
    gex /= dx
    gey /= dy
    g = np.zeros_like(v)
    g[1:, :] += gex
    g[:-1, :] -= gex
    g[:, 1:] += gey
    g[:, :-1] -= gey
    g[0, :] = g[-1, :] = 0.0
    g[:, 0] = g[:, -1] = 0.0
    return float(F), g


class SparseOperators:
    """Linear maps from node values to edge/cell slopes, for Newton steps."""

    def __init__(self, nx: int, ny: int):
        self.nx, self.ny = nx, ny
        dx, dy = 1.0 / nx, 1.0 / ny
        N = (nx + 1) * (ny + 1)
        idx = np.arange(N).reshape(nx + 1, ny + 1)

        def diff(a, b, scale):
            m = a.size
            r = np.arange(m)
            data = np.r_[np.full(m, scale), np.full(m, -scale)]
            return sp.csr_matrix((data, (np.r_[r, r], np.r_[b.ravel(), a.ravel()])), shape=(m, N))

        self.EX = diff(idx[:-1, :], idx[1:, :], 1.0 / dx)
        self.EY = diff(idx[:, :-1], idx[:, 1:], 1.0 / dy)
        exid = np.arange(nx * (ny + 1)).reshape(nx, ny + 1)
        eyid = np.arange((nx + 1) * ny).reshape(nx + 1, ny)
        C = nx * ny
        r = np.arange(C)
        avg = sp.csr_matrix((np.full(2 * C, 0.5), (np.r_[r, r], np.r_[exid[:, :-1].ravel(), exid[:, 1:].ravel()])),
                            shape=(C, self.EX.shape[0]))
        pick_l = sp.csr_matrix((np.ones(C), (r, eyid[:-1, :].ravel())), shape=(C, self.EY.shape[0]))
        pick_r = sp.csr_matrix((np.ones(C), (r, eyid[1:, :].ravel())), shape=(C, self.EY.shape[0]))
        self.S = (avg @ self.EX).tocsr()
        self.TL = (pick_l @ self.EY).tocsr()
        self.TR = (pick_r @ self.EY).tocsr()
        free = np.zeros((nx + 1, ny + 1), bool)
        free[1:-1, 1:-1] = True
        self.free = np.nonzero(free.ravel())[0]
        self.w = 0.5 * dx * dy
