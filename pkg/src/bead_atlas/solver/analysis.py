"""Post-processing of solved fields and the closed-form square limit shape."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..entropy import PI
from ..shapes import DiagramProfile
from .grid import GridHeightField

T_LIQUID = 0.02
S_MARGIN = 0.02


# --- square oracle -----------------------------------------------------------

def _H(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    r = 1.0 - X * X - Y * Y
    q = np.sqrt(np.clip(r, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        inside = np.arctan2(Y, q) - X * np.arctan2(X * Y, q)
    frozen = np.where(Y > 0, PI / 2 * (1 - np.abs(X)), PI / 2 * (np.abs(X) - 1))
    return np.where(r >= 0, inside, frozen)


def square_oracle(x, y):
    """Closed-form limit shape of the square diagram, h0(x,y) = H(2x-1, 2y-1)/(2 pi)."""
    v = _H(2 * np.asarray(x, float) - 1, 2 * np.asarray(y, float) - 1) / (2 * PI)
    return v[()] if np.ndim(v) == 0 else v


def square_oracle_gradient(x, y):
    """Analytic (h_x, h_y) of the square oracle; frozen parts have t = 0, |s| = 1/2."""
    X = 2 * np.asarray(x, float) - 1
    Y = 2 * np.asarray(y, float) - 1
    r = 1.0 - X * X - Y * Y
    q = np.sqrt(np.clip(r, 1e-300, None))
    # dH/dX = -atan(XY/q), dH/dY = q/(1 - Y^2)
    with np.errstate(divide="ignore", invalid="ignore"):
        HX = -np.arctan2(X * Y, q)
        HY = q / np.clip(1 - Y * Y, 1e-300, None)
    HX = np.where(r >= 0, HX, np.where(Y > 0, -PI / 2 * np.sign(X), PI / 2 * np.sign(X)))
    HY = np.where(r >= 0, HY, 0.0)
    # h = H(2x-1, 2y-1)/(2 pi): chain factor 2/(2 pi) = 1/pi
    return HX / PI, HY / PI


def square_level_line_oracle(x, alpha):
    """z_alpha(x) = |x - 1/2| + 2 (h0(x, alpha) - h0(x, 0)) for the square."""
    x = np.asarray(x, float)
    return np.abs(x - 0.5) + 2 * (square_oracle(x, alpha) - square_oracle(x, 0.0))


# --- diagnostics -------------------------------------------------------------

@dataclass(frozen=True)
class ELResidual:
    field: np.ndarray   # residual at interior nodes, nan outside the liquid set
    median: float
    p95: float
    n_liquid: int


def euler_lagrange_residual(f: GridHeightField, t_liquid: float = T_LIQUID,
                            s_margin: float = S_MARGIN) -> ELResidual:
    """pi^2 (1 + tan^2(pi h_x)) h_y h_xx + h_yy / h_y + 2 pi h_xy tan(pi h_x) at interior nodes."""
    v = f.values
    dx, dy = f.dx, f.dy
    hx = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * dx)
    hy = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * dy)
    hxx = (v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / dx ** 2
    hyy = (v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]) / dy ** 2
    hxy = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4 * dx * dy)
    liquid = (hy > t_liquid) & (np.abs(hx) < 0.5 - s_margin)
    with np.errstate(divide="ignore", invalid="ignore"):
        tn = np.tan(PI * hx)
        res = PI ** 2 * (1 + tn ** 2) * hy * hxx + hyy / hy + 2 * PI * hxy * tn
    res = np.where(liquid, res, np.nan)
    vals = np.abs(res[liquid])
    if vals.size == 0:
        return ELResidual(res, float("nan"), float("nan"), 0)
    return ELResidual(res, float(np.median(vals)), float(np.percentile(vals, 95)), int(vals.size))


def density(f: GridHeightField) -> np.ndarray:
    """dh/dy at nodes: central differences inside, one-sided on the top/bottom rows."""
    return np.gradient(f.values, f.dy, axis=1, edge_order=1)


def _column_inverse(col: np.ndarray, y: np.ndarray, e: np.ndarray) -> np.ndarray:
    # inf{y : h(y) >= e} for a non-decreasing piecewise-linear column
    k = np.searchsorted(col, e, side="left")
    k = np.clip(k, 0, len(col) - 1)
    out = np.empty_like(e)
    for n, (kk, ee) in enumerate(zip(k, e)):
        if kk == 0 or col[kk] == col[kk - 1]:
            out[n] = y[kk]
        else:
            lam = (ee - col[kk - 1]) / (col[kk] - col[kk - 1])
            out[n] = y[kk - 1] + np.clip(lam, 0, 1) * (y[kk] - y[kk - 1])
    return out


def limit_surface(f: GridHeightField, p: DiagramProfile, nz: int = 201):
    """S(x, z) on the nodes x_i and nz heights per column between z_-(x), z_+(x).

    A point z of the diagram corresponds to height e = h(x,0) + (z - z_-(x))/2;
    S(x, z) = inf{y : h(x, y) >= e}.  Returns (x, z[nx+1, nz], S[nx+1, nz]).
    """
    x = f.x
    y = f.y
    zl = p.eval_low(x)
    zu = p.eval_up(x)
    Z = zl[:, None] + (zu - zl)[:, None] * np.linspace(0, 1, nz)[None, :]
    S = np.zeros_like(Z)
    for i in range(x.size):
        col = np.maximum.accumulate(f.values[i])
        if zu[i] - zl[i] <= 0:
            S[i] = 0.0  # zero-height column: one-sided limit
            continue
        e = col[0] + (Z[i] - zl[i]) / 2
        S[i] = _column_inverse(col, y, e)
    return x, Z, S


def level_line(f: GridHeightField, p: DiagramProfile, alpha: float):
    """z_alpha(x) = z_-(x) + 2 (h(x, alpha) - h(x, 0)), clipped to [z_-, z_+]."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in ]0,1[")
    x = f.x
    y = f.y
    ha = np.array([np.interp(alpha, y, f.values[i]) for i in range(x.size)])
    zl = p.eval_low(x)
    zu = p.eval_up(x)
    z = np.clip(zl + 2 * (ha - f.values[:, 0]), zl, zu)
    return x, z
