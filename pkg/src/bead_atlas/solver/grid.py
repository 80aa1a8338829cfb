"""Grid height fields, admissibility checks and the feasibility projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..shapes import BoundaryCondition


@dataclass(frozen=True)
class GridHeightField:
    nx: int
    ny: int
    values: np.ndarray  # (nx+1, ny+1), h at (i/nx, j/ny)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.nx + 1, self.ny + 1):
            raise ValueError(f"values shape {v.shape} != ({self.nx + 1}, {self.ny + 1})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx + 1)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny + 1)

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    @property
    def dy(self) -> float:
        return 1.0 / self.ny

    def at(self, x, y):
        """Bilinear interpolation of h."""
        from scipy.interpolate import RegularGridInterpolator
        f = RegularGridInterpolator((self.x, self.y), self.values)
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return f(np.stack([x.ravel(), y.ravel()], -1)).reshape(x.shape)


def boundary_nodes(b: BoundaryCondition, nx: int, ny: int):
    """Bottom row, top row at x nodes; constant side values."""
    x = np.linspace(0.0, 1.0, nx + 1)
    bot, top = b.sample(x)
    return bot, top


def apply_boundary(values: np.ndarray, b: BoundaryCondition) -> np.ndarray:
    nx, ny = values.shape[0] - 1, values.shape[1] - 1
    bot, top = boundary_nodes(b, nx, ny)
    v = values.copy()
    v[:, 0] = bot
    v[:, -1] = top
    v[0, :] = b.left_value
    v[-1, :] = b.right_value
    return v


def admissibility_residual(f, b: BoundaryCondition | None = None) -> float:
    """Largest violation of the Lipschitz, monotone and boundary constraints."""
    v = f.values if isinstance(f, GridHeightField) else np.asarray(f, float)
    nx = v.shape[0] - 1
    c = 0.5 / nx
    r = max(0.0, float(np.abs(np.diff(v, axis=0)).max(initial=0.0) - c))
    r = max(r, float(-np.diff(v, axis=1).min(initial=0.0)))
    if b is not None:
        r = max(r, float(np.abs(apply_boundary(v, b) - v).max()))
    return r


def validate_field(f: GridHeightField, b: BoundaryCondition | None = None, tol: float = 1e-12) -> list:
    out = []
    v = f.values
    c = 0.5 / f.nx
    dxv = np.abs(np.diff(v, axis=0)).max(initial=0.0)
    if dxv > c + tol:
        out.append(f"horizontal Lipschitz violated by {dxv - c:.3g}")
    dyv = np.diff(v, axis=1).min(initial=0.0)
    if dyv < -tol:
        out.append(f"vertical monotonicity violated by {-dyv:.3g}")
    if b is not None:
        bd = np.abs(apply_boundary(v, b) - v).max()
        if bd > tol:
            out.append(f"boundary mismatch {bd:.3g}")
    if not np.all(np.isfinite(v)):
        out.append("non-finite values")
    return out


class ProjectionError(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


class Projector:
    """Euclidean projection onto admissible fields (Dykstra / Hildreth).

    For half-spaces Dykstra's correction terms are scalar multipliers per
    constraint, which are kept between calls as a warm start.
    """

    def __init__(self, b: BoundaryCondition, nx: int, ny: int):
        self.b = b
        self.nx, self.ny = nx, ny
        self.c = 0.5 / nx
        self.mx = np.zeros((nx, ny + 1))
        self.my = np.zeros((nx + 1, ny))
        self.wx = np.ones(nx + 1)
        self.wx[[0, -1]] = 0.0
        self.wy = np.ones(ny + 1)
        self.wy[[0, -1]] = 0.0
        self.total_sweeps = 0

    def reset(self):
        self.mx[:] = 0.0
        self.my[:] = 0.0

    def __call__(self, p: np.ndarray, tol: float = 1e-12, max_sweeps: int = 200_000):
        p = apply_boundary(np.asarray(p, dtype=float), self.b)
        x = p.copy()
        # x = p - A^T mu with the stored multipliers
        x[1:, :] -= self.mx * self.wx[1:, None]
        x[:-1, :] += self.mx * self.wx[:-1, None]
        x[:, 1:] -= self.my * self.wy[None, 1:]
        x[:, :-1] += self.my * self.wy[None, :-1]
        x = np.ascontiguousarray(x)
        mv = np.inf
        for sweep in range(1, max_sweeps + 1):
            mv = kernels.project_sweep(x, self.mx, self.my, self.wx, self.wy, self.c)
            if mv <= tol:
                self.total_sweeps += sweep
                return x, sweep
        self.total_sweeps += max_sweeps
        raise ProjectionError(f"projection did not converge in {max_sweeps} sweeps "
                              f"(last movement {mv:.3g})", admissibility_residual(x, self.b))


def project_admissible(f, b: BoundaryCondition, tol: float = 1e-12,
                       max_sweeps: int = 200_000) -> GridHeightField:
    """Nearest admissible field to the raw node array f."""
    v = f.values if isinstance(f, GridHeightField) else np.asarray(f, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite input")
    nx, ny = v.shape[0] - 1, v.shape[1] - 1
    x, _ = Projector(b, nx, ny)(v, tol, max_sweeps)
    return GridHeightField(nx, ny, x)
