"""Entropy maximisation over admissible grid fields.

Two phases:

1. interior Newton: log-barrier path following on the constraint polytope,
   started from a strictly feasible blend of the requested start.  This is
   what makes the ill-conditioned objective tractable near frozen regions.
2. projected-gradient ascent (spectral step, Dykstra projection, Armijo
   backtracking) from the interior result; every accepted step is checked to
   not decrease the objective.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from ..entropy import PI
from ..shapes import BoundaryCondition
from .functional import SparseOperators, ent_functional, objective_and_gradient
from .grid import (GridHeightField, Projector, ProjectionError, admissibility_residual,
                   apply_boundary, boundary_nodes)


# --- starting fields ---------------------------------------------------------

def _lipschitz_shrunk_midpoint(bot, top, x, eps):
    hbar = 0.5 * (bot + top)
    lin = hbar[0] + (hbar[-1] - hbar[0]) * x
    lim = (0.5 - eps) * np.diff(x)
    rho = 1.0
    cur = hbar
    for _ in range(200):
        if np.all(np.abs(np.diff(cur)) <= lim + 1e-15):
            break
        rho *= 0.9
        cur = lin + rho * (hbar - lin)
    return np.clip(cur, bot, top)


def init_tent(b: BoundaryCondition, nx: int, ny: int, eps: float = 1e-3) -> GridHeightField:
    """Two-slope start: a band around a (1/2-eps)-Lipschitz middle curve.

    h(x,y) = clip(hbar(x) + kappa (y - 1/2), bottom(x), top(x)), flat (t = 0)
    outside the band, with kappa large enough that the band reaches both
    boundary rows.
    """
    x = np.linspace(0, 1, nx + 1)
    bot, top = boundary_nodes(b, nx, ny)
    gap = top - bot
    if np.any(gap[1:-1] <= 1e-12):
        raise ValueError("degenerate boundary: top = bottom inside ]0,1[ (split the diagram)")
    hbar = _lipschitz_shrunk_midpoint(bot, top, x, eps)
    kappa = 2.0 * max(float(np.max(hbar - bot)), float(np.max(top - hbar)))
    y = np.linspace(0, 1, ny + 1)
    lo, hi = bot[:, None], top[:, None]
    v = np.clip(hbar[:, None] + kappa * (y[None, :] - 0.5), lo, hi)
    # snap rounding-level gaps so frozen cells get t = 0 exactly (ent(1/2, t>0) = -inf)
    v = np.where(v - lo <= 1e-12, lo, np.where(hi - v <= 1e-12, hi, v))
    return GridHeightField(nx, ny, apply_boundary(v, b))


def init_linear(b: BoundaryCondition, nx: int, ny: int) -> GridHeightField:
    """(1 - y) bottom(x) + y top(x)."""
    bot, top = boundary_nodes(b, nx, ny)
    y = np.linspace(0, 1, ny + 1)
    v = bot[:, None] * (1 - y[None, :]) + top[:, None] * y[None, :]
    return GridHeightField(nx, ny, apply_boundary(v, b))


# --- report ------------------------------------------------------------------

@dataclass
class SolveOptions:
    max_iter: int = 50_000
    tol: float = 1e-8
    init: object = "tent"          # "tent", "linear" or a node array
    interior: bool = True
    mu_start: float = 1e-3
    mu_final: float = 1e-13
    mu_factor: float = 0.1
    blend: float = 1e-2             # weight of the strictly interior point in the start
    t_floor: float = 1e-8
    max_sweeps: int = 200_000
    stall_window: int = 20
    stall_rtol: float = 1e-10


@dataclass(frozen=True)
class SolveReport:
    field: GridHeightField
    objective: float
    iterations: int
    objective_trace: tuple
    max_projection_residual: float
    el_residual_liquid: float
    converged: bool
    stop_reason: str
    interior_iterations: int = 0
    interior_trace: tuple = ()
    barrier_trace: tuple = ()
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"nx": self.field.nx, "ny": self.field.ny, "objective": self.objective,
                "iterations": self.iterations, "objective_trace": list(self.objective_trace),
                "max_projection_residual": self.max_projection_residual,
                "el_residual_liquid": self.el_residual_liquid, "converged": self.converged,
                "stop_reason": self.stop_reason, "interior_iterations": self.interior_iterations,
                "interior_trace": list(self.interior_trace), "seconds": self.seconds}


class NonConvergence(RuntimeError):
    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


# --- interior phase ------------------------------------------------------------

class _Barrier:
    def __init__(self, ops: SparseOperators, v0: np.ndarray):
        self.ops = ops
        fi = ops.free
        G = sp.vstack([-ops.EX, ops.EX, ops.EY]).tocsr()
        g0 = np.r_[np.full(ops.EX.shape[0], 0.5), np.full(ops.EX.shape[0], 0.5), np.zeros(ops.EY.shape[0])]
        touches = np.asarray(abs(G[:, fi]).sum(axis=1)).ravel() > 0
        self.G = G[touches].tocsr()
        self.g0 = g0[touches]
        self.pairs = []
        for T in (ops.TL, ops.TR):
            keep = np.asarray(abs(T[:, fi]).sum(axis=1)).ravel() > 0
            # edges fixed by the boundary are constant side columns, so t = 0 there
            self.pairs.append((T[keep].tocsr(), ops.S[keep].tocsr()))
        self.fi = fi

    def slack(self, v):
        return self.G @ v + self.g0

    def strictly_feasible(self, v) -> bool:
        if np.any(self.slack(v) <= 0):
            return False
        for T, S in self.pairs:
            if np.any(T @ v <= 0) or np.any(np.abs(S @ v) >= 0.5):
                return False
        return True

    def phi(self, v, mu):
        sl = self.slack(v)
        if np.any(sl <= 0):
            return -np.inf
        val = 0.0
        for T, S in self.pairs:
            t = T @ v
            s = S @ v
            if np.any(t <= 0) or np.any(np.abs(s) >= 0.5):
                return -np.inf
            val += np.sum(t * (1.0 + np.log(np.cos(PI * s) / (PI * t))))
        return self.ops.w * val + mu * np.sum(np.log(sl))

    def newton_direction(self, v, mu):
        w = self.ops.w
        sl = self.slack(v)
        g = mu * (self.G.T @ (1.0 / sl))
        H = -(self.G.T @ sp.diags(mu / sl ** 2) @ self.G)
        for T, S in self.pairs:
            t = T @ v
            s = S @ v
            c = np.cos(PI * s)
            tn = np.tan(PI * s)
            g += w * (S.T @ (-PI * t * tn) + T.T @ np.log(c / (PI * t)))
            dss = sp.diags(w * (-PI ** 2) * t / c ** 2)
            dst = sp.diags(w * (-PI) * tn)
            dtt = sp.diags(w * (-1.0 / t))
            H = H + S.T @ dss @ S + S.T @ dst @ T + T.T @ dst @ S + T.T @ dtt @ T
        fi = self.fi
        gf = g[fi]
        Hf = H.tocsr()[fi][:, fi].tocsc()
        d = spl.spsolve(-Hf, gf)
        return d, float(gf @ d)


def _max_slack_point(barrier: _Barrier, v_fixed: np.ndarray):
    """Point maximising the smallest constraint slack (linear program), or None."""
    from scipy.optimize import linprog
    rows, offs = [barrier.G], [barrier.g0]
    for T, S in barrier.pairs:
        rows += [T, -S, S]
        offs += [np.zeros(T.shape[0]), np.full(S.shape[0], 0.5), np.full(S.shape[0], 0.5)]
    A = sp.vstack(rows).tocsr()
    fi = barrier.fi
    base = v_fixed.copy()
    base[fi] = 0.0
    const = A @ base + np.concatenate(offs)
    Af = A[:, fi]
    nf = fi.size
    # maximise tau subject to Af v_f + const >= tau
    A_ub = sp.hstack([-Af, sp.csr_matrix(np.ones((Af.shape[0], 1)))]).tocsr()
    c = np.zeros(nf + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=A_ub, b_ub=const, bounds=[(None, None)] * nf + [(None, 1.0)],
                  method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12:
        return None
    v = v_fixed.copy()
    v[fi] = res.x[:nf]
    return v


def _strict_start(barrier, v_start, v_lin, blend):
    anchor = v_lin if barrier.strictly_feasible(v_lin) else _max_slack_point(barrier, v_lin)
    if anchor is None:
        return None
    v = (1.0 - blend) * v_start + blend * anchor
    return v if barrier.strictly_feasible(v) else anchor


def _interior_phase(b, nx, ny, v0, opts, budget, log):
    ops = SparseOperators(nx, ny)
    barrier = _Barrier(ops, v0.ravel())
    v_lin = init_linear(b, nx, ny).values.ravel()
    v = _strict_start(barrier, v0.ravel(), v_lin, opts.blend)
    if v is None:
        return None, 0, [], [], False
    mu = opts.mu_start
    its = 0
    ftrace = []
    btrace = []
    done = False
    while its < budget:
        stage_done = False
        for _ in range(200):
            if its >= budget:
                break
            d, dec = barrier.newton_direction(v, mu)
            if not np.isfinite(dec) or dec < max(1e-11 * mu, 1e-16):
                stage_done = True
                break
            p0 = barrier.phi(v, mu)
            step = 1.0
            while True:
                vn = v.copy()
                vn[barrier.fi] += step * d
                pn = barrier.phi(vn, mu)
                if np.isfinite(pn) and pn >= p0 + 1e-4 * step * dec:
                    break
                step *= 0.5
                if step < 1e-14:
                    vn, pn = v, p0
                    break
            its += 1
            v = vn
            btrace.append((mu, pn))
            ftrace.append(objective_and_gradient(v.reshape(nx + 1, ny + 1), 1 / nx, 1 / ny)[0])
            if step < 1e-14 or dec < max(1e-11 * mu, 1e-16):
                stage_done = True
                break
        log(f"barrier mu={mu:.1e} newton={its} F={ftrace[-1] if ftrace else float('nan'):.10f}")
        if not stage_done:
            break
        if mu <= opts.mu_final:
            done = True
            break
        mu *= opts.mu_factor
    return v.reshape(nx + 1, ny + 1), its, ftrace, btrace, done


# --- main entry --------------------------------------------------------------

def maximize_entropy(b: BoundaryCondition, nx: int, ny: int, opts: SolveOptions | None = None,
                     log=None) -> SolveReport:
    opts = opts or SolveOptions()
    log = log or (lambda msg: None)
    if nx < 8 or ny < 8:
        raise ValueError("need nx, ny >= 8")
    t0 = time.perf_counter()
    dx, dy = 1.0 / nx, 1.0 / ny
    if isinstance(opts.init, str):
        start = {"tent": init_tent, "linear": init_linear}[opts.init](b, nx, ny).values
    else:
        start = np.asarray(opts.init.values if isinstance(opts.init, GridHeightField) else opts.init, float)
        if admissibility_residual(start, b) > 1e-9:
            raise ValueError("start field is not admissible")
    v = start.copy()
    its = 0
    n_int = 0
    ftrace_int, btrace = [], []
    interior_done = False
    if opts.interior:
        vi, n_int, ftrace_int, btrace, interior_done = _interior_phase(b, nx, ny, v, opts, opts.max_iter, log)
        its += n_int
        if vi is not None:
            v = vi
    proj = Projector(b, nx, ny)
    v, _ = proj(v, max_sweeps=opts.max_sweeps)
    F, g = objective_and_gradient(v, dx, dy, opts.t_floor)
    if not np.isfinite(F):
        raise RuntimeError("start field has -inf entropy")
    trace = [F]
    sweeps = []
    gmax = float(np.abs(g).max())
    alpha = 1e-3 * dx / gmax if gmax > 0 else 1.0
    converged = False
    reason = ""
    pg_its = 0
    if opts.interior and not interior_done and its >= opts.max_iter:
        reason = "iteration budget exhausted"
    while not reason:
        if its >= opts.max_iter:
            reason = "iteration budget exhausted"
            break
        try:
            cand, nsw = proj(v + alpha * g, max_sweeps=opts.max_sweeps)
        except ProjectionError as exc:
            reason = f"projection failure: {exc}"
            break
        sweeps.append(nsw)
        # scaled projected-gradient norm |P(h + alpha g) - h| / alpha
        if float(np.abs(cand - v).max()) / alpha < opts.tol:
            converged, reason = True, "projected-gradient norm below tol"
            break
        d = cand - v
        gd = float(np.sum(g * d))
        beta = 1.0
        accepted = False
        for _ in range(60):
            vn = v + beta * d
            Fn, gn = objective_and_gradient(vn, dx, dy, opts.t_floor)
            if np.isfinite(Fn) and Fn >= F and Fn >= F + 1e-4 * beta * gd:
                accepted = True
                break
            beta *= 0.5
        its += 1
        pg_its += 1
        if not accepted:
            # no ascent step resolvable in floating point; optimal if the
            # barrier path reached its final parameter
            converged = interior_done
            reason = "line search exhausted" + (" after converged interior phase" if interior_done else "")
            break
        s_ = vn - v
        y_ = gn - g
        sy = float(np.sum(s_ * y_))
        alpha = float(np.sum(s_ * s_)) / -sy if sy < 0 else alpha * 4.0
        alpha = min(max(alpha, 1e-12), 1e3)
        v, F, g = vn, Fn, gn
        trace.append(F)
        if len(trace) > opts.stall_window:
            old = trace[-1 - opts.stall_window]
            if abs(F - old) < opts.stall_rtol * abs(F):
                converged, reason = True, "relative objective change below threshold"
    fld = GridHeightField(nx, ny, v)
    from .analysis import euler_lagrange_residual
    el = euler_lagrange_residual(fld)
    log(f"pg iterations={pg_its} sweeps={sum(sweeps)} F={F:.12f} reason={reason}")
    return SolveReport(field=fld, objective=ent_functional(fld), iterations=its,
                       objective_trace=tuple(trace),
                       max_projection_residual=admissibility_residual(fld, b),
                       el_residual_liquid=el.median, converged=converged, stop_reason=reason,
                       interior_iterations=n_int, interior_trace=tuple(ftrace_int),
                       barrier_trace=tuple(btrace), seconds=time.perf_counter() - t0)
