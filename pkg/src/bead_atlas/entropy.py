"""Local entropy, honeycomb entropy, free energy and surface tension."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

PI = math.pi
SQRT2_2 = math.sqrt(2.0) / 2.0


@dataclass(frozen=True)
class Slope:
    s: float
    t: float

    def __post_init__(self):
        if not (-0.5 <= self.s <= 0.5) or not (self.t >= 0.0):
            raise ValueError(f"invalid slope ({self.s}, {self.t})")


@dataclass(frozen=True)
class RotatedSlope:
    s: float
    t: float

    def __post_init__(self):
        if not (-1.0 <= self.t <= 1.0) or abs(2 * self.s) > 1.0 - self.t + 1e-12:
            raise ValueError(f"invalid rotated slope ({self.s}, {self.t})")


@dataclass(frozen=True)
class WeightParams:
    alpha: float
    gamma: float

    def __post_init__(self):
        if not self.alpha > 0 or not -1.0 < self.gamma < 1.0:
            raise ValueError("need alpha > 0 and gamma in ]-1,1[")

    @property
    def A(self) -> float:
        return math.log(self.alpha)

    @property
    def B(self) -> float:
        return -self.alpha * self.gamma

    @classmethod
    def from_legendre(cls, A: float, B: float) -> "WeightParams":
        return cls(math.exp(A), -B / math.exp(A))


def ent(s, t):
    """ent(s,t) = t(1 + ln(cos(pi s)/(pi t))), with 0 at t=0 and -inf at |s|=1/2."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.cos(PI * s)
        v = t * (1.0 + np.log(c / (PI * t)))
    v = np.where(t <= 0, 0.0, v)
    v = np.where((t > 0) & (np.abs(s) >= 0.5), -np.inf, v)
    return v[()] if v.ndim == 0 else v


def ent_grad(s, t):
    """Partial derivatives (d/ds, d/dt) of ent on the open domain."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return -PI * t * np.tan(PI * s), np.log(np.cos(PI * s) / (PI * t))


def rotate(s, t):
    """(s, t) -> (s/(t+1), (t-1)/(t+1))."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return s / (t + 1.0), (t - 1.0) / (t + 1.0)


def unrotate(st, tt):
    st = np.asarray(st, dtype=float)
    tt = np.asarray(tt, dtype=float)
    if np.any(tt >= 1.0):
        raise ValueError("rotated slope t~ = 1 has no finite preimage")
    return 2.0 * st / (1.0 - tt), (1.0 + tt) / (1.0 - tt)


def jacobian(tt):
    return SQRT2_2 * (1.0 - np.asarray(tt, dtype=float))


def ent_tilde(st, tt):
    """Entropy density in rotated coordinates.

    Equal to ent(unrotate(st, tt)) * jacobian(tt); -inf at tt = 1.
    """
    st = np.asarray(st, dtype=float)
    tt = np.asarray(tt, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = 1.0 - tt
        arg = u * np.cos(2 * PI * st / u) / (PI * (1.0 + tt))
        v = SQRT2_2 * (1.0 + tt) * (1.0 + np.log(arg))
    v = np.where(tt <= -1.0, 0.0, v)
    v = np.where(tt >= 1.0, -np.inf, v)
    v = np.where((tt > -1.0) & (tt < 1.0) & (np.abs(2 * st) >= u), -np.inf, v)
    return v[()] if v.ndim == 0 else v


# --- Lobachevsky function -------------------------------------------------

def _lob_reduced(theta: float) -> float:
    # theta in [0, pi/2]; ln(2 sin t) = ln 2 + ln t + ln(sin t / t), last term smooth
    if theta == 0.0:
        return 0.0
    smooth, _ = integrate.quad(lambda u: math.log(math.sin(u) / u) if u > 0 else 0.0,
                               0.0, theta, epsabs=1e-14, epsrel=1e-13, limit=200)
    return -(theta * math.log(2.0) + theta * math.log(theta) - theta + smooth)


def _lob_scalar(theta: float) -> float:
    r = math.fmod(theta, PI)
    if r < 0:
        r += PI
    if r > PI / 2:
        return -_lob_reduced(PI - r)
    return _lob_reduced(r)


def lobachevsky(theta):
    """L(theta) = -int_0^theta ln|2 sin u| du, odd and pi-periodic."""
    arr = np.asarray(theta, dtype=float)
    if arr.ndim == 0:
        return _lob_scalar(float(arr))
    return np.vectorize(_lob_scalar, otypes=[float])(arr)


def ent_honeycomb(s, t):
    """Honeycomb dimer entropy on the triangle t in [0,1], |s| <= (1-t)/2."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    tol = 1e-12
    if np.any(t < -tol) or np.any(t > 1 + tol) or np.any(np.abs(s) > 0.5 - t / 2 + tol):
        raise ValueError("slope outside the dimer triangle")
    v = (lobachevsky(PI * t) + lobachevsky(PI * (0.5 - s - t / 2))
         + lobachevsky(PI * (0.5 + s - t / 2))) / PI
    return v


def scaled_dimer_entropy(s, t, m):
    """m * ent_honeycomb(s, t/m) - t ln m."""
    t = np.asarray(t, dtype=float)
    return m * ent_honeycomb(s, t / m) - t * math.log(m)


# --- free energy and Legendre duality ------------------------------------

def free_energy(alpha: float, gamma: float) -> float:
    """Limit of ln Z / n^2 for the weighted torus: (2a/pi)(g arccos(-g) + sqrt(1-g^2))."""
    WeightParams(alpha, gamma)
    return 2 * alpha / PI * (gamma * math.acos(-gamma) + math.sqrt(1 - gamma * gamma))


def free_energy_half(alpha: float, gamma: float) -> float:
    """Per-fundamental-domain value, half of free_energy."""
    return 0.5 * free_energy(alpha, gamma)


def free_energy_legendre(A: float, B: float) -> float:
    """F~(A,B) = (1/pi)(-B arccos(B/e^A) + sqrt(e^{2A} - B^2)) + B/2."""
    e = math.exp(A)
    u = B / e
    if abs(u) >= 1:
        raise ValueError("need |B| < e^A")
    return (-B * math.acos(u) + e * math.sqrt(1 - u * u)) / PI + B / 2


def _dual_parts(A, B, s, t):
    e = math.exp(A)
    u = B / e
    r = math.sqrt(1 - u * u)
    val = -((-B * math.acos(u) + e * r) / PI + B / 2) + A * t + B * s
    gA = t - e * r / PI
    gB = s + math.acos(u) / PI - 0.5
    q = 1.0 / (PI * e * r)  # 1/(pi sqrt(e^2A - B^2))
    hAA = -(e * e) * q
    hAB = B * q
    hBB = -q
    return val, np.array([gA, gB]), np.array([[hAA, hAB], [hAB, hBB]])


class DualNonConvergence(RuntimeError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


def legendre_surface_tension(s: float, t: float, A0: float = 0.0, B0: float = 0.0,
                             tol: float = 1e-14, max_iter: int = 200) -> float:
    """sigma(s,t) = max_{A,B} (-F~(A,B) + A t + B s) by damped Newton ascent.

    The default start (0, 0) is deliberately uninformed.
    """
    if not (t > 0 and abs(s) < 0.5):
        raise ValueError("need t > 0 and |s| < 1/2")
    x = np.array([A0, B0], dtype=float)
    val, g, H = _dual_parts(x[0], x[1], s, t)
    trace = [(x.copy(), val)]
    for _ in range(max_iter):
        d = -np.linalg.solve(H, g)
        dec = float(g @ d)
        if dec < tol * max(1.0, abs(val)):
            return val
        step = 1.0
        while True:
            y = x + step * d
            if abs(y[1]) < math.exp(y[0]):
                v2, g2, H2 = _dual_parts(y[0], y[1], s, t)
                # near the optimum the decrement is below rounding noise in val
                if v2 >= val + 1e-4 * step * dec or dec < 1e-10:
                    break
            step *= 0.5
            if step < 1e-16:
                raise DualNonConvergence("line search failed", trace)
        x, val, g, H = y, v2, g2, H2
        trace.append((x.copy(), val))
    if float(np.abs(g).max()) < 1e-9:
        return val
    raise DualNonConvergence("Newton budget exhausted", trace)


def dual_stationary_point(s: float, t: float):
    """Closed-form maximizer: e^A = pi t / cos(pi s), B = e^A sin(pi s)."""
    eA = PI * t / math.cos(PI * s)
    return math.log(eA), eA * math.sin(PI * s)


# --- combinatorial entropy ----------------------------------------------

def combinatorial_entropy_uniform(shape) -> float:
    """S = ln f - ln N! + N ln n for the uniform bead measure on a shape."""
    from .tableaux import count_syt
    f = count_syt(shape)
    N = shape.n_boxes
    n = shape.n_threads
    return _log_int(f) - math.lgamma(N + 1) + N * math.log(n)


def _log_int(k: int) -> float:
    if k <= 0:
        raise ValueError("log of non-positive count")
    b = k.bit_length()
    if b < 1000:
        return math.log(k)
    shift = b - 60
    return math.log(k >> shift) + shift * math.log(2.0)


def entropy_table(s_values, t_values, m: int = 10_000):
    """Rows (s, t, ent, sigma, scaled-gap) for CSV emission."""
    rows = []
    for s in s_values:
        for t in t_values:
            e = float(ent(s, t))
            sig = legendre_surface_tension(s, t) if t > 0 and abs(s) < 0.5 else float("nan")
            gap = float(scaled_dimer_entropy(s, t, m)) - e if t / m <= 1 - 2 * abs(s) else float("nan")
            rows.append((float(s), float(t), e, sig, gap))
    return rows
