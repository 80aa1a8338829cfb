"""Weighted toroidal dimers, tall-region tiling counts and their bead limits.

Torus model: the hexagonal graph on an NZ x NW torus of fundamental domains,
each holding two white (W1, W2) and two black (B1, B2) vertices.  Its
characteristic polynomial is P(z, w) = a^2 z - (b + c w)^2 / w and the
partition function combines the four root-of-unity products
Z^(theta,tau) = prod P(z, w) over z^NZ = (-1)^theta, w^NW = (-1)^tau.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .entropy import free_energy, free_energy_half
from .parallel import pmap
from .shapes import DiagramProfile, _omega, profile_from_partitions
from .tableaux import count_syt

# The single negative sector depends on the parity of NW; the whole half-sum
# carries the sign (-1)^(NZ NW).  Calibrated on all tori with at most 24
# edges against exhaustive matching counts.
NEGATIVE_SECTOR = {0: (0, 0), 1: (0, 1)}

PHASE_TOL = 1e-6


class SignPatternError(RuntimeError):
    pass


@dataclass(frozen=True)
class TorusParams:
    n: int
    m: int
    alpha: float
    gamma: float

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m or self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive integers")
        if not self.alpha > 0 or not -1.0 < self.gamma < 1.0:
            raise ValueError("need alpha > 0 and gamma in ]-1,1[")

    @property
    def weights(self) -> tuple:
        """(a, b, c) = (alpha/m, exp(alpha gamma/m), 1)."""
        return self.alpha / self.m, math.exp(self.alpha * self.gamma / self.m), 1.0

    @property
    def NZ(self) -> int:
        return self.n

    @property
    def NW(self) -> int:
        return self.m * self.n


# --- symbol ------------------------------------------------------------------

def kasteleyn_symbol(z, w, a: float, b: float, c: float):
    """a^2 z - (b + c w)^2 / w."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ValueError("w = 0 is not allowed")
    v = a * a * z - (b + c * w) ** 2 / w
    return v[()] if v.ndim == 0 else v


def symbol_w_roots(z: complex, a: float, b: float, c: float) -> np.ndarray:
    """Roots in w of w * P(z, w) = -c^2 w^2 + (a^2 z - 2bc) w - b^2."""
    return np.roots([-c * c, a * a * complex(z) - 2 * b * c, -b * b])


def root_expansion(z: complex, alpha: float, gamma: float, m: float) -> np.ndarray:
    """Leading behaviour -1 + (alpha/m)(-gamma +/- sqrt(-z)) of the w-roots."""
    r = np.sqrt(-complex(z))
    return np.array([-1 + alpha / m * (-gamma + r), -1 + alpha / m * (-gamma - r)])


# --- root-of-unity products -------------------------------------------------

def roots_of_unity(N: int, parity: int) -> np.ndarray:
    """Solutions of u^N = (-1)^parity."""
    return np.exp(1j * math.pi * (2 * np.arange(N) + parity) / N)


@dataclass(frozen=True)
class SectorTerm:
    theta: int
    tau: int
    log_abs: float   # sum of ln|P|; -inf when some factor vanishes
    sign: int        # +1, -1, or 0 for a vanishing product


def sector_term(NZ: int, NW: int, theta: int, tau: int, a: float, b: float, c: float,
                z_roots=None, w_roots=None, phase_tol: float = PHASE_TOL) -> SectorTerm:
    """Z^(theta,tau) as log-magnitude plus sign, with the phase tracked per factor.

    Rows over z are reduced with numpy's pairwise sums, so the result does
    not depend on the thread layout.  A phase that is not a multiple of pi
    raises SignPatternError.
    """
    z = roots_of_unity(NZ, theta) if z_roots is None else np.asarray(z_roots, complex)
    w = roots_of_unity(NW, tau) if w_roots is None else np.asarray(w_roots, complex)
    P = kasteleyn_symbol(z[:, None], w[None, :], a, b, c)
    mag = np.abs(P)
    # a factor at rounding level is an exact zero whose phase is noise
    if np.any(mag <= 1e-13 * (a * a + (abs(b) + abs(c)) ** 2)):
        return SectorTerm(theta, tau, -math.inf, 0)
    la = float(np.sum(np.log(mag)))
    ph = float(np.sum(np.angle(P)))
    ph = math.remainder(ph, 2 * math.pi)
    if abs(math.sin(ph)) > phase_tol:
        raise SignPatternError(f"sector ({theta},{tau}) has non-real phase {ph:.3g}")
    return SectorTerm(theta, tau, la, 1 if math.cos(ph) > 0 else -1)


def sector_terms(NZ: int, NW: int, a: float, b: float, c: float) -> list:
    keys = [(th, ta) for th in (0, 1) for ta in (0, 1)]
    return pmap(lambda k: sector_term(NZ, NW, k[0], k[1], a, b, c), keys)


def combine_sectors(terms, NZ: int, NW: int, negative=None, overall=None):
    """Half-sum of the four sectors in log-sum-exp form: returns (ln|Z|, sign)."""
    negative = NEGATIVE_SECTOR[NW % 2] if negative is None else negative
    overall = (-1) ** (NZ * NW) if overall is None else overall
    live = [t for t in terms if t.sign != 0]
    if not live:
        return -math.inf, 0
    L = max(t.log_abs for t in live)
    s = 0.0
    for t in live:
        coef = -1.0 if (t.theta, t.tau) == tuple(negative) else 1.0
        s += coef * t.sign * math.exp(t.log_abs - L)
    s *= 0.5 * overall
    if s == 0.0:
        return -math.inf, 0
    return L + math.log(abs(s)), 1 if s > 0 else -1


def torus_log_partition_raw(NZ: int, NW: int, a: float, b: float, c: float) -> float:
    """ln Z of the NZ x NW torus with edge weights (a, b, c)."""
    if NZ < 1 or NW < 1:
        raise ValueError("torus dimensions must be positive")
    lz, sgn = combine_sectors(sector_terms(NZ, NW, a, b, c), NZ, NW)
    if sgn <= 0:
        raise SignPatternError("combined partition function is not positive")
    return lz


def torus_log_partition(p: TorusParams) -> float:
    """ln Z_{mn,n}(alpha, gamma)."""
    a, b, c = p.weights
    return torus_log_partition_raw(p.NZ, p.NW, a, b, c)


def torus_graph(NZ: int, NW: int, a: float, b: float, c: float) -> list:
    """Weighted edges (white, black, weight) of the torus graph.

    Vertices are (kind, p, q) with p mod NZ, q mod NW.  Per domain: W1-B1 (b),
    W1-B1 one step up in q (c), the same pair for W2-B2, W1-B2 (a), and W2 to
    the B1 of the diagonal neighbour (a).
    """
    E = []
    for p in range(NZ):
        for q in range(NW):
            W1, W2 = ("W1", p, q), ("W2", p, q)
            E += [(W1, ("B1", p, q), b), (W1, ("B1", p, (q + 1) % NW), c),
                  (W2, ("B2", p, q), b), (W2, ("B2", p, (q + 1) % NW), c),
                  (W1, ("B2", p, q), a), (W2, ("B1", (p + 1) % NZ, (q + 1) % NW), a)]
    return E


def calibrate_sign_pattern(NZ: int, NW: int, a: float, b: float, c: float,
                           exact: float, rtol: float = 1e-9) -> list:
    """All (negative sector, overall sign) choices reproducing an exact Z."""
    terms = sector_terms(NZ, NW, a, b, c)
    out = []
    for neg in [(th, ta) for th in (0, 1) for ta in (0, 1)]:
        for ov in (1, -1):
            lz, sgn = combine_sectors(terms, NZ, NW, neg, ov)
            v = sgn * math.exp(lz) if sgn else 0.0
            if abs(v - exact) <= rtol * max(1.0, abs(exact)):
                out.append((neg, ov))
    return out


# --- free energy sequences ----------------------------------------------------

def normalized_log_partition(n: int, m: int, alpha: float, gamma: float,
                             convention: str = "graph") -> float:
    """ln Z_{mn,n}/n^2 ("graph") or half of it per fundamental domain ("domain")."""
    v = torus_log_partition(TorusParams(n, m, alpha, gamma)) / n ** 2
    if convention == "graph":
        return v
    if convention == "domain":
        return 0.5 * v
    raise ValueError(f"unknown convention {convention!r}")


def free_energy_target(alpha: float, gamma: float, convention: str = "graph") -> float:
    if convention == "graph":
        return free_energy(alpha, gamma)
    if convention == "domain":
        return free_energy_half(alpha, gamma)
    raise ValueError(f"unknown convention {convention!r}")


def free_energy_rows(alpha: float, gamma: float, n_seq, m_seq, convention: str = "graph") -> list:
    """CSV rows (n, m, lnZ/n^2, target, gap)."""
    tgt = free_energy_target(alpha, gamma, convention)
    pairs = [(n, m) for n in n_seq for m in m_seq]
    vals = pmap(lambda nm: normalized_log_partition(nm[0], nm[1], alpha, gamma, convention), pairs)
    return [(n, m, v, tgt, v - tgt) for (n, m), v in zip(pairs, vals)]


def aitken_limit(seq) -> float:
    """Aitken delta-squared estimate from the last three terms.

    Falls back to the last term when the ratio of successive differences is
    not in ]0,1[ (no geometric convergence to exploit).
    """
    seq = [float(v) for v in seq]
    if len(seq) < 3:
        return seq[-1]
    x0, x1, x2 = seq[-3:]
    d1, d2 = x1 - x0, x2 - x1
    if d1 == 0:
        return x2
    r = d2 / d1
    if not 0 < r < 1:
        return x2
    return x2 + d2 * r / (1 - r)


@dataclass(frozen=True)
class ExchangeReport:
    alpha: float
    gamma: float
    n_seq: tuple
    m_seq: tuple
    grid: np.ndarray           # grid[i, j] = lnZ/n^2 at (n_seq[i], m_seq[j])
    m_then_n: float
    n_then_m: float
    gap: float
    target: float
    trend: tuple = field(default=())   # (largest size, gap) on growing sub-grids

    @property
    def trend_shrinking(self) -> bool:
        g = [v for _, v in self.trend]
        return all(b < a for a, b in zip(g, g[1:]))

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "gamma": self.gamma, "n_seq": list(self.n_seq),
                "m_seq": list(self.m_seq), "grid": self.grid.tolist(),
                "m_then_n": self.m_then_n, "n_then_m": self.n_then_m, "gap": self.gap,
                "target": self.target, "trend": [list(t) for t in self.trend],
                "trend_shrinking": self.trend_shrinking}


def _two_orders(G: np.ndarray):
    mn = aitken_limit([aitken_limit(G[i, :]) for i in range(G.shape[0])])
    nm = aitken_limit([aitken_limit(G[:, j]) for j in range(G.shape[1])])
    return mn, nm


def limit_exchange_check(alpha: float, gamma: float, n_seq, m_seq,
                         convention: str = "graph") -> ExchangeReport:
    """Extrapolate m -> inf then n -> inf, and the other way round, on one grid."""
    n_seq, m_seq = tuple(int(v) for v in n_seq), tuple(int(v) for v in m_seq)
    for s in (n_seq, m_seq):
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("sequences must be increasing")
    rows = free_energy_rows(alpha, gamma, n_seq, m_seq, convention)
    G = np.array([r[2] for r in rows]).reshape(len(n_seq), len(m_seq))
    mn, nm = _two_orders(G)
    trend = []
    for k in range(3, min(len(n_seq), len(m_seq)) + 1):
        a, b = _two_orders(G[:k, :k])
        trend.append((max(n_seq[k - 1], m_seq[k - 1]), abs(a - b)))
    return ExchangeReport(alpha, gamma, n_seq, m_seq, G, mn, nm, abs(mn - nm),
                          free_energy_target(alpha, gamma, convention), tuple(trend))


# --- tall regions ---------------------------------------------------------------

@dataclass(frozen=True)
class TallRegion:
    """Region between the lower boundary path and the upper one lifted by l rows.

    Paths are stored with doubled vertical units so every vertex is an integer.
    """
    profile: DiagramProfile
    l: int

    def __post_init__(self):
        if self.profile.outer is None:
            raise ValueError("tall regions need a partition-based profile")
        if int(self.l) != self.l or self.l < 0:
            raise ValueError("l must be a non-negative integer")
        lo, up = self.paths()
        if any(u < v for u, v in zip(up, lo)):
            raise ValueError("upper path dips below the lower path: region not tileable")

    def paths(self) -> tuple:
        """Doubled heights of the lower and upper paths at x = 0..n+1."""
        p = self.profile
        cmin = p.content_offset
        js = range(cmin - 1, cmin + p.n_threads + 1)
        base = _omega(p.inner, cmin - 1)
        lo = tuple(_omega(p.inner, j) - base for j in js)
        up = tuple(2 * self.l + _omega(p.outer, j) - base for j in js)
        return lo, up

    def reflected(self) -> "TallRegion":
        """Mirror image x -> n+1-x (conjugate partitions)."""
        p = self.profile
        return TallRegion(profile_from_partitions(_conjugate(p.outer), _conjugate(p.inner)), self.l)


def _conjugate(part) -> tuple:
    part = tuple(part)
    return tuple(sum(1 for v in part if v > c) for c in range(part[0])) if part else ()


def bareiss_det(M) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((r for r in range(k + 1, n) if A[r][k] != 0), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[-1][-1]


def _binom(n: int, k: int) -> int:
    return comb(n, k) if 0 <= k <= n else 0


def tiling_matrix(r: TallRegion) -> list:
    """Binomial path matrix: entry (i, j) counts paths from source j to sink i."""
    lam = r.profile.outer
    mu = tuple(r.profile.inner) + (0,) * (len(lam) - len(r.profile.inner))
    k = len(lam)
    return [[_binom(r.l + lam[i] - mu[j], lam[i] - mu[j] - i + j) for j in range(k)]
            for i in range(k)]


def count_tilings_tall_region(r: TallRegion) -> int:
    """Exact number of lozenge tilings of the tall region."""
    z = bareiss_det(tiling_matrix(r))
    if z <= 0:
        raise ValueError("region is not tileable")
    return z


@dataclass(frozen=True)
class VolumeReport:
    l_seq: tuple
    counts: tuple            # exact Z_l
    values: tuple            # ln Z_l - N ln l
    log_volume: float        # ln f - ln N!
    errors: tuple            # |value - log_volume|
    final_gap: float
    extrapolated: float      # 1/l Richardson on the last two terms
    extrapolated_gap: float
    decay_ratios: tuple      # error(l_{k+1}) / error(l_k)
    monotone: bool           # values monotone after the first term (flag only)

    def to_json(self) -> dict:
        return {"l_seq": list(self.l_seq), "counts": [str(c) for c in self.counts],
                "values": list(self.values), "log_volume": self.log_volume,
                "errors": list(self.errors), "final_gap": self.final_gap,
                "extrapolated": self.extrapolated, "extrapolated_gap": self.extrapolated_gap,
                "decay_ratios": list(self.decay_ratios), "monotone": self.monotone}


def volume_limit_check(p: DiagramProfile, l_seq) -> VolumeReport:
    """ln Z_l - N ln l along l_seq against ln V = ln f - ln N!."""
    if p.outer is None:
        raise ValueError("need a partition-based profile")
    N = p.n_boxes
    if N > 30:
        raise ValueError("volume_limit_check is meant for shapes with N <= 30")
    l_seq = tuple(int(v) for v in l_seq)
    if not l_seq or min(l_seq) < 1:
        raise ValueError("l values must be positive")
    counts = tuple(pmap(lambda l: count_tilings_tall_region(TallRegion(p, l)), l_seq))
    vals = tuple(math.log(z) - N * math.log(l) for z, l in zip(counts, l_seq))
    lv = math.log(count_syt(p)) - math.lgamma(N + 1)
    errs = tuple(abs(v - lv) for v in vals)
    if len(vals) >= 2:
        l1, l2 = l_seq[-2:]
        v1, v2 = vals[-2:]
        ext = v2 + (v2 - v1) * l1 / (l2 - l1)
    else:
        ext = vals[-1]
    ratios = tuple(b / a if a > 0 else 0.0 for a, b in zip(errs, errs[1:]))
    d = np.diff(vals[1:])
    mono = bool(np.all(d >= 0) or np.all(d <= 0))
    return VolumeReport(l_seq, counts, vals, lv, errs, errs[-1], ext, abs(ext - lv), ratios, mono)
