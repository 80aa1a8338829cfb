"""Standard (skew) Young tableaux, uniform sampling and the bead bijection."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .shapes import DiagramProfile, _omega, boundary_from_profile, profile_from_partitions, skew_cells
from .solver.grid import GridHeightField


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _parts(shape):
    if isinstance(shape, DiagramProfile):
        if shape.outer is None:
            raise ValueError("tableau operations need a partition-based profile")
        return shape.outer, shape.inner
    outer, inner = shape
    return tuple(outer), tuple(inner)


# --- counting -------------------------------------------------------------

def hook_length_count(outer) -> int:
    outer = tuple(outer)
    n = sum(outer)
    conj = [sum(1 for v in outer if v > c) for c in range(outer[0])] if outer else []
    prod = 1
    for r, lr in enumerate(outer):
        for c in range(lr):
            prod *= (lr - c - 1) + (conj[c] - r - 1) + 1
    return math.factorial(n) // prod


def _det_fraction(M):
    # Gaussian elimination over the rationals
    M = [row[:] for row in M]
    n = len(M)
    det = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if M[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            det = -det
        det *= M[k][k]
        inv = 1 / M[k][k]
        for r in range(k + 1, n):
            if M[r][k] != 0:
                f = M[r][k] * inv
                M[r] = [a - f * b for a, b in zip(M[r], M[k])]
    return det


@lru_cache(maxsize=None)
def count_skew(outer: tuple, inner: tuple) -> int:
    """f^{outer/inner} = N! det[1/(outer_i - inner_j - i + j)!]."""
    l = len(outer)
    mu = list(inner) + [0] * (l - len(inner))
    N = sum(outer) - sum(mu)
    if N == 0:
        return 1
    if not inner:
        return hook_length_count(outer)
    M = [[Fraction(1, math.factorial(outer[i] - mu[j] - i + j)) if outer[i] - mu[j] - i + j >= 0
          else Fraction(0) for j in range(l)] for i in range(l)]
    val = _det_fraction(M) * math.factorial(N)
    assert val.denominator == 1
    return int(val)


def count_syt(shape) -> int:
    """Exact number of standard tableaux of a (skew) shape."""
    outer, inner = _parts(shape)
    if sum(outer) - sum(inner) < 1:
        raise ValueError("empty shape")
    return count_skew(outer, inner)


# --- tableaux ---------------------------------------------------------------

@dataclass(frozen=True)
class Tableau:
    outer: tuple
    inner: tuple
    rows: tuple  # rows[r][k] = entry of cell (r, inner[r] + k)

    @property
    def shape(self) -> DiagramProfile:
        return profile_from_partitions(self.outer, self.inner)

    @property
    def n_boxes(self) -> int:
        return sum(len(r) for r in self.rows)

    def entry(self, r: int, c: int) -> int:
        mu = self.inner[r] if r < len(self.inner) else 0
        return self.rows[r][c - mu]

    def items(self):
        for r, row in enumerate(self.rows):
            mu = self.inner[r] if r < len(self.inner) else 0
            for k, v in enumerate(row):
                yield (r, mu + k), v

    def is_standard(self) -> bool:
        ent = dict(self.items())
        if sorted(ent.values()) != list(range(1, len(ent) + 1)):
            return False
        for (r, c), v in ent.items():
            if (r, c + 1) in ent and ent[(r, c + 1)] <= v:
                return False
            if (r + 1, c) in ent and ent[(r + 1, c)] <= v:
                return False
        return True

    def to_json(self) -> dict:
        return {"outer": list(self.outer), "inner": list(self.inner),
                "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_json(cls, doc) -> "Tableau":
        return cls(tuple(doc["outer"]), tuple(doc["inner"]), tuple(tuple(r) for r in doc["rows"]))

    @classmethod
    def from_cells(cls, outer, inner, entries: dict) -> "Tableau":
        outer, inner = tuple(outer), tuple(inner)
        rows = []
        for r, lr in enumerate(outer):
            mu = inner[r] if r < len(inner) else 0
            rows.append(tuple(int(entries[(r, c)]) for c in range(mu, lr)))
        return cls(outer, inner, tuple(rows))


def _order_to_tableau(outer, inner, order_r, order_c) -> Tableau:
    # order_r/c[k] = cell receiving entry k+1
    rows = []
    for r, lr in enumerate(outer):
        mu = inner[r] if r < len(inner) else 0
        rows.append([0] * (lr - mu))
    for k, (r, c) in enumerate(zip(order_r, order_c)):
        mu = inner[r] if r < len(inner) else 0
        rows[r][c - mu] = k + 1
    return Tableau(tuple(outer), tuple(inner), tuple(tuple(x) for x in rows))


def _hook_walk_order(outer, gen, rows=None, out_r=None, out_c=None):
    N = sum(outer)
    nbuf = 8 * N + 16
    u = gen.random(nbuf)
    out_r = np.zeros(N, dtype=np.int64) if out_r is None else out_r
    out_c = np.zeros(N, dtype=np.int64) if out_c is None else out_c
    rows = np.empty(len(outer), dtype=np.int64) if rows is None else rows
    while True:
        rows[:] = outer
        if kernels.hook_walk(rows, u, out_r, out_c) >= 0:
            return out_r, out_c
        u = np.concatenate([u, gen.random(nbuf)])


def _hook_walk_tableau(outer, gen) -> Tableau:
    out_r, out_c = _hook_walk_order(outer, gen)
    return _order_to_tableau(outer, (), out_r, out_c)


def _outer_corners(outer, inner):
    mu = list(inner) + [0] * (len(outer) - len(inner))
    out = []
    for r, lr in enumerate(outer):
        if lr > mu[r] and (r + 1 >= len(outer) or outer[r + 1] < lr):
            out.append(r)
    return out


def _remove(outer, r):
    o = list(outer)
    o[r] -= 1
    while o and o[-1] == 0:
        o.pop()
    return tuple(o)


def _peel_tableau(outer, inner, gen) -> Tableau:
    outer = tuple(outer)
    inner = tuple(inner)
    N = sum(outer) - sum(inner)
    order_r = [0] * N
    order_c = [0] * N
    cur = outer
    for k in range(N - 1, -1, -1):
        corners = _outer_corners(cur, inner)
        total = count_skew(cur, inner)
        x = int(gen.integers(0, total)) if total < 2**63 else _big_randint(gen, total)
        for r in corners:
            nxt = _remove(cur, r)
            w = count_skew(nxt, _trim_inner(inner, nxt))
            if x < w:
                break
            x -= w
        order_r[k] = r
        order_c[k] = cur[r] - 1
        cur = nxt
    return _order_to_tableau(outer, inner, order_r, order_c)


def _trim_inner(inner, outer):
    return inner[:len(outer)] if len(inner) > len(outer) else inner


def _big_randint(gen, total):
    nbytes = (total.bit_length() + 7) // 8 + 8
    while True:
        v = int.from_bytes(gen.bytes(nbytes), "little")
        lim = (256 ** nbytes // total) * total
        if v < lim:
            return v % total


def sample_syt(shape, seed=None) -> Tableau:
    """Exactly uniform standard tableau: hook walk for straight shapes,
    corner peeling weighted by exact counts for skew shapes."""
    outer, inner = _parts(shape)
    gen = _rng(seed)
    if not inner:
        return _hook_walk_tableau(outer, gen)
    return _peel_tableau(outer, inner, gen)


def sample_syt_orders(shape, k: int, seed=None):
    """k uniform tableaux as fill orders: arrays (k, N) of the row and column
    of the cell receiving entry 1, 2, ..., N.

    Straight shapes run the hook walk per sample.  Skew shapes walk the
    lattice of intermediate diagrams with all k chains advanced together.
    """
    outer, inner = _parts(shape)
    gen = _rng(seed)
    N = sum(outer) - sum(inner)
    order_r = np.zeros((k, N), dtype=np.int64)
    order_c = np.zeros((k, N), dtype=np.int64)
    if not inner:
        rows = np.empty(len(outer), dtype=np.int64)
        for i in range(k):
            _hook_walk_order(outer, gen, rows, order_r[i], order_c[i])
        return order_r, order_c
    states = [outer]
    index = {outer: 0}
    cur = np.zeros(k, dtype=np.int64)
    trans = {}
    for step in range(N - 1, -1, -1):
        nxt = np.empty(k, dtype=np.int64)
        for sid in np.unique(cur):
            lam = states[sid]
            if sid not in trans:
                corners = _outer_corners(lam, inner)
                subs = [_remove(lam, r) for r in corners]
                w = np.array([float(Fraction(count_skew(s, _trim_inner(inner, s)),
                                             count_skew(lam, inner))) for s in subs])
                for s in subs:
                    if s not in index:
                        index[s] = len(states)
                        states.append(s)
                trans[sid] = (np.array(corners), np.array([lam[r] - 1 for r in corners]),
                              np.cumsum(w) / w.sum(), np.array([index[s] for s in subs]))
            rr, cc, cdf, targets = trans[sid]
            sel = np.nonzero(cur == sid)[0]
            pick = np.searchsorted(cdf, gen.random(sel.size), side="right")
            pick = np.minimum(pick, len(cdf) - 1)
            order_r[sel, step] = rr[pick]
            order_c[sel, step] = cc[pick]
            nxt[sel] = targets[pick]
        cur = nxt
    return order_r, order_c


def orders_to_codes(shape, order_r, order_c) -> np.ndarray:
    """Entries of each sampled tableau listed in skew_cells order, shape (k, N)."""
    outer, inner = _parts(shape)
    cells = skew_cells(outer, inner)
    lookup = np.full((len(outer), outer[0] if outer else 0), -1, dtype=np.int64)
    for idx, (r, c) in enumerate(cells):
        lookup[r, c] = idx
    pos = lookup[order_r, order_c]
    codes = np.empty_like(pos)
    rows = np.arange(pos.shape[0])[:, None]
    codes[rows, pos] = np.arange(1, pos.shape[1] + 1)[None, :]
    return codes


def sample_syt_many(shape, k: int, seed=None) -> list:
    """k independent uniform tableaux (see sample_syt_orders)."""
    outer, inner = _parts(shape)
    order_r, order_c = sample_syt_orders(shape, k, seed)
    return [_order_to_tableau(outer, inner, order_r[i], order_c[i]) for i in range(k)]


def enumerate_syt(shape) -> list:
    """All standard tableaux of a small shape (by recursive corner removal)."""
    outer, inner = _parts(shape)
    N = sum(outer) - sum(inner)
    out = []

    def rec(cur, k, assign):
        if k == 0:
            out.append(Tableau.from_cells(outer, inner, assign))
            return
        for r in _outer_corners(cur, inner):
            assign[(r, cur[r] - 1)] = k
            rec(_remove(cur, r), k - 1, assign)
            del assign[(r, cur[r] - 1)]

    rec(tuple(outer), N, {})
    return out


# --- beads ------------------------------------------------------------------

@dataclass(frozen=True)
class BeadConfiguration:
    """Bead heights per thread; threads are ordered by content, left to right."""
    outer: tuple
    inner: tuple
    threads: tuple  # tuple of 1-d arrays, increasing

    def __post_init__(self):
        ths = []
        for th in self.threads:
            a = np.array(th, dtype=float)
            a.setflags(write=False)
            ths.append(a)
        object.__setattr__(self, "threads", tuple(ths))
        allv = np.concatenate(ths) if ths else np.zeros(0)
        if np.unique(allv).size != allv.size:
            raise ValueError("duplicate bead coordinates (measure-zero event)")
        for a in ths:
            if np.any(np.diff(a) <= 0):
                raise ValueError("beads on a thread must be strictly increasing")
        counts = [len(c) for c in _thread_cells(self.outer, self.inner)]
        if counts != [a.size for a in ths]:
            raise ValueError("per-thread bead counts do not match the diagram")

    @property
    def n_threads(self) -> int:
        return len(self.threads)

    @property
    def n_beads(self) -> int:
        return sum(a.size for a in self.threads)

    @property
    def shape(self) -> DiagramProfile:
        return profile_from_partitions(self.outer, self.inner)

    def to_json(self) -> dict:
        return {"outer": list(self.outer), "inner": list(self.inner),
                "threads": [[float(v) for v in a] for a in self.threads]}

    @classmethod
    def from_json(cls, doc) -> "BeadConfiguration":
        return cls(tuple(doc["outer"]), tuple(doc["inner"]), tuple(np.array(t) for t in doc["threads"]))


@lru_cache(maxsize=256)
def _thread_cells(outer, inner):
    cells = skew_cells(outer, inner)
    cmin = min(c - r for r, c in cells)
    cmax = max(c - r for r, c in cells)
    th = [[] for _ in range(cmax - cmin + 1)]
    for r, c in cells:
        th[c - r - cmin].append((r, c))
    return tuple(tuple(sorted(t)) for t in th)


def tableau_to_beads(t: Tableau, seed=None) -> BeadConfiguration:
    """Draw N sorted uniforms and give the k-th smallest to the cell holding k."""
    gen = _rng(seed)
    N = t.n_boxes
    ys = np.sort(gen.random(N))
    ent = dict(t.items())
    threads = tuple(np.array([ys[ent[cell] - 1] for cell in cells])
                    for cells in _thread_cells(t.outer, t.inner))
    return BeadConfiguration(t.outer, t.inner, threads)


def beads_to_tableau(b: BeadConfiguration) -> Tableau:
    """Entry of each cell = global rank of its bead's height."""
    cells = _thread_cells(b.outer, b.inner)
    allc = [c for th in cells for c in th]
    ally = np.concatenate(b.threads)
    if np.unique(ally).size != ally.size:
        raise ValueError("duplicate bead coordinates (measure-zero event)")
    ranks = np.empty(ally.size, dtype=np.int64)
    ranks[np.argsort(ally, kind="stable")] = np.arange(1, ally.size + 1)
    return Tableau.from_cells(b.outer, b.inner, dict(zip(allc, ranks.tolist())))


def check_interlacing(b: BeadConfiguration) -> list:
    """Violations of the interlacing rule between neighbouring threads."""
    cells = _thread_cells(b.outer, b.inner)
    pos = {}
    for th, cs in zip(b.threads, cells):
        for y, cell in zip(th, cs):
            pos[cell] = y
    out = []
    # for each cell, the cells to its right and below must carry larger y
    for (r, c), y in pos.items():
        for nb in ((r, c + 1), (r + 1, c)):
            if nb in pos and pos[nb] <= y:
                out.append(f"cell {nb} below cell {(r, c)}")
    return out


# --- statistics -------------------------------------------------------------

def empirical_height(b: BeadConfiguration, ny: int | None = None) -> GridHeightField:
    """Normalised height on the grid x = i/(n+1), y = j/ny.

    h(x_i, y) = bottom(x_i) + #{beads on thread i at height <= y}/(n+1).
    """
    n = b.n_threads
    nx = n + 1
    ny = ny or nx
    bc = boundary_from_profile(b.shape)
    x = np.linspace(0, 1, nx + 1)
    y = np.linspace(0, 1, ny + 1)
    bot = bc.bottom(x)
    v = np.repeat(bot[:, None], ny + 1, axis=1)
    for i, th in enumerate(b.threads, start=1):
        v[i] += np.searchsorted(th, y, side="right") / (n + 1)
    v[0, :] = bc.left_value
    v[-1, :] = bc.right_value
    return GridHeightField(nx, ny, v)


def empirical_density(samples, ny: int):
    """Bead histogram per (thread, y-bin), scaled so it integrates to N/(n+1)^2.

    Returns (x_threads, y_centres, density[n, ny]).
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    n = samples[0].n_threads
    edges = np.linspace(0, 1, ny + 1)
    H = np.zeros((n, ny))
    for b in samples:
        for i, th in enumerate(b.threads):
            H[i] += np.histogram(th, bins=edges)[0]
    dx = 1.0 / (n + 1)
    dy = 1.0 / ny
    dens = H / (len(samples) * (n + 1) * dy)
    xs = np.arange(1, n + 1) * dx
    return xs, (edges[:-1] + edges[1:]) / 2, dens


@dataclass(frozen=True)
class LevelDiagram:
    partition: tuple      # inner union {cells with entry <= k}
    k: int
    x: np.ndarray         # knots of the parent profile
    z: np.ndarray         # upper boundary of the sub-diagram at the knots


def level_diagram(t: Tableau, alpha: float) -> LevelDiagram:
    """Sub-diagram of entries <= floor(alpha N) and its upper boundary."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in ]0,1[")
    N = t.n_boxes
    k = int(math.floor(alpha * N + 1e-9))
    rows = []
    for r, row in enumerate(t.rows):
        mu = t.inner[r] if r < len(t.inner) else 0
        rows.append(mu + sum(1 for v in row if v <= k))
    part = tuple(rows)
    while part and part[-1] == 0:
        part = part[:-1]
    prof = t.shape
    cmin = prof.content_offset
    js = np.arange(cmin - 1, cmin + prof.n_threads + 1)
    z = np.array([_omega(part, int(j)) for j in js], dtype=float) / (prof.n_threads + 1)
    return LevelDiagram(part, k, prof.x, z)
