"""Skew Young diagrams in Russian convention and the boundary data they induce.

A box in row r, column c (0-based) sits on the diagonal of content c - r.  Its
Russian-convention image is a diamond centred at raw abscissa c - r spanning
raw heights c + r .. c + r + 2.  A diagram with content range [cmin, cmax]
has n = cmax - cmin + 1 threads; the raw window [cmin - 1, cmax + 1] is mapped
onto [0, 1] by dividing by n + 1, so thread i (1-based) sits at x = i/(n+1).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

Partition = tuple


def _norm_partition(p: Sequence[int]) -> tuple:
    p = tuple(int(v) for v in p)
    if any(v < 0 for v in p):
        raise ValueError(f"negative part in {p}")
    if any(p[i] < p[i + 1] for i in range(len(p) - 1)):
        raise ValueError(f"parts not weakly decreasing: {p}")
    while p and p[-1] == 0:
        p = p[:-1]
    return p


def skew_cells(outer: Sequence[int], inner: Sequence[int] = ()) -> list:
    """Cells (r, c) of outer/inner, row by row."""
    outer = _norm_partition(outer)
    inner = _norm_partition(inner)
    return [(r, c) for r, lr in enumerate(outer)
            for c in range(inner[r] if r < len(inner) else 0, lr)]


@dataclass(frozen=True)
class DiagramProfile:
    """Russian-convention profile: lower/upper boundary z = 2h(x,0), 2h(x,1).

    Knot abscissas and values are exact rationals.  When built from partitions,
    ``outer``/``inner`` are kept so combinatorial code can recover the cells.
    """
    x_knots: tuple
    f_low: tuple
    f_up: tuple
    n_threads: int
    outer: tuple | None = None
    inner: tuple | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def x(self) -> np.ndarray:
        return np.array([float(v) for v in self.x_knots])

    @property
    def low(self) -> np.ndarray:
        return np.array([float(v) for v in self.f_low])

    @property
    def up(self) -> np.ndarray:
        return np.array([float(v) for v in self.f_up])

    def eval_low(self, x):
        return np.interp(x, self.x, self.low)

    def eval_up(self, x):
        return np.interp(x, self.x, self.up)

    @property
    def is_partition_shape(self) -> bool:
        return self.outer is not None

    def cells(self) -> list:
        if self.outer is None:
            raise ValueError("profile carries no partition data")
        return skew_cells(self.outer, self.inner)

    @property
    def n_boxes(self) -> int:
        if self.outer is not None:
            return sum(self.outer) - sum(self.inner)
        # area between the curves in units of one box (area 2/(n+1)^2 each)
        x, lo, up = self.x, self.low, self.up
        area = np.trapezoid(up - lo, x)
        return int(round(area * (self.n_threads + 1) ** 2 / 2))

    @property
    def content_offset(self) -> int:
        """Content of thread 1 (the leftmost thread)."""
        if self.outer is None:
            raise ValueError("profile carries no partition data")
        return min(c - r for r, c in self.cells())

    def thread_of(self, cell) -> int:
        r, c = cell
        return c - r - self.content_offset

    def is_straight(self) -> bool:
        return self.outer is not None and len(self.inner) == 0

    def to_json(self) -> dict:
        if self.outer is not None:
            return {"outer": list(self.outer), "inner": list(self.inner)}
        return {"x_knots": [str(v) for v in self.x_knots],
                "f_low": [str(v) for v in self.f_low],
                "f_up": [str(v) for v in self.f_up],
                "n_threads": self.n_threads}


def _omega(part: tuple, j: int) -> int:
    # |j| + 2 * (number of cells of the partition on content j)
    cnt = sum(1 for r, lr in enumerate(part) if 0 <= j + r < lr)
    return abs(j) + 2 * cnt


def profile_from_partitions(outer: Sequence[int], inner: Sequence[int] = (),
                            scale: int = 1) -> DiagramProfile:
    outer = _norm_partition(outer)
    inner = _norm_partition(inner)
    if scale < 1:
        raise ValueError("scale must be >= 1")
    if len(inner) > len(outer) or any(inner[i] > outer[i] for i in range(len(inner))):
        raise ValueError(f"inner {inner} not contained in outer {outer}")
    if scale > 1:
        outer = tuple(v * scale for v in outer for _ in range(scale))
        inner = tuple(v * scale for v in inner for _ in range(scale))
    cells = skew_cells(outer, inner)
    if not cells:
        raise ValueError("outer/inner difference is empty")
    contents = [c - r for r, c in cells]
    cmin, cmax = min(contents), max(contents)
    n = cmax - cmin + 1
    den = n + 1
    js = range(cmin - 1, cmax + 2)
    xk = tuple(Fraction(j - (cmin - 1), den) for j in js)
    lo = tuple(Fraction(_omega(inner, j), den) for j in js)
    up = tuple(Fraction(_omega(outer, j), den) for j in js)
    return DiagramProfile(xk, lo, up, n, outer, inner)


def square_profile(k: int) -> DiagramProfile:
    return profile_from_partitions((k,) * k)


def profile_from_knots(x_knots, f_low, f_up, n_threads: int) -> DiagramProfile:
    conv = lambda seq: tuple(Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(10**12)
                             for v in seq)
    return DiagramProfile(conv(x_knots), conv(f_low), conv(f_up), int(n_threads))


def profile_from_json(doc) -> DiagramProfile:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "outer" in doc:
        return profile_from_partitions(doc["outer"], doc.get("inner", ()), int(doc.get("scale", 1)))
    return profile_from_knots(doc["x_knots"], doc["f_low"], doc["f_up"], doc["n_threads"])


def parse_shape(spec: str) -> DiagramProfile:
    """Parse '4,4,4,4', '3,2/1', 'square:20', a JSON document or a JSON file path."""
    spec = spec.strip()
    if spec.startswith("{"):
        return profile_from_json(spec)
    if spec.endswith(".json"):
        with open(spec) as fh:
            return profile_from_json(json.load(fh))
    if spec.startswith("square:"):
        return square_profile(int(spec.split(":", 1)[1]))
    outer, _, inner = spec.partition("/")
    to_p = lambda s: tuple(int(v) for v in s.replace(" ", "").split(",") if v)
    return profile_from_partitions(to_p(outer), to_p(inner))


def validate(p: DiagramProfile, tol: float = 1e-12) -> list:
    """List of invariant violations; empty when the profile is valid."""
    out = []
    x, lo, up = p.x, p.low, p.up
    if len(x) < 2 or not (len(x) == len(lo) == len(up)):
        return ["knot arrays must have equal length >= 2"]
    if abs(x[0]) > tol or abs(x[-1] - 1) > tol:
        out.append("knots must start at 0 and end at 1")
    dx = np.diff(x)
    if np.any(dx <= 0):
        out.append("knots not strictly increasing")
        return out
    for name, f in (("f_low", lo), ("f_up", up)):
        slopes = np.abs(np.diff(f)) / dx
        for k in np.nonzero(slopes > 1 + tol)[0]:
            out.append(f"{name} Lipschitz violation on segment {k}: slope {slopes[k]:.6g}")
    for k in np.nonzero(up < lo - tol)[0]:
        out.append(f"ordering violation at knot {k}: f_up < f_low")
    for k in np.nonzero(np.abs(up - lo)[1:-1] <= tol)[0] + 1:
        out.append(f"degenerate column at knot {k}: f_up = f_low inside ]0,1[")
    if abs(up[0] - lo[0]) > tol or abs(up[-1] - lo[-1]) > tol:
        out.append("endpoints must coincide")
    if p.n_threads < 1:
        out.append("n_threads must be positive")
    return out


@dataclass(frozen=True)
class BoundaryCondition:
    bottom: Callable
    top: Callable
    left_value: float
    right_value: float

    def sample(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self.bottom(x), dtype=float), np.asarray(self.top(x), dtype=float)


def boundary_from_profile(p: DiagramProfile) -> BoundaryCondition:
    """bottom = (f_low - f_low(0))/2, top = (f_up - f_low(0))/2."""
    errs = [e for e in validate(p) if not e.startswith("degenerate")]
    if errs:
        raise ValueError("; ".join(errs))
    x = p.x
    base = float(p.f_low[0]) / 2
    lo = p.low / 2 - base
    up = p.up / 2 - base
    if np.any(up < lo - 1e-12):
        lo, up = up, lo
    bottom = lambda xx, _x=x, _v=lo: np.interp(xx, _x, _v)
    top = lambda xx, _x=x, _v=up: np.interp(xx, _x, _v)
    return BoundaryCondition(bottom, top, float(lo[0]), float(lo[-1]))


def validate_boundary(b: BoundaryCondition, n: int = 2001, tol: float = 1e-9) -> list:
    x = np.linspace(0, 1, n)
    bot, top = b.sample(x)
    out = []
    dx = x[1] - x[0]
    if np.abs(np.diff(bot)).max() > 0.5 * dx + tol:
        out.append("bottom not 1/2-Lipschitz")
    if np.abs(np.diff(top)).max() > 0.5 * dx + tol:
        out.append("top not 1/2-Lipschitz")
    if np.any(top < bot - tol):
        out.append("top below bottom")
    for v, name in ((bot[0], "bottom(0)"), (top[0], "top(0)")):
        if abs(v - b.left_value) > tol:
            out.append(f"{name} != left_value")
    for v, name in ((bot[-1], "bottom(1)"), (top[-1], "top(1)")):
        if abs(v - b.right_value) > tol:
            out.append(f"{name} != right_value")
    return out


def is_connected(p: DiagramProfile) -> bool:
    """True when f_up > f_low strictly at every interior knot."""
    up, lo = p.up, p.low
    return bool(np.all(up[1:-1] > lo[1:-1]))
