"""bead-atlas command line: count, sample, solve, verify.

Exit codes: 0 success, 1 a verify check failed, 2 validation error,
3 non-convergence.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, io
from .parallel import pmap, worker_count

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NONCONV = 0, 1, 2, 3

# quarter of the double integral of ln(1/(x+y)) over the unit square, and the
# same computation carried out on the half-size square that the hook sum covers
SQUARE_ENTROPY_STATED = 0.25 * (1.5 - 2 * math.log(2))
SQUARE_ENTROPY_CORRECTED = 0.25 * (1.5 - math.log(2))


class ValidationError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def header(self) -> dict:
        return {"tool": "bead-atlas", "version": __version__, "command": self.command,
                "seed": self.seed, "params": self.params}


# --- argument helpers --------------------------------------------------------------

def _shape(spec: str):
    from .shapes import parse_shape, validate
    try:
        p = parse_shape(spec)
    except (ValueError, OSError) as exc:
        raise ValidationError(f"bad --shape {spec!r}: {exc}") from None
    errs = [e for e in validate(p) if not e.startswith("degenerate")]
    if errs:
        raise ValidationError("; ".join(errs))
    return p


def _grid(spec: str) -> tuple:
    try:
        parts = [int(v) for v in spec.split(",")]
    except ValueError:
        raise ValidationError(f"bad --grid {spec!r}; expected NX,NY") from None
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or min(parts) < 8:
        raise ValidationError("--grid needs NX,NY with both >= 8")
    return tuple(parts)


def _floats(spec: str) -> list:
    try:
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"bad number list {spec!r}") from None


def _formats(spec: str | None, allowed: set, default: set) -> set:
    if not spec:
        return set(default)
    out = {v.strip() for v in spec.split(",") if v.strip()}
    bad = out - {"csv", "json", "svg", "ndjson"}
    if bad:
        raise ValidationError(f"unknown --format {sorted(bad)}")
    return out & allowed


def _seed(v) -> int:
    if v is None:
        return 0
    if v < 0:
        raise ValidationError("--seed must be non-negative")
    return int(v)


def _out(args) -> str | None:
    return args.out


# --- count ---------------------------------------------------------------------------

def square_trend_rows(ks) -> list:
    """(k, n, S/n^2, stated target, corrected target) for k x k squares."""
    from .entropy import combinatorial_entropy_uniform
    from .shapes import square_profile
    rows = []
    for k in ks:
        p = square_profile(int(k))
        S = combinatorial_entropy_uniform(p)
        n = p.n_threads
        rows.append((int(k), n, S / n ** 2, SQUARE_ENTROPY_STATED, SQUARE_ENTROPY_CORRECTED))
    return rows


def cmd_count(args) -> int:
    from .entropy import combinatorial_entropy_uniform
    from .tableaux import count_syt
    p = _shape(args.shape)
    if p.outer is None:
        raise ValidationError("count needs a partition shape")
    cfg = ExperimentConfig("count", {"shape": p.to_json(), "trend": args.trend})
    f = count_syt(p)
    S = combinatorial_entropy_uniform(p)
    print(f)
    print(f"entropy S = {S!r}  (N = {p.n_boxes}, n = {p.n_threads})")
    rows = []
    if args.trend:
        ks = [int(v) for v in _floats(args.trend)]
        if any(k < 1 for k in ks):
            raise ValidationError("--trend sizes must be positive")
        rows = square_trend_rows(ks)
        print("k      n      S/n^2          stated        corrected")
        for k, n, v, a, b in rows:
            print(f"{k:<6d} {n:<6d} {v:<14.8f} {a:<13.8f} {b:.8f}")
    out = _out(args)
    if out:
        fm = _formats(args.format, {"json", "csv"}, {"json"})
        if "json" in fm:
            io.write_json(os.path.join(out, "count.json"), cfg.header(),
                          {"count": str(f), "entropy": S, "n_boxes": p.n_boxes,
                           "n_threads": p.n_threads, "trend": [list(r) for r in rows]})
        if "csv" in fm and rows:
            io.write_csv(os.path.join(out, "trend.csv"), cfg.header(),
                         ["k", "n", "S_over_n2", "target_stated", "target_corrected"], rows)
    return EXIT_OK


# --- sample --------------------------------------------------------------------------

def cmd_sample(args) -> int:
    from .tableaux import empirical_density, sample_syt, tableau_to_beads
    p = _shape(args.shape)
    if p.outer is None:
        raise ValidationError("sample needs a partition shape")
    if args.samples < 1:
        raise ValidationError("--samples must be >= 1")
    seed = _seed(args.seed)
    ny = args.ny or (p.n_threads + 1)
    if ny < 1:
        raise ValidationError("--ny must be positive")
    cfg = ExperimentConfig("sample", {"shape": p.to_json(), "samples": args.samples, "ny": ny}, seed)
    # sample k depends only on (seed, k)
    def draw(k):
        gen = np.random.default_rng([seed, k])
        t = sample_syt(p, gen)
        return t, tableau_to_beads(t, gen)

    pairs = pmap(draw, range(args.samples))
    tabs = [t for t, _ in pairs]
    beads = [b for _, b in pairs]
    out = _out(args) or "."
    fm = _formats(args.format, {"ndjson", "csv", "svg"}, {"ndjson", "csv", "svg"})
    if "ndjson" in fm:
        recs = [{"index": i, "tableau": t.to_json()["rows"], "beads": b.to_json()["threads"]}
                for i, (t, b) in enumerate(zip(tabs, beads))]
        io.write_ndjson(os.path.join(out, "samples.ndjson"), cfg.header(), recs)
    if "csv" in fm:
        xs, yc, dens = empirical_density(beads, ny)
        rows = [(x, y, dens[i, j]) for i, x in enumerate(xs) for j, y in enumerate(yc)]
        io.write_csv(os.path.join(out, "density.csv"), cfg.header(), ["x", "y", "density"], rows)
    if "svg" in fm:
        b = beads[0]
        n = b.n_threads
        pts = [((i + 1) / (n + 1), y) for i, th in enumerate(b.threads) for y in th]
        io.atomic_write(os.path.join(out, "beads.svg"), io.scatter_svg(cfg.header(), pts))
    print(f"sampled {args.samples} tableaux of {p.n_boxes} boxes (seed {seed}) into {out}")
    return EXIT_OK


# --- solve ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    from .shapes import boundary_from_profile
    from .solver.analysis import level_line
    from .solver.maximize import SolveOptions, maximize_entropy
    p = _shape(args.shape)
    nx, ny = _grid(args.grid)
    levels = _floats(args.levels)
    if any(not 0 < a < 1 for a in levels):
        raise ValidationError("--levels must lie in ]0,1[")
    if args.max_iter < 1 or not args.tol > 0:
        raise ValidationError("--max-iter must be >= 1 and --tol > 0")
    if args.init not in ("tent", "linear"):
        raise ValidationError("--init must be tent or linear")
    try:
        b = boundary_from_profile(p)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    cfg = ExperimentConfig("solve", {"shape": p.to_json(), "grid": [nx, ny], "max_iter": args.max_iter,
                                     "tol": args.tol, "init": args.init, "levels": levels})
    opts = SolveOptions(max_iter=args.max_iter, tol=args.tol, init=args.init)
    log = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
    try:
        rep = maximize_entropy(b, nx, ny, opts, log=log)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    curves = [(f"alpha={a}",) + tuple(level_line(rep.field, p, a)) for a in levels]
    body = {"report": rep.to_json(),
            "levels": [{"alpha": a, "x": x.tolist(), "z": z.tolist()} for a, (_, x, z) in zip(levels, curves)]}
    out = _out(args) or "."
    fm = _formats(args.format, {"json", "csv", "svg"}, {"json", "csv", "svg"})
    if "json" in fm:
        io.write_json(os.path.join(out, "report.json"), cfg.header(), body)
    if "csv" in fm:
        f = rep.field
        rows = [(i, j, x, y, f.values[i, j]) for i, x in enumerate(f.x) for j, y in enumerate(f.y)]
        io.write_csv(os.path.join(out, "field.csv"), cfg.header(), ["i", "j", "x", "y", "h"], rows)
    if "svg" in fm:
        x = rep.field.x
        zl, zu = p.eval_low(x), p.eval_up(x)
        allc = [("lower", x, zl), ("upper", x, zu)] + curves
        rng = (float(min(zl.min(), zu.min())), float(max(zl.max(), zu.max())))
        io.atomic_write(os.path.join(out, "contours.svg"), io.curves_svg(cfg.header(), allc, y_range=rng))
        io.atomic_write(os.path.join(out, "field.svg"), io.heatmap_svg(cfg.header(), rep.field.values))
    status = "converged" if rep.converged else "NOT converged"
    print(f"objective {rep.objective!r} after {rep.iterations} iterations ({status}: {rep.stop_reason})")
    return EXIT_OK if rep.converged else EXIT_NONCONV


# --- verify --------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str


def check_duality(args) -> CheckResult:
    from .entropy import ent, legendre_surface_tension
    S = np.linspace(-0.45, 0.45, 20)
    T = np.linspace(0.1, 2.0, 20)
    err = max(abs(legendre_surface_tension(s, t) + float(ent(s, t))) for s in S for t in T)
    return CheckResult("duality", err <= 1e-6, err, 1e-6, "max |sigma + ent| on a 20x20 slope grid")


def check_scaled_limit(args) -> CheckResult:
    from .entropy import ent, scaled_dimer_entropy
    s, t = np.meshgrid(np.linspace(-0.4, 0.4, 41), np.linspace(0.1, 2.0, 40), indexing="ij")
    err = float(np.abs(scaled_dimer_entropy(s, t, 10_000) - ent(s, t)).max())
    return CheckResult("scaled-limit", err <= 1e-2, err, 1e-2, "sup gap at m = 1e4")


def check_free_energy(args) -> CheckResult:
    from .dimer import free_energy_target, limit_exchange_check, normalized_log_partition
    if not args.alpha > 0 or not -1 < args.gamma < 1:
        raise ValidationError("need --alpha > 0 and --gamma in ]-1,1[")
    v = normalized_log_partition(48, 64, args.alpha, args.gamma)
    err = abs(v - free_energy_target(args.alpha, args.gamma))
    seq = [4, 8, 16, 32, 64]
    ex = limit_exchange_check(1.0, 0.5, seq, seq)
    ok = err <= 0.05 and ex.gap <= 0.02
    return CheckResult("free-energy", ok, max(err, ex.gap), 0.05,
                       f"|lnZ/n^2 - target| = {err:.3g} at n=48, m=64; exchange gap {ex.gap:.3g}")


def check_ln_volume(args) -> CheckResult:
    from .dimer import volume_limit_check
    from .shapes import profile_from_partitions
    rep = volume_limit_check(profile_from_partitions((2, 2)), [16, 32, 64, 128, 256])
    return CheckResult("lnV", rep.final_gap <= 0.02, rep.final_gap, 0.02,
                       f"shape (2,2) at l=256; 1/l-extrapolated gap {rep.extrapolated_gap:.3g}")


CHECKS = {"duality": check_duality, "scaled-limit": check_scaled_limit,
          "free-energy": check_free_energy, "lnV": check_ln_volume}


def cmd_verify(args) -> int:
    names = list(CHECKS) if not args.check else [c for spec in args.check for c in spec.split(",")]
    bad = [n for n in names if n not in CHECKS]
    if bad:
        raise ValidationError(f"unknown check(s) {bad}; choose from {list(CHECKS)}")
    cfg = ExperimentConfig("verify", {"checks": names, "alpha": args.alpha, "gamma": args.gamma})
    results = [CHECKS[n](args) for n in names]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<13s} value={r.value:.3e}  tol={r.tolerance:.1e}  {r.detail}")
    out = _out(args)
    if out:
        io.write_json(os.path.join(out, "verify.json"), cfg.header(),
                      {"checks": [{"name": r.name, "passed": r.passed, "value": r.value,
                                   "tolerance": r.tolerance, "detail": r.detail} for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# --- entry point ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bead-atlas", description="Bead model, tableaux and limit shapes.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="exact tableau count and combinatorial entropy")
    c.add_argument("--shape", required=True, help="'4,4,4,4', '3,2/1', 'square:20', JSON text or file")
    c.add_argument("--trend", help="comma list of k: S/n^2 table for k x k squares")
    c.add_argument("--out")
    c.add_argument("--format")
    c.set_defaults(func=cmd_count)

    s = sub.add_parser("sample", help="uniform tableaux, bead configurations, density")
    s.add_argument("--shape", required=True)
    s.add_argument("--samples", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ny", type=int, help="density bins in y (default n+1)")
    s.add_argument("--out")
    s.add_argument("--format", help="comma list among ndjson,csv,svg")
    s.set_defaults(func=cmd_sample)

    v = sub.add_parser("solve", help="maximise the entropy functional on a grid")
    v.add_argument("--shape", required=True)
    v.add_argument("--grid", default="64,64")
    v.add_argument("--max-iter", type=int, default=50_000)
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--init", default="tent")
    v.add_argument("--levels", default="0.05,0.15,0.3")
    v.add_argument("--out")
    v.add_argument("--format", help="comma list among json,csv,svg")
    v.add_argument("--verbose", action="store_true")
    v.set_defaults(func=cmd_solve)

    r = sub.add_parser("verify", help="numerical checks of the dual and discrete limits")
    r.add_argument("--check", action="append", help=f"one of {list(CHECKS)} (repeatable)")
    r.add_argument("--alpha", type=float, default=1.0, help="torus weight for the free-energy check")
    r.add_argument("--gamma", type=float, default=0.3, help="torus weight for the free-energy check")
    r.add_argument("--out")
    r.set_defaults(func=cmd_verify)

    d = sub.add_parser("free-energy", help="ln Z/n^2 of the weighted torus on an (n, m) grid")
    d.add_argument("--alpha", type=float, default=1.0)
    d.add_argument("--gamma", type=float, default=0.3)
    d.add_argument("--n", default="8,16,32")
    d.add_argument("--m", default="8,16,32,64")
    d.add_argument("--convention", default="graph", choices=["graph", "domain"])
    d.add_argument("--out")
    d.set_defaults(func=cmd_free_energy)
    return ap


def cmd_free_energy(args) -> int:
    from .dimer import free_energy_rows
    if not args.alpha > 0 or not -1 < args.gamma < 1:
        raise ValidationError("need --alpha > 0 and --gamma in ]-1,1[")
    ns = [int(v) for v in _floats(args.n)]
    ms = [int(v) for v in _floats(args.m)]
    if min(ns + ms) < 1:
        raise ValidationError("--n and --m entries must be positive")
    cfg = ExperimentConfig("free-energy", {"alpha": args.alpha, "gamma": args.gamma, "n": ns, "m": ms,
                                           "convention": args.convention})
    rows = free_energy_rows(args.alpha, args.gamma, ns, ms, args.convention)
    for n, m, v, t, g in rows:
        print(f"n={n:<4d} m={m:<4d} lnZ/n^2={v:.8f} target={t:.8f} gap={g:+.2e}")
    if args.out:
        io.write_csv(os.path.join(args.out, "free_energy.csv"), cfg.header(),
                     ["n", "m", "lnZ_over_n2", "target", "gap"], rows)
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        try:
            worker_count()
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
