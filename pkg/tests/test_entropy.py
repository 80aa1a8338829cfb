import math

import numpy as np
import pytest

from bead_atlas.entropy import (PI, DualNonConvergence, RotatedSlope, Slope, WeightParams,
                                combinatorial_entropy_uniform, dual_stationary_point, ent, ent_grad,
                                ent_honeycomb, ent_tilde, entropy_table, free_energy, free_energy_half,
                                free_energy_legendre, jacobian, legendre_surface_tension, lobachevsky,
                                rotate, scaled_dimer_entropy, unrotate)
from bead_atlas.shapes import profile_from_partitions, square_profile

from oracles import lobachevsky_mp, lobachevsky_quad_mp, square_entropy_density

CORRECTED_SQUARE = 0.25 * (1.5 - math.log(2))


# --- ent ----------------------------------------------------------------------

def test_ent_zero_at_t0():
    for s in np.linspace(-0.5, 0.5, 11):
        assert ent(s, 0.0) == 0.0


def test_ent_at_one_over_pi():
    assert ent(0.0, 1 / PI) == pytest.approx(1 / PI, abs=1e-15)
    assert ent(0.0, 1 / PI) == pytest.approx(0.3183099, abs=1e-7)


def test_ent_minus_inf_at_edge():
    assert ent(0.5, 1.0) == -math.inf
    assert ent(-0.5, 0.3) == -math.inf


def test_ent_argmax_grid_scan():
    t = np.linspace(1e-6, 2, 2_000_001)
    v = ent(0.0, t)
    k = int(np.argmax(v))
    assert abs(t[k] - 1 / PI) < 2e-6
    assert v[k] == pytest.approx(1 / PI, abs=1e-11)


def test_ent_concave_random_pairs():
    rng = np.random.default_rng(0)
    n = 100_000
    s1, s2 = rng.uniform(-0.5, 0.5, (2, n))
    t1, t2 = rng.uniform(1e-6, 3, (2, n))
    mid = ent((s1 + s2) / 2, (t1 + t2) / 2)
    assert np.all(mid >= (ent(s1, t1) + ent(s2, t2)) / 2 - 1e-12)


def test_ent_grad_matches_finite_differences():
    rng = np.random.default_rng(1)
    s = rng.uniform(-0.45, 0.45, 50)
    t = rng.uniform(0.05, 2, 50)
    gs, gt = ent_grad(s, t)
    h = 1e-6
    assert np.allclose(gs, (ent(s + h, t) - ent(s - h, t)) / (2 * h), atol=1e-6)
    assert np.allclose(gt, (ent(s, t + h) - ent(s, t - h)) / (2 * h), atol=1e-6)


def test_active_part_identity_and_bound():
    rng = np.random.default_rng(2)
    s = rng.uniform(-0.49, 0.49, 10_000)
    t = rng.uniform(1e-9, 5, 10_000)
    lhs = (1 + np.log(np.cos(PI * s) / (PI * t))) * t
    rhs = t * np.log(np.cos(PI * s) / t) + t * (1 - math.log(PI))
    assert np.allclose(lhs, rhs, atol=1e-12, rtol=1e-12)
    rest = ent(s, t) - t * (1 + np.log(np.cos(PI * s)) - math.log(PI))
    assert np.all(rest <= 1 / math.e + 1e-15)


def test_slope_types_validate():
    Slope(0.5, 0.0)
    with pytest.raises(ValueError):
        Slope(0.6, 1.0)
    with pytest.raises(ValueError):
        Slope(0.0, -1.0)
    RotatedSlope(0.0, 1.0)
    with pytest.raises(ValueError):
        RotatedSlope(0.3, 0.5)


# --- rotation -----------------------------------------------------------------

def test_rotate_examples():
    assert tuple(map(float, rotate(0.0, 1.0))) == (0.0, 0.0)
    st, tt = rotate(0.3, 0.0)
    assert float(st) == 0.3 and float(tt) == -1.0


def test_rotate_round_trip():
    rng = np.random.default_rng(3)
    s = rng.uniform(-0.5, 0.5, 10_000)
    t = rng.uniform(0, 10, 10_000)
    s2, t2 = unrotate(*rotate(s, t))
    assert np.abs(s2 - s).max() <= 1e-14
    assert np.abs(t2 - t).max() <= 1e-14 * max(1.0, t.max())


def test_unrotate_rejects_tt_one():
    with pytest.raises(ValueError):
        unrotate(0.0, 1.0)


def test_rotated_domain_maps_into_slope_domain():
    rng = np.random.default_rng(4)
    s = rng.uniform(-0.5, 0.5, 1000)
    t = rng.uniform(0, 10, 1000)
    st, tt = rotate(s, t)
    assert np.all(np.abs(2 * st) <= 1 - tt + 1e-12)
    assert np.all((tt >= -1) & (tt < 1))


def test_ent_tilde_change_of_variables():
    rng = np.random.default_rng(5)
    s = rng.uniform(-0.49, 0.49, 10_000)
    t = rng.uniform(1e-3, 10, 10_000)
    st, tt = rotate(s, t)
    assert np.allclose(ent_tilde(st, tt), ent(s, t) * jacobian(tt), atol=1e-10, rtol=1e-10)


def test_ent_tilde_one_over_pi_point():
    st, tt = rotate(0.0, 1 / PI)
    assert float(ent_tilde(st, tt)) == pytest.approx(float(ent(0.0, 1 / PI) * jacobian(tt)), abs=1e-12)


def test_ent_tilde_edges():
    assert ent_tilde(0.2, -1.0) == 0.0
    assert ent_tilde(0.0, 1.0) == -math.inf
    vals = [float(ent_tilde(0.0, 1 - 10.0 ** -k)) for k in range(2, 12)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # the approach to -inf is logarithmically slow
    assert vals[-1] < 0 and float(ent_tilde(0.0, 1 - 1e-300)) < -0.5


# --- Lobachevsky -----------------------------------------------------------------

def test_lobachevsky_zero_points():
    assert lobachevsky(0.0) == 0.0
    assert abs(lobachevsky(PI)) < 1e-12
    assert abs(lobachevsky(PI / 2)) < 1e-12


def test_lobachevsky_half_pi_against_quadrature():
    assert abs(lobachevsky(PI / 2) - lobachevsky_quad_mp(PI / 2)) < 1e-10


@pytest.mark.parametrize("theta", [0.1, 0.5, 1.0, PI / 3, PI / 6, 2.0, 3.0, -0.7, 4.5, 10.0, -12.3])
def test_lobachevsky_against_clausen(theta):
    assert abs(lobachevsky(theta) - lobachevsky_mp(theta)) <= 1e-10


def test_lobachevsky_against_direct_quadrature():
    for theta in (0.3, 1.2, 2.5, 3.5):
        assert abs(lobachevsky(theta) - lobachevsky_quad_mp(theta)) <= 1e-10


def test_lobachevsky_odd_periodic():
    th = np.linspace(-7, 7, 57)
    assert np.allclose(lobachevsky(-th), -lobachevsky(th), atol=1e-13)
    assert np.allclose(lobachevsky(th + PI), lobachevsky(th), atol=1e-12)


# --- honeycomb entropy -------------------------------------------------------------

def test_honeycomb_max_at_triangle_centre():
    t = np.linspace(0, 1, 301)
    best = (-np.inf, None)
    for tv in t:
        s = np.linspace(-(1 - tv) / 2, (1 - tv) / 2, 61)
        v = ent_honeycomb(s, np.full_like(s, tv))
        k = int(np.argmax(v))
        if v[k] > best[0]:
            best = (float(v[k]), (float(s[k]), float(tv)))
    val, (s0, t0) = best
    peak = 3 * lobachevsky(PI / 3) / PI
    assert abs(s0) < 1e-9 and abs(t0 - 1 / 3) < 1 / 300
    assert val == pytest.approx(peak, abs=1e-6)
    assert float(ent_honeycomb(0.0, 1 / 3)) == pytest.approx(peak, abs=1e-12)


def test_honeycomb_extreme_point_zero():
    assert abs(float(ent_honeycomb(0.5, 0.0))) < 1e-12
    assert abs(float(ent_honeycomb(0.0, 1.0))) < 1e-12


def test_honeycomb_symmetric_in_s():
    rng = np.random.default_rng(6)
    t = rng.uniform(0, 1, 1000)
    s = rng.uniform(-1, 1, 1000) * (1 - t) / 2
    assert np.abs(ent_honeycomb(s, t) - ent_honeycomb(-s, t)).max() <= 1e-12


def test_honeycomb_outside_triangle():
    with pytest.raises(ValueError):
        ent_honeycomb(0.4, 0.5)
    with pytest.raises(ValueError):
        ent_honeycomb(0.0, 1.2)


# --- scaled limit ------------------------------------------------------------------

def test_scaled_limit_sequence():
    target = 1 / PI
    gaps = [abs(float(scaled_dimer_entropy(0.0, 1 / PI, m)) - target) for m in (10, 100, 1000, 10_000)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-3


def test_scaled_limit_at_t0():
    for m in (1, 10, 1000):
        assert float(scaled_dimer_entropy(0.3, 0.0, m)) == 0.0


def test_scaled_limit_uniform_on_compact():
    s, t = np.meshgrid(np.linspace(-0.4, 0.4, 41), np.linspace(0.1, 2, 40), indexing="ij")
    assert np.abs(scaled_dimer_entropy(s, t, 10_000) - ent(s, t)).max() <= 1e-2


def test_scaled_limit_small_t_upper_bound():
    eps, delta, M = 0.01, 1e-3, 1000
    s = np.r_[np.linspace(-0.499, 0.499, 41), -0.499, 0.499]
    for m in (M, 10 * M, 100 * M):
        for t in np.geomspace(1e-9, delta, 15):
            v = scaled_dimer_entropy(s, np.full_like(s, t), m)
            assert np.all(v < eps)


# --- free energy and duality -------------------------------------------------------------

def test_free_energy_gamma_zero():
    for a in (0.5, 1.0, 3.0):
        assert free_energy(a, 0.0) == pytest.approx(2 * a / PI, abs=1e-15)


def test_free_energy_high_precision():
    import mpmath as mp
    mp.mp.dps = 40
    ref = 2 / mp.pi * (mp.mpf("0.5") * mp.acos(-mp.mpf("0.5")) + mp.sqrt(mp.mpf("0.75")))
    assert free_energy(1.0, 0.5) == pytest.approx(float(ref), abs=1e-15)
    assert free_energy_half(1.0, 0.5) == pytest.approx(float(ref) / 2, abs=1e-15)


def test_free_energy_one_sided_limits():
    a = 1.3
    up = [free_energy(a, 1 - 10.0 ** -k) for k in (4, 8, 12)]
    dn = [free_energy(a, -1 + 10.0 ** -k) for k in (4, 8, 12)]
    assert abs(up[-1] - 2 * a) < 1e-5 and abs(dn[-1]) < 1e-5
    assert abs(up[-1] - 2 * a) < abs(up[0] - 2 * a)
    with pytest.raises(ValueError):
        free_energy(a, 1.0)


def test_weight_params_legendre_variables():
    w = WeightParams(1.7, -0.4)
    assert w.A == pytest.approx(math.log(1.7))
    assert w.B == pytest.approx(1.7 * 0.4)
    w2 = WeightParams.from_legendre(w.A, w.B)
    assert w2.alpha == pytest.approx(1.7) and w2.gamma == pytest.approx(-0.4)


def test_free_energy_legendre_matches_weights():
    # F~(A, B) relates to free_energy_half(alpha, gamma) with the linear B/2 shift
    for a, g in ((1.0, 0.0), (0.7, 0.3), (2.0, -0.6)):
        w = WeightParams(a, g)
        assert free_energy_legendre(w.A, w.B) == pytest.approx(free_energy_half(a, g) + w.B / 2, abs=1e-13)


def test_duality_examples():
    assert legendre_surface_tension(0.0, 1 / PI) == pytest.approx(-1 / PI, abs=1e-6)
    assert legendre_surface_tension(0.3, 0.8) == pytest.approx(-float(ent(0.3, 0.8)), abs=1e-6)


def test_duality_symmetric():
    for s, t in ((0.2, 0.5), (0.4, 1.5), (0.05, 0.01)):
        assert abs(legendre_surface_tension(s, t) - legendre_surface_tension(-s, t)) <= 1e-8


def test_duality_grid():
    S = np.linspace(-0.45, 0.45, 20)
    T = np.linspace(0.1, 2.0, 20)
    err = max(abs(legendre_surface_tension(s, t) + float(ent(s, t))) for s in S for t in T)
    assert err <= 1e-6


def test_duality_neutral_start_reaches_closed_form_point():
    s, t = 0.35, 1.7
    A, B = dual_stationary_point(s, t)
    # the closed form is the maximiser: its value equals -ent
    from bead_atlas.entropy import _dual_parts
    val, g, _ = _dual_parts(A, B, s, t)
    assert np.abs(g).max() < 1e-12
    assert val == pytest.approx(legendre_surface_tension(s, t), abs=1e-10)


def test_duality_nonconvergence_carries_trace():
    with pytest.raises(DualNonConvergence) as ei:
        legendre_surface_tension(0.45, 5.0, max_iter=1)
    assert len(ei.value.trace) >= 1


def test_duality_rejects_boundary_slopes():
    with pytest.raises(ValueError):
        legendre_surface_tension(0.5, 1.0)
    with pytest.raises(ValueError):
        legendre_surface_tension(0.0, 0.0)


# --- combinatorial entropy ---------------------------------------------------------------

def test_comb_entropy_2x2():
    v = combinatorial_entropy_uniform(profile_from_partitions((2, 2)))
    assert v == pytest.approx(math.log(2) - math.log(24) + 4 * math.log(3), abs=1e-13)


def test_comb_entropy_single_box():
    assert combinatorial_entropy_uniform(profile_from_partitions((1,))) == 0.0


def test_comb_entropy_matches_hook_sum():
    for k in (3, 10, 25):
        n = 2 * k - 1
        v = combinatorial_entropy_uniform(square_profile(k)) / n ** 2
        assert v == pytest.approx(square_entropy_density(k), abs=1e-12)


def test_square_trend_towards_corrected_limit():
    # S/n^2 for k x k squares; the limit of the hook sum is (3/2 - ln 2)/4
    ks = (10, 20, 40)
    vals = [combinatorial_entropy_uniform(square_profile(k)) / (2 * k - 1) ** 2 for k in ks]
    gaps = [abs(v - CORRECTED_SQUARE) for v in vals]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    # three-term Richardson in 1/n lands on the corrected constant
    ext = square_entropy_density(160) + (square_entropy_density(160) - square_entropy_density(80))
    assert abs(ext - CORRECTED_SQUARE) < 2e-3


def test_entropy_table_rows():
    rows = entropy_table([0.0, 0.2], [0.5, 1.0])
    assert len(rows) == 4
    for s, t, e, sig, gap in rows:
        assert e == pytest.approx(float(ent(s, t)))
        assert sig == pytest.approx(-e, abs=1e-6)
        assert abs(gap) < 1e-2
