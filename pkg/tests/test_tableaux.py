from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bead_atlas.shapes import profile_from_partitions, square_profile
from bead_atlas.solver.analysis import square_level_line_oracle, square_oracle
from bead_atlas.solver.grid import validate_field
from bead_atlas.tableaux import (BeadConfiguration, Tableau, beads_to_tableau, check_interlacing,
                                 count_syt, empirical_density, empirical_height, enumerate_syt,
                                 level_diagram, orders_to_codes, sample_syt, sample_syt_many,
                                 sample_syt_orders, tableau_to_beads)

from oracles import contained, count_linear_extensions, partitions, syt_bruteforce


def small_shapes(max_outer, max_n):
    for s in range(1, max_outer + 1):
        for lam in partitions(s):
            for k in range(0, s):
                if s - k > max_n:
                    continue
                for mu in partitions(k):
                    if contained(mu, lam):
                        yield lam, mu


# --- counting -----------------------------------------------------------------

@pytest.mark.parametrize("outer,inner,expected", [((2, 2), (), 2), ((1,), (), 1), ((2, 2), (1,), 2),
                                                  ((3, 2), (), 5)])
def test_count_examples(outer, inner, expected):
    assert count_syt(profile_from_partitions(outer, inner)) == expected


def test_count_matches_linear_extension_dp():
    n = 0
    for lam, mu in small_shapes(10, 10):
        assert count_syt((lam, mu)) == count_linear_extensions(lam, mu), (lam, mu)
        n += 1
    assert n > 1000


def test_count_large_is_exact_integer():
    v = count_syt(square_profile(12))
    assert isinstance(v, int) and v.bit_length() > 200


def test_count_rejects_empty():
    with pytest.raises(ValueError):
        count_syt(((2,), (2,)))


def test_enumerate_matches_bruteforce():
    for lam, mu in small_shapes(7, 7):
        got = sorted(tuple(v for _, v in sorted(t.items())) for t in enumerate_syt((lam, mu)))
        ref = sorted(syt_bruteforce(lam, mu))
        assert got == ref


# --- sampling ------------------------------------------------------------------

def _freqs(shape, k, seed):
    c = Counter(sample_syt_many(shape, k, seed))
    return c, enumerate_syt(shape)


@pytest.mark.parametrize("shape,m", [(((2, 2), ()), 2), (((3, 2), ()), 5)])
def test_sampler_frequencies_3sigma(shape, m):
    k = 10_000
    c, all_t = _freqs(shape, k, 11)
    assert len(all_t) == m and set(c) <= set(all_t)
    p = 1 / m
    sigma = np.sqrt(p * (1 - p) / k)
    for t in all_t:
        assert abs(c[t] / k - p) <= 3 * sigma


def test_sampler_single_box():
    for seed in range(20):
        t = sample_syt(((1,), ()), seed)
        assert t.rows == ((1,),)


def test_sampler_skew_frequencies():
    shape = ((3, 2), (1,))
    k = 20_000
    c, all_t = _freqs(shape, k, 5)
    assert len(all_t) == count_syt(shape) == 5
    res = stats.chisquare([c[t] for t in all_t])
    assert res.pvalue > 0.001


def test_samples_are_standard():
    for shape in (((4, 3, 1), ()), ((5, 4, 4, 2), (2, 1)), ((6, 6), (3,))):
        for t in sample_syt_many(shape, 50, 3):
            assert t.is_standard()


def test_codes_follow_skew_cells_order():
    shape = ((3, 2), (1,))
    r, c = sample_syt_orders(shape, 30, 9)
    codes = orders_to_codes(shape, r, c)
    for i, t in enumerate(sample_syt_many(shape, 30, 9)):
        assert tuple(codes[i]) == tuple(v for _, v in t.items())


def test_sampler_deterministic_for_seed():
    a = sample_syt_many(((5, 3, 2), ()), 20, 42)
    b = sample_syt_many(((5, 3, 2), ()), 20, 42)
    assert a == b


# --- bijection --------------------------------------------------------------------

def test_2x2_bead_counts_and_interlacing():
    for t in enumerate_syt(((2, 2), ())):
        b = tableau_to_beads(t, 0)
        assert [a.size for a in b.threads] == [1, 2, 1]
        assert check_interlacing(b) == []
        assert beads_to_tableau(b) == t


def test_hand_checked_rank_assignment():
    b = BeadConfiguration((2, 2), (), (np.array([0.3]), np.array([0.1, 0.4]), np.array([0.2])))
    assert beads_to_tableau(b).rows == ((1, 2), (3, 4))


def test_single_box_bead():
    b = BeadConfiguration((1,), (), (np.array([0.7]),))
    assert beads_to_tableau(b).rows == ((1,),)


def test_duplicate_coordinates_rejected():
    with pytest.raises(ValueError):
        BeadConfiguration((2, 2), (), (np.array([0.3]), np.array([0.1, 0.4]), np.array([0.3])))


def test_bead_marginal_is_beta():
    t = sample_syt(((3, 2, 1), ()), 0)
    N = t.n_boxes
    gen = np.random.default_rng(7)
    draws = np.array([np.concatenate(tableau_to_beads(t, gen).threads) for _ in range(10_000)])
    # rank of each bead, listed in thread-major order
    b0 = tableau_to_beads(t, 0)
    rank = beads_to_tableau(b0)
    from bead_atlas.tableaux import _thread_cells
    cells = [c for th in _thread_cells(t.outer, t.inner) for c in th]
    for pos, cell in enumerate(cells):
        k = rank.entry(*cell)
        assert stats.kstest(draws[:, pos], stats.beta(k, N + 1 - k).cdf).pvalue > 0.01 / N


@st.composite
def shapes_up_to_30(draw):
    rows = draw(st.lists(st.integers(1, 8), min_size=1, max_size=8))
    outer = tuple(sorted(rows, reverse=True))
    while sum(outer) > 30:
        outer = outer[:-1]
    cut = draw(st.lists(st.integers(0, 8), max_size=len(outer)))
    inner = tuple(sorted((min(c, outer[i]) for i, c in enumerate(cut)), reverse=True))
    inner = tuple(min(v, outer[i]) for i, v in enumerate(inner))
    while inner and inner[-1] == 0:
        inner = inner[:-1]
    if sum(inner) == sum(outer):
        inner = ()
    return outer, inner


@settings(max_examples=200, deadline=None)
@given(shapes_up_to_30(), st.integers(0, 2 ** 32 - 1))
def test_bijection_round_trip(shape, seed):
    t = sample_syt(shape, seed)
    b = tableau_to_beads(t, seed + 1)
    assert check_interlacing(b) == []
    assert beads_to_tableau(b) == t


def test_configuration_json_round_trip():
    t = sample_syt(((4, 2), (1,)), 1)
    b = tableau_to_beads(t, 2)
    b2 = BeadConfiguration.from_json(b.to_json())
    assert all(np.array_equal(u, v) for u, v in zip(b.threads, b2.threads))
    assert Tableau.from_json(t.to_json()) == t


# --- height and level statistics ------------------------------------------------------

def test_empirical_height_single_bead_step():
    b = BeadConfiguration((1,), (), (np.array([0.7]),))
    f = empirical_height(b, ny=10)
    col = f.values[1]
    assert np.allclose(np.diff(col), [0] * 6 + [0.5] + [0] * 3)


def test_empirical_height_empty_thread_constant():
    t = sample_syt(((2, 1), (1,)), 0)
    b = tableau_to_beads(t, 0)
    assert [a.size for a in b.threads] == [1, 0, 1]
    f = empirical_height(b, ny=20)
    assert np.all(f.values[2] == f.values[2, 0])


def test_empirical_height_admissible():
    for shape in (((6,) * 6, ()), ((5, 4, 2), (1,)), ((3, 3), (2,))):
        for seed in range(5):
            b = tableau_to_beads(sample_syt(shape, seed), seed)
            f = empirical_height(b, ny=30)
            assert validate_field(f) == []


def test_level_diagram_cell_counts():
    t = sample_syt(((5, 4, 4, 1), ()), 3)
    N = t.n_boxes
    for k in range(1, N):
        L = level_diagram(t, k / N)
        assert sum(L.partition) == k == L.k


def test_level_diagram_full_at_alpha_to_one():
    p = square_profile(4)
    t = sample_syt(p, 0)
    L = level_diagram(t, 1 - 1e-12)
    assert L.partition == (4, 4, 4, 4)
    assert np.allclose(L.z, p.eval_up(L.x), atol=1e-15)


def test_level_diagram_lipschitz_and_sandwiched():
    p = profile_from_partitions((6, 5, 5, 2), (2,))
    for seed in range(10):
        t = sample_syt(p, seed)
        for a in (0.1, 0.5, 0.9):
            L = level_diagram(t, a)
            assert np.all(np.abs(np.diff(L.z)) <= np.diff(L.x) + 1e-12)
            assert np.all(L.z >= p.eval_low(L.x) - 1e-12)
            assert np.all(L.z <= p.eval_up(L.x) + 1e-12)


def test_level_diagram_rejects_alpha():
    t = sample_syt(((2, 1), ()), 0)
    for a in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            level_diagram(t, a)


def test_density_mass():
    for shape in (((4, 4, 4, 4), ()), ((5, 3), (1,))):
        samples = [tableau_to_beads(t, i) for i, t in enumerate(sample_syt_many(shape, 7, 1))]
        xs, ys, d = empirical_density(samples, 13)
        N = samples[0].n_beads
        n = samples[0].n_threads
        assert d.sum() * (1 / (n + 1)) * (1 / 13) == pytest.approx(N / (n + 1) ** 2, rel=1e-13)


def test_density_single_bead_indicator():
    b = BeadConfiguration((1,), (), (np.array([0.72]),))
    xs, ys, d = empirical_density([b], 10)
    assert d.shape == (1, 10)
    assert np.count_nonzero(d) == 1 and d[0, 7] > 0


def test_density_requires_samples():
    with pytest.raises(ValueError):
        empirical_density([], 5)


# --- Monte Carlo against the square limit shape ------------------------------------------

SQ41 = ((21,) * 21, ())


def mean_height_error(seed, count=200):
    gen = np.random.default_rng(seed)
    acc = None
    for t in sample_syt_many(SQ41, count, gen):
        f = empirical_height(tableau_to_beads(t, gen))
        acc = f.values.copy() if acc is None else acc + f.values
    acc /= count
    X, Y = np.meshgrid(f.x, f.y, indexing="ij")
    return float(np.abs(acc - square_oracle(X, Y)).max())


def test_mc_mean_height_n41():
    assert mean_height_error(0) < 0.05


def test_mc_density_n41():
    gen = np.random.default_rng(1)
    samples = [tableau_to_beads(t, gen) for t in sample_syt_many(SQ41, 500, gen)]
    ny = 42
    xs, ys, d = empirical_density(samples, ny)
    # cell averages of dh0/dy from differences of the closed form at the bin edges
    edges = np.linspace(0, 1, ny + 1)
    H = square_oracle(xs[:, None], edges[None, :])
    rho = np.diff(H, axis=1) * ny
    l1 = np.abs(d - rho).sum() / 42 / ny
    assert l1 < 0.1


def test_mc_level_line_1600():
    t = sample_syt(((40,) * 40, ()), 0)
    L = level_diagram(t, 0.5)
    assert np.abs(L.z - square_level_line_oracle(L.x, 0.5)).max() < 0.06
