"""Poisson-Dirichlet machinery: moments, hit probabilities, occupancy draws."""
import mpmath
import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma as gamma_fn

from fppnet import pdlaw
from fppnet.degrees import DegreeLaw
from fppnet.pdlaw import (
    cell_hit_probability,
    check_f_tail_bound,
    f_joint,
    f_joint_matrix,
    pd_moment_exact,
    pd_power_sum_samples,
    sample_cell_occupancy,
    sample_occupancy_pair,
    sample_pd,
    sample_tail_cell,
)


def test_sample_pd_invariants():
    rng = np.random.default_rng(0)
    pd = sample_pd(1.5, 500, rng)
    assert (np.diff(pd.xi) < 0).all()
    assert (np.diff(pd.P) < 0).all()
    assert 0 < pd.P[0] < 1
    assert pd.P.sum() + pd.tail_mass == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        sample_pd(2.0, 500, rng)
    with pytest.raises(ValueError):
        sample_pd(1.5, 5, rng)


def test_eta_stable_under_doubling_K():
    # tail correction makes the normalization nearly independent of K
    changes = []
    for seed in range(100):
        r1 = np.random.default_rng(np.random.SeedSequence(seed))
        gam = np.cumsum(r1.exponential(size=2000))
        xi = gam**-2.0  # tau = 1.5; tail correction is gamma^-1 there
        eta_k = xi[:1000].sum() + gam[999] ** -1.0
        eta_2k = xi.sum() + gam[-1] ** -1.0
        changes.append(abs(eta_2k / eta_k - 1.0))
    assert np.median(changes) < 0.005


def test_tail_mass_shrinks_with_K():
    rng = np.random.default_rng(1)
    for tau in (1.2, 1.5):
        tm = {}
        for K in (250, 500):
            tm[K] = np.median(
                [sample_pd(tau, K, np.random.default_rng(s)).tail_mass for s in range(50)]
            )
        assert tm[500] <= tm[250] / 2 * 1.1, (tau, tm)


def test_moment_exact_values():
    assert pd_moment_exact(1.5, 2) == pytest.approx(0.5)
    assert pd_moment_exact(1.5, 3) == pytest.approx(0.375)
    assert pd_moment_exact(1.2, 2) == pytest.approx(0.8)
    # boundary: tau -> 1 degenerates to a single cell
    assert pd_moment_exact(1.0001, 2) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        pd_moment_exact(1.5, 1)


def test_moment_exact_matches_quadrature():
    # independent oracle: direct numerical integration of the density form
    for tau in (1.2, 1.5, 1.8):
        a = tau - 1.0
        for r in (2, 3, 4):
            val, _ = integrate.quad(
                lambda u: u ** (r - a - 1) * (1 - u) ** (a - 1), 0, 1
            )
            val /= gamma_fn(a) * gamma_fn(1 - a)
            assert pd_moment_exact(tau, r) == pytest.approx(val, rel=1e-9), (tau, r)


@pytest.mark.parametrize("tau", [1.2, 1.5, 1.8])
def test_power_sums_match_exact_moments(tau):
    rng = np.random.default_rng(17)
    for r in (2, 3, 4):
        s = pd_power_sum_samples(tau, 800, r, 30_000, rng)
        se = s.std() / np.sqrt(len(s))
        assert abs(s.mean() - pd_moment_exact(tau, r)) <= 3 * se, (tau, r)


def test_hit_probability_against_direct_series():
    # direct pmf summation is reliable once the tail bound is negligible
    law = DegreeLaw(1.5)
    k = np.arange(1, 400_001, dtype=float)
    pmf = law.pmf(k)
    for s in (1e-4, 1e-3, 0.05, 0.2, 0.4, 0.7, 0.95):
        brute = 1.0 - float(np.sum(pmf * (1 - s) ** k))
        assert cell_hit_probability(law, s) == pytest.approx(brute, abs=1e-10), s


def test_hit_probability_scale_c_and_asymptotics():
    law = DegreeLaw(1.6, scale_c=0.5)
    k = np.arange(1, 400_001, dtype=float)
    pmf = law.pmf(k)
    for s in (1e-3, 0.1, 0.6):
        brute = 1.0 - float(np.sum(pmf * (1 - s) ** k))
        assert cell_hit_probability(law, s) == pytest.approx(brute, abs=1e-9)
    # small-s asymptotics: h(s) ~ c Gamma(2-tau) s^(tau-1)
    s = 1e-8
    lead = 0.5 * gamma_fn(1 - 0.6) * s**0.6
    assert cell_hit_probability(law, s) == pytest.approx(lead, rel=5e-3)


def test_hit_probability_scale_c_above_one():
    law = DegreeLaw(1.5, scale_c=2.0)  # survival clamps at 1 up to k = 4
    assert float(law.survival(3)) == 1.0
    k = np.arange(1, 400_001, dtype=float)
    pmf = law.pmf(k)
    for s in (1e-3, 0.2, 0.8):
        brute = 1.0 - float(np.sum(pmf * (1 - s) ** k))
        assert cell_hit_probability(law, s) == pytest.approx(brute, abs=1e-9)


def test_polylog_expansion_matches_mpmath():
    from fppnet.pdlaw import _polylog_near_one

    for alpha in (0.2, 0.5, 0.8):
        for x in (0.9999, 0.99, 0.8, 0.7):
            mine = _polylog_near_one(alpha, np.array([x]))[0]
            ref = float(mpmath.polylog(alpha, x))
            assert mine == pytest.approx(ref, rel=1e-10), (alpha, x)


def test_f_joint_basic_properties():
    law = DegreeLaw(1.5)
    assert f_joint(0.0, 0.7, law) == 0.0
    assert f_joint(0.3, 0.2, law) == f_joint(0.2, 0.3, law)
    with pytest.raises(ValueError):
        f_joint(0.6, 0.6, law)
    # monotone in each argument on a grid
    grid = np.linspace(0.0, 0.45, 8)
    vals = np.array([[f_joint(float(s), float(t), law) for t in grid] for s in grid])
    assert (np.diff(vals, axis=0) >= -1e-12).all()
    assert (np.diff(vals, axis=1) >= -1e-12).all()


def test_f_joint_monte_carlo_event():
    # two cells of mass 1/2: event that D trials hit both; counts via binomial
    law = DegreeLaw(1.5)
    rng = np.random.default_rng(3)
    u = rng.random(10**6)
    from fppnet.degrees import _invert

    d = _invert(law, u)
    c1 = rng.binomial(d, 0.5)
    emp = ((c1 > 0) & (c1 < d)).mean()
    assert f_joint(0.5, 0.5, law) == pytest.approx(emp, abs=0.003)


def test_f_joint_matrix_consistency():
    law = DegreeLaw(1.5)
    pd = sample_pd(1.5, 60, np.random.default_rng(4))
    f = f_joint_matrix(pd.P, law)
    assert f.shape == (60, 60)
    assert np.allclose(f, f.T)
    assert (np.diag(f) == 0).all()
    for i, j in ((0, 1), (5, 30), (58, 59)):
        assert f[i, j] == pytest.approx(f_joint(float(pd.P[i]), float(pd.P[j]), law))


def test_occupancy_degree_one_and_dominance():
    law = DegreeLaw(1.5, scale_c=0.4)  # atom at D = 1 with mass 0.6
    rng = np.random.default_rng(5)
    pd = sample_pd(1.5, 100, rng)
    top_hits = 0
    other_hits = 0
    other = int(np.argsort(-pd.P)[1])
    for _ in range(4000):
        occ = sample_cell_occupancy(pd, law, rng)
        assert occ.distinct == len(occ.cells)
        assert len(np.unique(occ.cells)) == occ.distinct
        assert occ.chosen in occ.cells
        top_hits += occ.chosen == 0
        other_hits += occ.chosen == other
    assert top_hits >= other_hits


def test_occupancy_d1_always_single_cell():
    law = DegreeLaw(1.5, scale_c=1e-6)  # D = 1 with mass ~ 1
    rng = np.random.default_rng(6)
    pd = sample_pd(1.5, 50, rng)
    for _ in range(200):
        occ = sample_cell_occupancy(pd, law, rng)
        if occ.distinct == 1:
            assert occ.chosen == occ.cells[0]
    # mass of D=1 under this law
    assert float(law.pmf(1)) > 0.999


def test_occupancy_pair_disjoint_tail_labels():
    law = DegreeLaw(1.9)  # fat tail mass at small K makes synthetic cells common
    rng = np.random.default_rng(7)
    pd = sample_pd(1.9, 20, rng)
    seen_common = 0
    for _ in range(300):
        occ1, occ2, common = sample_occupancy_pair(pd, law, rng)
        syn1 = set(occ1.cells[occ1.cells >= pd.K].tolist())
        syn2 = set(occ2.cells[occ2.cells >= pd.K].tolist())
        assert not (syn1 & syn2)
        assert common <= min(occ1.distinct, occ2.distinct)
        seen_common += common > 0
    assert seen_common > 0


def test_cross_estimator_hub_attachment(batch3000):
    # E[1 - (1-p)^De] at p = 1/2 estimated two independent ways: the limit
    # occupancy sampler, and the erased degrees of uniform finite-n vertices
    # (which converge in distribution to the distinct-cell count)
    law = DegreeLaw(1.5)
    rng = np.random.default_rng(8)
    vals = []
    for _ in range(20_000):
        pd = sample_pd(1.5, 300, rng)
        occ = sample_cell_occupancy(pd, law, rng)
        vals.append(1.0 - 0.5**occ.distinct)
    limit_est = float(np.mean(vals))
    d_er = batch3000.pair_array("d_er_a1")
    finite_est = float((1.0 - 0.5**d_er).mean())
    assert abs(limit_est - finite_est) <= 0.05, (limit_est, finite_est)


def test_tail_cell_sampler():
    rng = np.random.default_rng(9)
    pd = sample_pd(1.8, 50, rng)
    idx, xi = sample_tail_cell(pd, rng)
    assert idx >= pd.K
    assert 0 < xi < pd.xi[-1]
    draws = np.array([sample_tail_cell(pd, rng)[1] for _ in range(3000)])
    assert (draws < pd.xi[-1]).all()
    # size-biased mean over the tail: with xi(g) = g^(-1/(tau-1)) and unit
    # arrival rate, E[xi] = int xi^2 / int xi = xi(Gamma_K) / 6 at tau = 1.8
    want = pd.gamma_K ** (-1.0 / 0.8) / 6.0
    assert 0.5 * want <= draws.mean() <= 1.8 * want, (draws.mean(), want)


def test_f_tail_bound_report():
    law = DegreeLaw(1.5)
    holds = 0
    for seed in range(100):
        pd = sample_pd(1.5, 150, np.random.default_rng(seed))
        rep = check_f_tail_bound(pd, law, c_cal=10.0)
        holds += rep.holds
        assert rep.pairs_checked > 0
    assert holds >= 95
    # monotone in the calibration constant
    pd = sample_pd(1.5, 150, np.random.default_rng(0))
    r1 = check_f_tail_bound(pd, law, c_cal=1.0)
    r2 = check_f_tail_bound(pd, law, c_cal=10.0)
    assert r2.max_ratio == pytest.approx(r1.max_ratio / 10.0)
    with pytest.raises(ValueError):
        check_f_tail_bound(sample_pd(1.5, 99, np.random.default_rng(1)), law, 1.0)


def test_hit_probability_power_bound():
    # h(s) <= c' s^(tau-1) with a small constant, all the way down
    law = DegreeLaw(1.5)
    s = np.logspace(-9, -0.5, 40)
    h = cell_hit_probability(law, s)
    assert (h <= 2.0 * s**0.5).all()


def test_point_process_ratio_converges():
    # (i / Gamma_i)^(1/(tau-1)) -> 1 along the realization
    vals = []
    for seed in range(60):
        pd = sample_pd(1.5, 400, np.random.default_rng(seed))
        gam = pd.xi ** -(pd.tau - 1.0)  # invert xi = Gamma^(-1/(tau-1))
        i = pd.K // 2
        vals.append((i / gam[i - 1]) ** (1.0 / (pd.tau - 1.0)))
    med = float(np.median(vals))
    assert 0.9 <= med <= 1.1
