"""Limit networks: edge laws, truncation stability, the two hopcount estimators."""
import numpy as np
import pytest

from fppnet.degrees import DegreeLaw
from fppnet.limitnet import (
    LimitVertex,
    build_limit,
    estimate_pi,
    fpp_limit,
    fpp_limit_endpoints,
    hopcount_chain,
    restrict,
    sample_endpoints,
    sample_limit_hopcount,
)
from fppnet.pdlaw import PDRealization, sample_pd


def _pd_fixed(P, tau=1.5):
    """Hand-built realization with prescribed masses (testing only)."""
    P = np.asarray(P, dtype=float)
    eta = 10.0
    xi = P * eta
    return PDRealization(
        tau=tau,
        K=len(P),
        xi=xi,
        gamma_K=float(xi[-1] ** -(1 / (tau - 1))),
        eta=eta,
        P=P,
        tail_mass=float(1.0 - P.sum()),
    )


def test_or_kind_edge_rates():
    rng = np.random.default_rng(0)
    pd = sample_pd(1.5, 60, rng)
    # mean of the (0,1) entry over fresh draws equals eta/(xi_0 xi_1)
    draws = np.array(
        [build_limit(pd, "or", np.random.default_rng(s)).weights[0, 1] for s in range(4000)]
    )
    want = pd.eta / (pd.xi[0] * pd.xi[1])
    assert draws.mean() == pytest.approx(want, rel=0.05)


def test_er_kind_survival_transform():
    rng = np.random.default_rng(1)
    pd = sample_pd(1.5, 40, rng)
    law = DegreeLaw(1.5)
    from fppnet.pdlaw import f_joint

    f01 = f_joint(float(pd.P[0]), float(pd.P[1]), law)
    draws = np.array(
        [
            build_limit(pd, "er", np.random.default_rng(s), law=law).weights[0, 1]
            for s in range(4000)
        ]
    )
    x = float(np.median(draws))
    surv = (draws > x).mean()
    assert surv == pytest.approx(np.exp(-f01 * x**2 / 2.0), abs=0.03)


def test_er_zeta_scaling_coupled():
    rng = np.random.default_rng(2)
    pd = sample_pd(1.5, 30, rng)
    law = DegreeLaw(1.5)
    E = np.random.default_rng(3).exponential(size=(30, 30))
    net1 = build_limit(pd, "er", rng, zeta=1.0, law=law, exp_matrix=E)
    net2 = build_limit(pd, "er", rng, zeta=2.0, law=law, exp_matrix=E)
    iu = np.triu_indices(30, 1)
    assert np.allclose(net2.weights[iu], net1.weights[iu] / 2.0)


def test_zeta_invariance_of_paths():
    # same underlying exponentials: optimal vertex paths are identical
    rng = np.random.default_rng(4)
    pd = sample_pd(1.5, 50, rng)
    law = DegreeLaw(1.5)
    E = np.random.default_rng(5).exponential(size=(50, 50))
    net1 = build_limit(pd, "er", rng, zeta=1.0, law=law, exp_matrix=E)
    net2 = build_limit(pd, "er", rng, zeta=2.0, law=law, exp_matrix=E)
    for i, j in ((0, 1), (3, 17), (20, 44)):
        p1 = fpp_limit(net1, i, j)
        p2 = fpp_limit(net2, i, j)
        assert p1.path == p2.path
        assert p2.weight == pytest.approx(p1.weight / 2.0)


def test_fpp_limit_trivial_cases():
    rng = np.random.default_rng(6)
    pd = sample_pd(1.5, 12, rng)
    net = build_limit(pd, "or", rng)
    same = fpp_limit(net, 3, 3)
    assert same.weight == 0.0 and same.hops == 0 and same.path == [3]
    with pytest.raises(ValueError):
        fpp_limit(net, 0, 12)
    # K = 2: a single edge is the only path
    pd2 = sample_pd(1.5, 10, rng)
    net2 = restrict(build_limit(pd2, "or", rng), 2)
    path = fpp_limit(net2, 0, 1)
    assert path.hops == 1 and path.path == [0, 1]
    assert path.weight == pytest.approx(net2.weights[0, 1])


def test_fpp_limit_weight_positive_and_finite():
    rng = np.random.default_rng(7)
    for seed in range(20):
        pd = sample_pd(1.5, 50, np.random.default_rng(seed))
        net = build_limit(pd, "or", rng)
        path = fpp_limit(net, 0, 5)
        assert 0 < path.weight < np.inf
        assert 1 <= path.hops < 50


def test_truncation_stability_coupled():
    # restricting a 2K network to K leaves most short paths untouched
    law = DegreeLaw(1.5)
    changed = 0
    trials = 0
    for seed in range(150):
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        pd = sample_pd(1.5, 400, rng)
        big = build_limit(pd, "or", rng)
        small = restrict(big, 200)
        for i, j in ((0, 1), (2, 4)):
            pb = fpp_limit(big, i, j)
            ps = fpp_limit(small, i, j)
            trials += 1
            if pb.path != ps.path:
                changed += 1
            elif max(pb.path) < 200:
                # a global optimum inside the restriction must be preserved
                assert ps.weight == pytest.approx(pb.weight)
    assert changed / trials <= 0.05, changed / trials


def test_sample_endpoints_or_degenerate_mass():
    pd = _pd_fixed([0.9992, 0.0003])
    law = DegreeLaw(1.5)
    rng = np.random.default_rng(8)
    same = sum(
        sample_endpoints(pd, "or", law, rng)[0].index
        == sample_endpoints(pd, "or", law, rng)[1].index
        for _ in range(300)
    )
    # nearly all endpoint draws land on the dominant cell
    hits = sum(
        sample_endpoints(pd, "or", law, rng)[0].index == 0 for _ in range(300)
    )
    assert hits >= 295
    assert same >= 280


def test_endpoint_collision_probability_given_pd():
    rng = np.random.default_rng(9)
    pd = sample_pd(1.5, 300, rng)
    law = DegreeLaw(1.5)
    same = np.mean(
        [
            sample_endpoints(pd, "or", law, rng)[0].index
            == sample_endpoints(pd, "or", law, rng)[1].index
            for _ in range(30_000)
        ]
    )
    target = float((pd.P**2).sum())
    assert same == pytest.approx(target, abs=4 * np.sqrt(target / 30_000) + 0.003)


def test_er_hopcount_support_even():
    rng = np.random.default_rng(10)
    law = DegreeLaw(1.5)
    for seed in range(30):
        pd = sample_pd(1.5, 60, np.random.default_rng(seed))
        net = build_limit(pd, "er", rng, law=law)
        h, w = sample_limit_hopcount(net, law, rng)
        assert h % 2 == 0 and h >= 2
        assert w >= 0.0


def test_chain_immediate_stop():
    pd = _pd_fixed([0.999, 0.0005])
    rng = np.random.default_rng(11)
    hops = [hopcount_chain(pd, rng) for _ in range(200)]
    assert np.mean([h == 2 for h in hops]) > 0.95


def test_chain_pi2_matches_identity():
    rng_master = 12
    hops = []
    for r in range(20_000):
        rng = np.random.default_rng(np.random.SeedSequence((rng_master, r)))
        pd = sample_pd(1.5, 200, rng)
        hops.append(hopcount_chain(pd, rng))
    hops = np.array(hops)
    p2 = (hops == 2).mean()
    assert abs(p2 - 0.5) <= 0.02
    assert (hops >= 2).all()


def test_estimate_pi_cross_agreement_small():
    est = estimate_pi(1.5, 200, 4000, seed=77, fpp_replicas=2000)
    assert est.tv_distance(8) <= 0.07
    assert abs(est.pi2 - 0.5) <= 0.035
    table = est.table(8)
    assert [row["k"] for row in table] == list(range(2, 9))
    assert all(row["pi_chain"] >= 0 for row in table)


def test_estimate_pi_truncation_insensitive():
    a = estimate_pi(1.5, 200, 4000, seed=13)
    b = estimate_pi(1.5, 400, 4000, seed=14)
    se = np.sqrt(0.25 / 4000)
    assert abs(a.pi2 - b.pi2) <= 4 * se


def test_estimate_pi_validation():
    with pytest.raises(ValueError):
        estimate_pi(1.5, 50, 100, seed=0)
    with pytest.raises(ValueError):
        estimate_pi(1.5, 200, 0, seed=0)


def test_synthetic_endpoints_routed():
    # force tail endpoints by using a small truncation at heavy tau
    law = DegreeLaw(1.9)
    rng = np.random.default_rng(15)
    saw_synthetic = 0
    for seed in range(60):
        pd = sample_pd(1.9, 12, np.random.default_rng(seed))
        net = build_limit(pd, "or", rng)
        a, b = sample_endpoints(pd, "or", law, rng)
        if max(a.index, b.index) >= pd.K:
            saw_synthetic += 1
        path = fpp_limit_endpoints(net, a, b, rng)
        assert np.isfinite(path.weight)
        assert path.hops >= (0 if a.index == b.index else 1)
    assert saw_synthetic > 0


def test_synthetic_endpoint_has_smaller_mass():
    rng = np.random.default_rng(16)
    pd = sample_pd(1.9, 12, rng)
    law = DegreeLaw(1.9)
    for _ in range(200):
        a, b = sample_endpoints(pd, "or", law, rng)
        for v in (a, b):
            if v.index >= pd.K:
                assert v.xi < pd.xi[-1]
