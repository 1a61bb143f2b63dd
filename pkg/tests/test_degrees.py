"""Degree law: inversion formula, survival, order statistics, moment bounds."""
import numpy as np
import pytest

from fppnet.degrees import (
    DegreeLaw,
    sample_degree,
    sample_degree_sequence,
    u_n,
    restricted_moment,
)


def test_law_validation():
    with pytest.raises(ValueError):
        DegreeLaw(1.0)
    with pytest.raises(ValueError):
        DegreeLaw(2.0)
    with pytest.raises(ValueError):
        DegreeLaw(1.5, scale_c=0.0)
    DegreeLaw(1.0000001)
    DegreeLaw(1.9999999)


def test_inversion_formula_values():
    law = DegreeLaw(1.5)
    assert sample_degree(law, 0.5) == 4  # ceil(0.5^-2)
    assert sample_degree(law, 0.999) == 2  # 0.999^-2 ~ 1.002
    assert sample_degree(law, 0.9999999) == 2  # never below the atom structure
    with pytest.raises(ValueError):
        sample_degree(law, 0.0)
    with pytest.raises(ValueError):
        sample_degree(law, 1.0)


def test_sampler_monotone_in_u():
    law = DegreeLaw(1.3)
    us = np.linspace(1e-6, 1 - 1e-6, 400)
    ds = np.array([sample_degree(law, float(u)) for u in us])
    assert (np.diff(ds) <= 0).all()


def test_survival_matches_law():
    # the sampler realizes P(D > k) = min(1, c k^-(tau-1)) exactly
    law = DegreeLaw(1.5)
    rng = np.random.default_rng(1)
    d = np.array([sample_degree(law, float(u)) for u in rng.random(10**6)])
    for k in (1, 3, 10, 100):
        emp = (d > k).mean()
        theo = float(law.survival(k))
        se = np.sqrt(theo * (1 - theo) / len(d))
        assert abs(emp - theo) <= 4 * se + 1e-12, (k, emp, theo)


def test_survival_scale_c_below_one():
    law = DegreeLaw(1.5, scale_c=0.5)
    rng = np.random.default_rng(2)
    d = np.array([sample_degree(law, float(u)) for u in rng.random(200_000)])
    # atom at 1 has mass 1 - c
    assert abs((d == 1).mean() - 0.5) < 0.005
    assert abs((d > 4).mean() - 0.25) < 0.005


def test_parity_fix_and_determinism():
    law = DegreeLaw(1.5)
    seq = sample_degree_sequence(law, 101, seed=3)
    assert seq.total % 2 == 0
    assert seq.total == int(seq.degrees.sum())
    assert (seq.degrees >= 1).all()
    again = sample_degree_sequence(law, 101, seed=3)
    assert np.array_equal(seq.degrees, again.degrees)
    stats = seq.order_statistics()
    assert (np.diff(stats) <= 0).all()
    assert sorted(seq.sorted_desc) == list(range(101))


def test_parity_fix_increments_last():
    # construct a seed whose raw draw sum is odd and check the last degree
    law = DegreeLaw(1.5)
    for seed in range(40):
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        u = rng.random(11)
        from fppnet.degrees import _invert

        raw = _invert(law, u)
        seq = sample_degree_sequence(law, 11, seed=np.random.SeedSequence(seed))
        if raw.sum() % 2 == 1:
            assert seq.degrees[-1] == raw[-1] + 1
            assert np.array_equal(seq.degrees[:-1], raw[:-1])
            break
    else:
        pytest.fail("no odd-sum seed found in range")


def test_max_degree_scaling():
    # largest of n draws is of order u_n = n^2: the rescaled max converges
    # to Gamma_1^-2 with Gamma_1 unit exponential, so
    # P(max/n^2 in [1/C, C]) -> exp(-C^-1/2) - exp(-C^1/2)
    law = DegreeLaw(1.5)
    n = 10_000
    maxima = np.array(
        [sample_degree_sequence(law, n, seed=s).degrees.max() for s in range(200)]
    )
    ratio = maxima / n**2
    for C in (10.0, 2000.0):
        want = np.exp(-C**-0.5) - np.exp(-(C**0.5))
        got = ((ratio >= 1 / C) & (ratio <= C)).mean()
        se = np.sqrt(want * (1 - want) / len(ratio))
        assert abs(got - want) <= 4 * se + 0.01, (C, got, want)
    # the loose constant keeps nearly everything
    assert ((ratio >= 1 / 2000.0) & (ratio <= 2000.0)).mean() >= 0.95


def test_u_n_values():
    assert u_n(DegreeLaw(1.5), 100) == pytest.approx(1e4)
    assert u_n(DegreeLaw(1.9), 10**6) == pytest.approx(10 ** (6 / 0.9), rel=1e-12)
    # 1 - F(u_n) = 1/n up to the integer lattice
    law = DegreeLaw(1.7, scale_c=0.8)
    for n in (10, 1000, 10**5):
        u = u_n(law, n)
        assert float(law.survival(np.floor(u))) >= 1.0 / n
        assert float(law.survival(np.ceil(u))) <= 1.0 / n + 1e-12


def test_restricted_moment_small_cases():
    # at c = 1 the survival clamps to 1 at k = 1, so all mass sits on D >= 2:
    # E[D 1{D<=1}] = 0 and the first atom is P(D=2) = 1 - 2^-(tau-1)
    law = DegreeLaw(1.5)
    assert restricted_moment(law, 1.0, 1.0) == 0.0
    assert float(law.pmf(2)) == pytest.approx(1 - 2**-0.5)
    assert restricted_moment(law, 1.0, 2.0) == pytest.approx(2 * (1 - 2**-0.5))
    # for c < 1 the atom at 1 carries 1 - c
    law_c = DegreeLaw(1.5, scale_c=0.6)
    assert restricted_moment(law_c, 1.0, 1.0) == pytest.approx(0.4)


def test_restricted_moment_matches_direct_sum():
    law = DegreeLaw(1.4, scale_c=0.9)
    k = np.arange(1, 501, dtype=float)
    direct = float(np.sum(k**2.2 * law.pmf(k)))
    assert restricted_moment(law, 2.2, 500.4) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("tau", [1.2, 1.5, 1.8])
def test_restricted_moment_bounds(tau):
    # four growth bounds with one calibrated constant; exponent coincidences
    # at specific tau are covered automatically
    law = DegreeLaw(tau)
    C = 6.0
    for x in (10.0, 100.0, 1000.0, 10_000.0):
        assert restricted_moment(law, 1.0, x) <= C * x ** (2 - tau)
        assert restricted_moment(law, tau - 1.0, x) <= C * np.log(x)
        assert restricted_moment(law, tau, x) <= C * x
        assert restricted_moment(law, 2 * (tau - 1.0), x) <= C * x ** (tau - 1)


def test_exponent_coincidence_at_tau_15():
    # at tau = 1.5 the exponents 1 and 2(tau-1) coincide
    law = DegreeLaw(1.5)
    for x in (10.0, 250.0):
        assert restricted_moment(law, 1.0, x) == pytest.approx(
            restricted_moment(law, 2 * 0.5, x)
        )
