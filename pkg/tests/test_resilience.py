"""Vertex attacks: giant components, theory curve, coupled monotonicity."""
import numpy as np
import pytest
from scipy.sparse import csgraph

from fppnet import cmgraph, resilience
from fppnet.cmgraph import DegreeSequence, erase, pair_stubs
from fppnet.degrees import DegreeLaw, sample_degree_sequence
from fppnet.resilience import (
    beta_estimate,
    lambda_theory,
    percolate_giant,
    sample_joint_der,
    targeted_attack,
)


def _simple_graph(n, edges):
    ei = np.array([min(e) for e in edges], dtype=np.int64)
    ej = np.array([max(e) for e in edges], dtype=np.int64)
    d = np.bincount(np.concatenate([ei, ej]), minlength=n).astype(np.int64)
    d = np.maximum(d, 1)
    if d.sum() % 2:
        d[-1] += 1
    seq = DegreeSequence(n, d, int(d.sum()), np.argsort(-d, kind="stable"))
    mg = cmgraph.MultiGraph(
        n=n,
        ei=ei,
        ej=ej,
        mult=np.ones(len(ei), dtype=np.int64),
        self_loops=np.zeros(n, dtype=np.int64),
        degrees=seq,
    )
    return erase(mg)


def test_percolate_extremes():
    sg = _simple_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    rng = np.random.default_rng(0)
    full = percolate_giant(sg, 1.0, rng)
    assert full.giant_size == 5 and full.giant_fraction == 1.0
    assert full.pair_connect_prob == pytest.approx(1.0)
    none = percolate_giant(sg, 0.0, rng)
    assert none.giant_size == 0 and none.pair_connect_prob == 0.0
    with pytest.raises(ValueError):
        percolate_giant(sg, 1.5, rng)


def test_percolate_exact_pair_probability():
    # two components, sizes 3 and 2, no deletion
    sg = _simple_graph(5, [(0, 1), (1, 2), (3, 4)])
    out = percolate_giant(sg, 1.0, np.random.default_rng(1))
    want = (3 * 2 + 2 * 1) / (5 * 4)
    assert out.pair_connect_prob == pytest.approx(want)
    assert out.second_size == 2


def test_percolate_sampled_pair_probability():
    sg = _simple_graph(6, [(0, 1), (1, 2), (2, 0), (3, 4)])
    exact = percolate_giant(sg, 1.0, np.random.default_rng(2)).pair_connect_prob
    sampled = percolate_giant(
        sg, 1.0, np.random.default_rng(3), pair_trials=40_000
    )
    assert sampled.pair_connect_stderr > 0
    assert abs(sampled.pair_connect_prob - exact) <= 4 * sampled.pair_connect_stderr


def test_percolation_monotone_under_coupling():
    law = DegreeLaw(1.5)
    seq = sample_degree_sequence(law, 800, seed=4)
    sg = erase(pair_stubs(seq, np.random.default_rng(4)))
    u = np.random.default_rng(5).random(800)
    fractions = [
        percolate_giant(sg, p, np.random.default_rng(0), keep_uniforms=u).giant_fraction
        for p in (0.1, 0.3, 0.5, 0.8, 1.0)
    ]
    assert (np.diff(fractions) >= 0).all()


def test_union_equivalence_with_bfs_oracle():
    # component structure against scipy BFS labeling on random small graphs
    rng = np.random.default_rng(6)
    for _ in range(100):
        n = int(rng.integers(4, 20))
        edges = [
            (a, b)
            for a in range(n)
            for b in range(a + 1, n)
            if rng.random() < 0.15
        ]
        if not edges:
            continue
        sg = _simple_graph(n, edges)
        kept = rng.random(n) < 0.7
        out = resilience._surviving_components(sg, kept)
        # oracle: BFS flood fill on the kept subgraph
        adj = {v: [] for v in range(n)}
        for a, b in edges:
            if kept[a] and kept[b]:
                adj[a].append(b)
                adj[b].append(a)
        seen = set()
        sizes = []
        for v in range(n):
            if kept[v] and v not in seen:
                stack, comp = [v], 0
                seen.add(v)
                while stack:
                    x = stack.pop()
                    comp += 1
                    for y in adj[x]:
                        if y not in seen:
                            seen.add(y)
                            stack.append(y)
                sizes.append(comp)
        assert sorted(out[out > 0].tolist()) == sorted(sizes)


def test_lambda_theory_extremes():
    d = np.array([1, 2, 3, 4])
    assert lambda_theory(1.0, d) == pytest.approx(1.0)
    assert lambda_theory(0.0, d) == 0.0
    with pytest.raises(ValueError):
        lambda_theory(0.5, np.array([]))


def test_lambda_theory_batch_agreement():
    law = DegreeLaw(1.5)
    d1a, d2a, _ = sample_joint_der(law, 300, 25_000, seed=7)
    d1b, d2b, _ = sample_joint_der(law, 300, 25_000, seed=8)
    la = lambda_theory(0.5, np.concatenate([d1a, d2a]))
    lb = lambda_theory(0.5, np.concatenate([d1b, d2b]))
    assert abs(la - lb) <= 0.01


def test_beta_estimate_extremes_and_positivity():
    law = DegreeLaw(1.5)
    d1, d2, n12 = sample_joint_der(law, 300, 30_000, seed=9)
    assert beta_estimate(0.0, d1, d2, n12) == 0.0
    assert beta_estimate(1.0, d1, d2, n12) == 0.0
    # batch confidence interval excludes zero at p = 1/2
    parts = [
        beta_estimate(0.5, d1[i::10], d2[i::10], n12[i::10]) for i in range(10)
    ]
    m, s = np.mean(parts), np.std(parts, ddof=1) / np.sqrt(10)
    assert m - 2.26 * s > 0.0, (m, s)
    # shared-hub control: independent N12 = 0 collapses toward zero
    control = beta_estimate(0.5, d1, d2, np.zeros_like(n12))
    assert control <= 0.003


def test_targeted_attack_extremes():
    sg = _simple_graph(6, [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)])
    base = targeted_attack(sg, 0)
    assert base.pair_connect_prob == pytest.approx(1.0)
    hubless = targeted_attack(sg, 1)  # removing the hub isolates everyone
    assert hubless.giant_size == 1
    assert hubless.pair_connect_prob == 0.0
    nearly_all = targeted_attack(sg, 4)
    assert nearly_all.pair_connect_prob <= 0.2
    with pytest.raises(ValueError):
        targeted_attack(sg, 6)


def test_targeted_attack_monotone(batch3000):
    # connectivity is non-increasing in the removal count, replica-wise
    for rep in batch3000.replicas[:20]:
        curve = [x["connect_prob"] for x in rep["targeted"]]
        assert all(a >= b - 1e-12 for a, b in zip(curve, curve[1:]))


def test_attack_contrast(batch3000):
    # same batch: random deletion keeps a giant, hub removal disconnects
    percs = [rep["percolation"] for rep in batch3000.replicas if "percolation" in rep]
    frac = np.array(
        [next(x["giant_fraction"] for x in rep if x["p"] == 0.1) for rep in percs]
    )
    targs = [rep["targeted"] for rep in batch3000.replicas if "targeted" in rep]
    conn = np.array([next(x["connect_prob"] for x in rep if x["k"] == 20) for rep in targs])
    assert frac.mean() >= 0.005
    assert np.median(conn) <= 0.2
