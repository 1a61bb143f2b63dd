"""Random and targeted vertex attacks: giant components and disconnection.

Random deletion keeps each vertex independently with probability p; the
surviving graph keeps a giant component whose fraction converges to
lambda(p) = p * E[1 - (1-p)^De], where De is the limiting number of
distinct hubs a uniform vertex attaches to. Targeted deletion of a bounded
number of top-degree vertices instead disconnects typical pairs: the hubs
carry essentially all connectivity.

Pair connectivity is computed exactly from the surviving component sizes
unless a trial count is requested.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .cmgraph import SimpleGraph
from .degrees import DegreeLaw
from .pdlaw import sample_occupancy_pair, sample_pd

__all__ = [
    "AttackOutcome",
    "percolate_giant",
    "lambda_theory",
    "beta_estimate",
    "sample_joint_der",
    "targeted_attack",
]


@dataclass(frozen=True)
class AttackOutcome:
    """Surviving-graph statistics after a vertex attack."""

    mode: str
    parameter: float
    kept_count: int
    giant_size: int
    second_size: int
    giant_fraction: float
    pair_connect_prob: float
    pair_connect_stderr: float


def _surviving_components(sg: SimpleGraph, kept: np.ndarray) -> np.ndarray:
    """Component sizes among kept vertices (edges need both endpoints kept)."""
    if not kept.any():
        return np.zeros(0, dtype=np.int64)
    eu, ev = sg.edge_list()
    alive = kept[eu] & kept[ev]
    eu, ev = eu[alive], ev[alive]
    mat = sp.csr_matrix(
        (np.ones(2 * len(eu), dtype=np.int8), (np.concatenate([eu, ev]), np.concatenate([ev, eu]))),
        shape=(sg.n, sg.n),
    )
    _, labels = csgraph.connected_components(mat, directed=False)
    return np.bincount(labels[kept])


def _outcome(
    sg: SimpleGraph,
    kept: np.ndarray,
    mode: str,
    parameter: float,
    pair_trials: int | None,
    rng: np.random.Generator | None,
    labels_for_trials: np.ndarray | None = None,
) -> AttackOutcome:
    sizes = _surviving_components(sg, kept)
    sizes_sorted = np.sort(sizes)[::-1] if len(sizes) else np.zeros(1, dtype=np.int64)
    giant = int(sizes_sorted[0]) if len(sizes) else 0
    second = int(sizes_sorted[1]) if len(sizes_sorted) > 1 else 0
    n = sg.n
    if pair_trials is None:
        # exact over ordered distinct uniform pairs, given this realization
        prob = float((sizes.astype(float) * (sizes - 1)).sum() / (n * (n - 1)))
        stderr = 0.0
    else:
        if rng is None:
            raise ValueError("pair_trials needs an rng")
        a = rng.integers(n, size=pair_trials)
        b = rng.integers(n, size=pair_trials)
        redraw = a == b
        while redraw.any():
            b[redraw] = rng.integers(n, size=int(redraw.sum()))
            redraw = a == b
        lab = labels_for_trials
        if lab is None:
            eu, ev = sg.edge_list()
            alive = kept[eu] & kept[ev]
            mat = sp.csr_matrix(
                (
                    np.ones(2 * int(alive.sum()), dtype=np.int8),
                    (
                        np.concatenate([eu[alive], ev[alive]]),
                        np.concatenate([ev[alive], eu[alive]]),
                    ),
                ),
                shape=(n, n),
            )
            _, lab = csgraph.connected_components(mat, directed=False)
        hits = kept[a] & kept[b] & (lab[a] == lab[b])
        p_hat = float(hits.mean())
        prob, stderr = p_hat, float(np.sqrt(p_hat * (1 - p_hat) / pair_trials))
    return AttackOutcome(
        mode=mode,
        parameter=parameter,
        kept_count=int(kept.sum()),
        giant_size=giant,
        second_size=second,
        giant_fraction=giant / n,
        pair_connect_prob=prob,
        pair_connect_stderr=stderr,
    )


def percolate_giant(
    sg: SimpleGraph,
    p: float,
    rng: np.random.Generator,
    keep_uniforms: np.ndarray | None = None,
    pair_trials: int | None = None,
) -> AttackOutcome:
    """Keep each vertex independently with probability p; report the giant.

    keep_uniforms optionally supplies the per-vertex uniforms, which couples
    outcomes monotonically across p values.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    u = rng.random(sg.n) if keep_uniforms is None else keep_uniforms
    kept = u < p
    return _outcome(sg, kept, "random", p, pair_trials, rng)


def lambda_theory(p: float, der_samples: np.ndarray) -> float:
    """Plug-in limiting giant fraction p * E[1 - (1-p)^De] from De samples."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    if len(der_samples) == 0:
        raise ValueError("need at least one sample")
    d = np.asarray(der_samples, dtype=float)
    return float(p * (1.0 - (1.0 - p) ** d).mean())


def beta_estimate(
    p: float, d1: np.ndarray, d2: np.ndarray, n12: np.ndarray
) -> float:
    """Plug-in limiting variance of the giant fraction, from coupled triples.

    beta(p) = p^2 ( E[(1-p)^(D1+D2-N12)] - E[(1-p)^D1] E[(1-p)^D2] );
    positive because pairs of typical vertices share hubs.
    """
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    n12 = np.asarray(n12, dtype=float)
    q = 1.0 - p
    joint = (q ** (d1 + d2 - n12)).mean()
    return float(p * p * (joint - (q**d1).mean() * (q**d2).mean()))


def sample_joint_der(
    law: DegreeLaw,
    K: int,
    count: int,
    seed,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coupled (D1, D2, N12) triples, each from a fresh shared realization.

    D1, D2 are the distinct-cell counts of two occupancy draws over the same
    Poisson-Dirichlet realization; N12 counts the cells they share.
    """
    d1 = np.empty(count, dtype=np.int64)
    d2 = np.empty(count, dtype=np.int64)
    n12 = np.empty(count, dtype=np.int64)
    rng = np.random.default_rng(seed)
    for i in range(count):
        pd = sample_pd(law.tau, K, rng)
        occ1, occ2, common = sample_occupancy_pair(pd, law, rng)
        d1[i], d2[i], n12[i] = occ1.distinct, occ2.distinct, common
    return d1, d2, n12


def targeted_attack(
    sg: SimpleGraph,
    k_remove: int,
    rng: np.random.Generator | None = None,
    pair_trials: int | None = None,
) -> AttackOutcome:
    """Delete the k_remove largest-degree vertices of the simple graph."""
    if not (0 <= k_remove < sg.n):
        raise ValueError("k_remove must lie in [0, n)")
    order = np.argsort(-sg.erased_degree, kind="stable")
    kept = np.ones(sg.n, dtype=bool)
    kept[order[:k_remove]] = False
    return _outcome(sg, kept, "targeted", float(k_remove), pair_trials, rng)
