"""Truncated infinite limit networks and two estimators of the hopcount law.

Two objects are built on the Poisson-Dirichlet cells:

* original kind: complete graph on the first K cells, edge (i, j)
  exponential with rate xi_i * xi_j / eta;
* erased kind: edge survival exp(-f(P_i, P_j) * zeta^2 * x^2 / 2), realized
  exactly by inverse transform of a single exponential draw.

Endpoints are drawn from the full cell distribution: draws landing past the
truncation realize a fresh tail cell lazily (size-biased by its mass) and
are wired into the network on the fly, so no renormalization bias enters
even when the tail carries substantial mass (tau near 2).

The hopcount law of the finite original model is estimated two independent
ways: by running Dijkstra on the truncated network between sampled
endpoints, and by the shortest-weight-tree growth chain, which needs no
edge weights at all: grow a tree from one endpoint, attaching at each step
a new cell chosen with probability proportional to its mass outside the
tree, to a parent chosen proportionally to mass inside; stop when the
second endpoint joins. The finite-model hopcount is 2 plus the height at
which it joins.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .degrees import DegreeLaw
from .pdlaw import (
    PDRealization,
    f_joint_matrix,
    cell_hit_probability,
    sample_cell_occupancy,
    sample_pd,
    sample_tail_cell,
)
from .seeds import child_seed

__all__ = [
    "LimitNetwork",
    "LimitVertex",
    "LimitPath",
    "PiEstimate",
    "build_limit",
    "restrict",
    "fpp_limit",
    "sample_endpoints",
    "hopcount_chain",
    "sample_limit_hopcount",
    "estimate_pi",
]


class LimitVertex(NamedTuple):
    """A cell usable as an FPP endpoint; index >= K marks a realized tail cell."""

    index: int
    xi: float


@dataclass
class LimitNetwork:
    """Complete weighted graph on the first K cells of a realization."""

    kind: str
    K: int
    pd: PDRealization
    weights: np.ndarray
    zeta: float = 1.0
    law: DegreeLaw | None = field(default=None, repr=False)


def _symmetrize(upper: np.ndarray) -> np.ndarray:
    w = np.triu(upper, 1)
    w = w + w.T
    np.fill_diagonal(w, np.inf)
    return w


def build_limit(
    pd: PDRealization,
    kind: str,
    rng: np.random.Generator,
    zeta: float = 1.0,
    law: DegreeLaw | None = None,
    exp_matrix: np.ndarray | None = None,
) -> LimitNetwork:
    """Draw all K(K-1)/2 edge weights conditionally independently given pd.

    exp_matrix optionally injects the underlying unit-exponential draws
    (upper triangle used), which couples networks across zeta values or
    truncation levels for invariance tests.
    """
    K = pd.K
    if exp_matrix is None:
        exp_matrix = rng.exponential(size=(K, K))
    if kind == "or":
        rate = np.outer(pd.xi, pd.xi) / pd.eta
        return LimitNetwork("or", K, pd, _symmetrize(exp_matrix / rate), 1.0, law)
    if kind == "er":
        if zeta <= 0:
            raise ValueError("zeta must be positive")
        if law is None:
            law = DegreeLaw(pd.tau)
        f = f_joint_matrix(pd.P, law)
        np.fill_diagonal(f, 1.0)  # avoid 0/0; diagonal is masked anyway
        w = np.sqrt(2.0 * exp_matrix / (zeta**2 * f))
        return LimitNetwork("er", K, pd, _symmetrize(w), zeta, law)
    raise ValueError(f"unknown limit kind {kind!r}")


def restrict(net: LimitNetwork, K2: int) -> LimitNetwork:
    """Truncate to the first K2 cells, keeping the shared weight draws."""
    if K2 > net.K:
        raise ValueError("can only restrict to a smaller truncation")
    return LimitNetwork(
        net.kind, K2, net.pd, net.weights[:K2, :K2].copy(), net.zeta, net.law
    )


@dataclass(frozen=True)
class LimitPath:
    """Minimal-weight path in the truncated network."""

    weight: float
    hops: int
    path: list[int]


def _dijkstra_dense(w: np.ndarray, src: int, target: int) -> LimitPath:
    """Dijkstra on a dense complete weight matrix with hop and path tracking."""
    m = w.shape[0]
    dist = w[src].copy()
    hops = np.ones(m, dtype=np.int64)
    pred = np.full(m, src, dtype=np.int64)
    dist[src] = 0.0
    hops[src] = 0
    pred[src] = -1
    done = np.zeros(m, dtype=bool)
    done[src] = True
    for _ in range(m - 1):
        cand = np.where(done, np.inf, dist)
        u = int(np.argmin(cand))
        if u == target or not np.isfinite(cand[u]):
            break
        done[u] = True
        relaxed = dist[u] + w[u]
        better = relaxed < dist
        dist[better] = relaxed[better]
        hops[better] = hops[u] + 1
        pred[better] = u
    path = [target]
    while path[-1] != src:
        path.append(int(pred[path[-1]]))
    path.reverse()
    return LimitPath(float(dist[target]), int(hops[target]), path)


def _augmented_matrix(
    net: LimitNetwork, extras: list[LimitVertex], rng: np.random.Generator
) -> np.ndarray:
    """Extend the weight matrix with realized tail cells as extra rows/columns."""
    K = net.K
    s = len(extras)
    m = np.full((K + s, K + s), np.inf)
    m[:K, :K] = net.weights
    xi_extra = np.array([v.xi for v in extras])
    if net.kind == "or":
        for a, va in enumerate(extras):
            rate = va.xi * net.pd.xi / net.pd.eta
            m[K + a, :K] = m[:K, K + a] = rng.exponential(1.0 / rate)
        if s == 2:
            rate = xi_extra[0] * xi_extra[1] / net.pd.eta
            m[K, K + 1] = m[K + 1, K] = rng.exponential(1.0 / rate)
    else:
        law = net.law if net.law is not None else DegreeLaw(net.pd.tau)
        h_core = cell_hit_probability(law, net.pd.P)
        for a, va in enumerate(extras):
            pa = va.xi / net.pd.eta
            f_row = cell_hit_probability(law, pa) + h_core - cell_hit_probability(
                law, np.minimum(pa + net.pd.P, 1.0)
            )
            f_row = np.maximum(f_row, 1e-300)
            m[K + a, :K] = m[:K, K + a] = np.sqrt(
                2.0 * rng.exponential(size=K) / (net.zeta**2 * f_row)
            )
        if s == 2:
            pa, pb = xi_extra / net.pd.eta
            f_ab = max(
                cell_hit_probability(law, pa)
                + cell_hit_probability(law, pb)
                - cell_hit_probability(law, min(pa + pb, 1.0)),
                1e-300,
            )
            m[K, K + 1] = m[K + 1, K] = np.sqrt(
                2.0 * rng.exponential() / (net.zeta**2 * f_ab)
            )
    return m


def fpp_limit(net: LimitNetwork, i: int, j: int) -> LimitPath:
    """Minimal-weight path between cells i, j < K of the truncated network."""
    if not (0 <= i < net.K and 0 <= j < net.K):
        raise ValueError("endpoints must lie inside the truncation")
    if i == j:
        return LimitPath(0.0, 0, [i])
    return _dijkstra_dense(net.weights, i, j)


def fpp_limit_endpoints(
    net: LimitNetwork,
    a: LimitVertex,
    b: LimitVertex,
    rng: np.random.Generator,
) -> LimitPath:
    """fpp_limit generalized to endpoints that may be realized tail cells."""
    if a.index == b.index:
        return LimitPath(0.0, 0, [a.index])
    extras = [v for v in (a, b) if v.index >= net.K]
    if not extras:
        return _dijkstra_dense(net.weights, a.index, b.index)
    m = _augmented_matrix(net, extras, rng)
    remap = {}
    for pos, v in enumerate(extras):
        remap[v.index] = net.K + pos
    src = remap.get(a.index, a.index)
    dst = remap.get(b.index, b.index)
    return _dijkstra_dense(m, src, dst)


def _draw_mass_vertex(
    pd: PDRealization, rng: np.random.Generator, synthetic_index: int
) -> LimitVertex:
    """One cell drawn proportionally to mass, realizing a tail cell if needed."""
    u = rng.random()
    cum = np.cumsum(pd.P)
    if u < cum[-1]:
        idx = int(np.searchsorted(cum, u))
        return LimitVertex(idx, float(pd.xi[idx]))
    _, xi = sample_tail_cell(pd, rng)
    return LimitVertex(synthetic_index, xi)


def sample_endpoints(
    pd: PDRealization,
    kind: str,
    law: DegreeLaw,
    rng: np.random.Generator,
) -> tuple[LimitVertex, LimitVertex]:
    """Sample the endpoint pair feeding the limit FPP problem.

    Original kind: two cells i.i.d. proportionally to their masses. Erased
    kind: two conditionally independent copies of the uniformly-chosen-cell
    construction (a degree draw scattered over the cells, then one hit cell
    chosen uniformly). Tail draws realize fresh cells with indices K, K+1.
    """
    if kind == "or":
        a = _draw_mass_vertex(pd, rng, pd.K)
        b = _draw_mass_vertex(pd, rng, pd.K + 1)
        return a, b
    if kind == "er":
        out = []
        for syn in (pd.K, pd.K + 1):
            occ = sample_cell_occupancy(pd, law, rng)
            if occ.chosen < pd.K:
                out.append(LimitVertex(occ.chosen, float(pd.xi[occ.chosen])))
            else:
                _, xi = sample_tail_cell(pd, rng)
                out.append(LimitVertex(syn, xi))
        return out[0], out[1]
    raise ValueError(f"unknown limit kind {kind!r}")


def hopcount_chain(
    pd: PDRealization,
    rng: np.random.Generator,
    step_cap: int = 10**6,
) -> int:
    """One finite-model hopcount sample from the tree-growth chain.

    Endpoints are drawn proportionally to cell mass. The tree grows by
    mass-biased attachment until the second endpoint joins; the sample is
    2 plus its height. Anonymous tail cells joining the tree in between
    carry negligible mass and are treated as inert (they can neither be the
    stopping cell nor be chosen as parents), which leaves the effective
    step distribution unchanged.
    """
    j1 = _draw_mass_vertex(pd, rng, pd.K)
    j2 = _draw_mass_vertex(pd, rng, pd.K + 1)
    if j1.index == j2.index:
        return 2

    outside = pd.P.copy()
    j2_core = j2.index < pd.K
    j2_extra = 0.0 if j2_core else j2.xi / pd.eta
    if j1.index < pd.K:
        outside[j1.index] = 0.0

    tree_mass = [j1.xi / pd.eta]
    tree_height = [0]

    for _ in range(step_cap):
        total = outside.sum() + j2_extra
        if total <= 0.0:
            raise RuntimeError("chain exhausted all cells without meeting endpoint")
        u = rng.random() * total
        cum = np.cumsum(outside)
        if u < cum[-1]:
            new = int(np.searchsorted(cum, u))
            is_j2 = j2_core and new == j2.index
            new_mass = outside[new]
        else:
            new = j2.index
            is_j2 = True
            new_mass = j2_extra
        tm = np.asarray(tree_mass)
        parent = int(np.searchsorted(np.cumsum(tm), rng.random() * tm.sum()))
        height = tree_height[parent] + 1
        if is_j2:
            return 2 + height
        outside[new] = 0.0
        tree_mass.append(new_mass)
        tree_height.append(height)
    raise RuntimeError(f"chain did not terminate within {step_cap} steps")


def sample_limit_hopcount(
    net: LimitNetwork,
    law: DegreeLaw,
    rng: np.random.Generator,
) -> tuple[int, float]:
    """One (hopcount, recentred weight) draw of the finite-model limit law.

    Original kind maps endpoints I, J to 2 + H_IJ; erased kind to
    2 + 2 H_IJ (hence even support).
    """
    a, b = sample_endpoints(net.pd, net.kind, law, rng)
    path = fpp_limit_endpoints(net, a, b, rng)
    if net.kind == "or":
        return 2 + path.hops, path.weight
    return 2 + 2 * path.hops, path.weight


@dataclass
class PiEstimate:
    """Raw samples from both hopcount estimators plus summary accessors."""

    tau: float
    K: int
    chain_hops: np.ndarray
    fpp_hops: np.ndarray
    fpp_weights: np.ndarray

    def _freq(self, hops: np.ndarray, k: int) -> tuple[float, float]:
        p = float((hops == k).mean())
        se = float(np.sqrt(p * (1 - p) / len(hops)))
        return p, se

    def pi_chain(self, k: int) -> tuple[float, float]:
        return self._freq(self.chain_hops, k)

    def pi_fpp(self, k: int) -> tuple[float, float]:
        return self._freq(self.fpp_hops, k)

    @property
    def pi2(self) -> float:
        return self.pi_chain(2)[0]

    @property
    def pi2_stderr(self) -> float:
        return self.pi_chain(2)[1]

    def tv_distance(self, k_max: int = 8) -> float:
        """Total variation between the two estimators over hop values <= k_max."""
        ks = np.arange(2, k_max + 1)
        pc = np.array([(self.chain_hops == k).mean() for k in ks])
        pf = np.array([(self.fpp_hops == k).mean() for k in ks])
        return float(0.5 * np.abs(pc - pf).sum())

    def table(self, k_max: int = 8) -> list[dict]:
        rows = []
        for k in range(2, k_max + 1):
            pc, sec = self.pi_chain(k)
            pf, sef = self.pi_fpp(k)
            rows.append(
                {
                    "k": k,
                    "pi_chain": pc,
                    "stderr_chain": sec,
                    "pi_fpp": pf,
                    "stderr_fpp": sef,
                    "gap": abs(pc - pf),
                }
            )
        return rows


def estimate_pi(
    tau: float,
    K: int,
    replicas: int,
    seed,
    law: DegreeLaw | None = None,
    fpp_replicas: int | None = None,
) -> PiEstimate:
    """Run both hopcount estimators over fresh realizations.

    Each replica owns a derived RNG stream: a Poisson-Dirichlet draw, one
    chain sample, and (for the first fpp_replicas replicas) one truncated
    network with a Dijkstra sample sharing the same realization.
    """
    if K < 100:
        raise ValueError("need K >= 100")
    if replicas < 1:
        raise ValueError("need at least one replica")
    if law is None:
        law = DegreeLaw(tau)
    if fpp_replicas is None:
        fpp_replicas = replicas
    fpp_replicas = min(fpp_replicas, replicas)

    chain_hops = np.empty(replicas, dtype=np.int64)
    fpp_hops = np.empty(fpp_replicas, dtype=np.int64)
    fpp_weights = np.empty(fpp_replicas)
    for r in range(replicas):
        rng = np.random.default_rng(child_seed(seed, r))
        pd = sample_pd(tau, K, rng)
        chain_hops[r] = hopcount_chain(pd, rng)
        if r < fpp_replicas:
            net = build_limit(pd, "or", rng)
            h, w = sample_limit_hopcount(net, law, rng)
            fpp_hops[r] = h
            fpp_weights[r] = w
    return PiEstimate(tau, K, chain_hops, fpp_hops, fpp_weights)
