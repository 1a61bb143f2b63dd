"""Edge weights, minimal-weight paths and hopcounts on finite graphs.

Weights are i.i.d. per distinct edge. In the original (multigraph) mode the
weight of a vertex pair is the minimum over its parallel edges, which for
the exponential law is again exponential with rate equal to the
multiplicity; the uniform law uses the exact min-of-m inverse transform.
Shortest paths run on a sparse CSR view through scipy's Dijkstra; ties
between equal-weight paths have probability zero under the continuous
laws shipped here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .cmgraph import MultiGraph, SimpleGraph

__all__ = [
    "EdgeWeightLaw",
    "WeightedGraph",
    "DijkstraResult",
    "PathResult",
    "TwoEdgeResult",
    "MinGammaCurve",
    "assign_weights",
    "weighted_graph_from_edges",
    "dijkstra",
    "dijkstra_many",
    "sample_pair_fpp",
    "two_edge_min",
    "min_gamma_trial",
    "min_gamma_joint",
]


@dataclass(frozen=True)
class EdgeWeightLaw:
    """Edge weight distribution: exponential rate 1, or uniform on (0, b).

    zeta is the density at zero, the only feature of the law entering the
    limit objects (1 for the exponential, 1/b for the uniform).
    """

    kind: str = "exponential"
    b: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("exponential", "uniform"):
            raise ValueError(f"unknown weight law kind {self.kind!r}")
        if self.kind == "uniform" and not (self.b > 0):
            raise ValueError("uniform law needs b > 0")

    @classmethod
    def exponential(cls) -> EdgeWeightLaw:
        return cls("exponential")

    @classmethod
    def uniform(cls, b: float) -> EdgeWeightLaw:
        return cls("uniform", b)

    @property
    def zeta(self) -> float:
        return 1.0 if self.kind == "exponential" else 1.0 / self.b

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "exponential":
            return rng.exponential(1.0, size)
        return rng.uniform(0.0, self.b, size)

    def sample_min(self, mult: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One draw per entry, distributed as the min of mult[i] i.i.d. copies."""
        u = rng.random(len(mult))
        if self.kind == "exponential":
            # min of m exponentials is exponential with rate m
            return -np.log1p(-u) / mult
        return self.b * (1.0 - (1.0 - u) ** (1.0 / mult))


@dataclass
class WeightedGraph:
    """Graph plus one positive weight per distinct edge (u < v)."""

    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    mode: str
    law: EdgeWeightLaw
    base: object = field(default=None, repr=False)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        row = np.concatenate([self.u, self.v])
        col = np.concatenate([self.v, self.u])
        data = np.concatenate([self.w, self.w])
        return sp.csr_matrix((data, (row, col)), shape=(self.n, self.n))

    def neighbors_weights(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        m = self.matrix
        sl = slice(m.indptr[i], m.indptr[i + 1])
        return m.indices[sl], m.data[sl]

    def min_incident(self, i: int) -> float:
        _, wts = self.neighbors_weights(i)
        return float(wts.min()) if len(wts) else np.inf


def assign_weights(
    g: MultiGraph | SimpleGraph,
    law: EdgeWeightLaw,
    mode: str,
    rng: np.random.Generator,
) -> WeightedGraph:
    """Draw edge weights: per distinct pair, min of the multiplicity (original)
    or a single draw (erased)."""
    if mode == "original":
        if not isinstance(g, MultiGraph):
            raise TypeError("original mode weights a MultiGraph")
        w = law.sample_min(g.mult.astype(float), rng)
        return WeightedGraph(g.n, g.ei, g.ej, w, mode, law, base=g)
    if mode == "erased":
        if not isinstance(g, SimpleGraph):
            raise TypeError("erased mode weights a SimpleGraph")
        eu, ev = g.edge_list()
        w = law.sample(rng, len(eu))
        return WeightedGraph(g.n, eu, ev, w, mode, law, base=g)
    raise ValueError(f"unknown mode {mode!r}")


def weighted_graph_from_edges(n: int, edges, weights) -> WeightedGraph:
    """Explicit small weighted graph, mainly for tests and oracles."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    u = np.minimum(e[:, 0], e[:, 1])
    v = np.maximum(e[:, 0], e[:, 1])
    w = np.asarray(weights, dtype=float)
    if (w <= 0).any():
        raise ValueError("weights must be strictly positive")
    return WeightedGraph(n, u, v, w, "explicit", EdgeWeightLaw.exponential())


@dataclass(frozen=True)
class DijkstraResult:
    """Per-vertex minimal weight, hopcount along the optimal path, predecessor.

    Unreachable vertices carry dist = inf, hops = -1, pred = -1.
    """

    source: int
    dist: np.ndarray
    hops: np.ndarray
    pred: np.ndarray

    def path_to(self, target: int) -> list[int]:
        if not np.isfinite(self.dist[target]):
            return []
        path = [int(target)]
        while path[-1] != self.source:
            path.append(int(self.pred[path[-1]]))
        path.reverse()
        return path


def _hops_from_pred(source: int, dist: np.ndarray, pred: np.ndarray) -> np.ndarray:
    hops = np.full(len(dist), -1, dtype=np.int64)
    hops[source] = 0
    order = np.argsort(dist, kind="stable")
    for vtx in order:
        p = pred[vtx]
        if p >= 0:
            hops[vtx] = hops[p] + 1
    return hops


def dijkstra(wg: WeightedGraph, src: int) -> DijkstraResult:
    """Single-source minimal-weight distances with hop tracking."""
    dist, pred = csgraph.dijkstra(
        wg.matrix, directed=False, indices=src, return_predecessors=True
    )
    pred = np.where(pred < 0, -1, pred).astype(np.int64)
    pred[src] = -1
    return DijkstraResult(src, dist, _hops_from_pred(src, dist, pred), pred)


def dijkstra_many(wg: WeightedGraph, sources: np.ndarray) -> list[DijkstraResult]:
    """Batched single-source runs sharing one scipy call."""
    sources = np.asarray(sources, dtype=np.int64)
    dist, pred = csgraph.dijkstra(
        wg.matrix, directed=False, indices=sources, return_predecessors=True
    )
    out = []
    for r, src in enumerate(sources):
        p = np.where(pred[r] < 0, -1, pred[r]).astype(np.int64)
        p[src] = -1
        out.append(DijkstraResult(int(src), dist[r], _hops_from_pred(int(src), dist[r], p), p))
    return out


@dataclass(frozen=True)
class PathResult:
    """Minimal-weight path between two endpoints: weight, hopcount, vertices."""

    weight: float
    hops: int
    path: list[int]
    connected: bool
    endpoints: tuple[int, int]


def sample_pair_fpp(wg: WeightedGraph, rng: np.random.Generator) -> PathResult:
    """FPP between two uniform distinct vertices (resampled on collision).

    Disconnected pairs are an explicit outcome, not an error; callers count
    the disconnected fraction separately.
    """
    if wg.n < 2:
        raise ValueError("need at least two vertices")
    a1 = int(rng.integers(wg.n))
    a2 = int(rng.integers(wg.n))
    while a2 == a1:
        a2 = int(rng.integers(wg.n))
    res = dijkstra(wg, a1)
    if not np.isfinite(res.dist[a2]):
        return PathResult(np.inf, -1, [], False, (a1, a2))
    path = res.path_to(a2)
    if res.hops[a2] > 1:
        # not adjacent: the two minimal incident edges are a lower bound
        floor = wg.min_incident(a1) + wg.min_incident(a2)
        if res.dist[a2] < floor - 1e-9:
            raise AssertionError(
                f"path weight {res.dist[a2]} below incident-minimum bound {floor}"
            )
    return PathResult(float(res.dist[a2]), int(res.hops[a2]), path, True, (a1, a2))


@dataclass(frozen=True)
class TwoEdgeResult:
    """Minimal weight among the two-edge paths linking a vertex pair."""

    value: float
    rescaled: float
    via: int  # intermediate vertex, -1 if no common neighbor


def two_edge_min(wg: WeightedGraph, i: int, j: int) -> TwoEdgeResult:
    """Min over common neighbors s of w(i,s) + w(s,j), plus its sqrt(n) rescaling."""
    if i == j:
        raise ValueError("need two distinct vertices")
    ni, wi = wg.neighbors_weights(i)
    nj, wj = wg.neighbors_weights(j)
    # neighbor lists contain neither i nor j (no self-loops), so the
    # intersection is exactly the set of intermediate vertices
    common, ia, ja = np.intersect1d(ni, nj, assume_unique=True, return_indices=True)
    if len(common) == 0:
        return TwoEdgeResult(np.inf, np.inf, -1)
    totals = wi[ia] + wj[ja]
    k = int(np.argmin(totals))
    return TwoEdgeResult(
        float(totals[k]), float(np.sqrt(wg.n) * totals[k]), int(common[k])
    )


@dataclass(frozen=True)
class MinGammaCurve:
    """Empirical survival of the rescaled minimum of Gamma(2,1) samples."""

    x: np.ndarray
    survival: np.ndarray
    count: int
    replicas: int


def min_gamma_trial(
    beta: float,
    n: int,
    x_grid,
    rng: np.random.Generator,
    replicas: int,
) -> MinGammaCurve:
    """Simulate sqrt(n) * min of floor(beta*n) sums of two unit exponentials.

    The limiting survival at x is exp(-beta * x^2 / 2).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    m = int(beta * n)
    x = np.asarray(x_grid, dtype=float)
    mins = np.empty(replicas)
    chunk = max(1, int(2e7) // max(m, 1))
    for start in range(0, replicas, chunk):
        c = min(chunk, replicas - start)
        y = rng.exponential(size=(c, m)) + rng.exponential(size=(c, m))
        mins[start : start + c] = y.min(axis=1)
    t = np.sqrt(n) * mins
    surv = (t[None, :] > x[:, None]).mean(axis=1)
    return MinGammaCurve(x=x, survival=surv, count=m, replicas=replicas)


def min_gamma_joint(
    m: int, replicas: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rescaled minima of (X+Y), (X+Z), (Y+Z) over shared exponential triples.

    The three statistics decouple in the limit even though they share
    coordinates; returned arrays have one entry per replica.
    """
    eta = np.empty(replicas)
    kappa = np.empty(replicas)
    rho = np.empty(replicas)
    chunk = max(1, int(2e7) // max(m, 1))
    root_m = np.sqrt(m)
    for start in range(0, replicas, chunk):
        c = min(chunk, replicas - start)
        x = rng.exponential(size=(c, m))
        y = rng.exponential(size=(c, m))
        z = rng.exponential(size=(c, m))
        eta[start : start + c] = root_m * (x + y).min(axis=1)
        kappa[start : start + c] = root_m * (x + z).min(axis=1)
        rho[start : start + c] = root_m * (y + z).min(axis=1)
    return eta, kappa, rho
