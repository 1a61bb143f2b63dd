"""Configuration multigraph by uniform stub pairing, and its erased simple graph.

Only the collapsed representation (vertex pair -> multiplicity, per-vertex
loop count) is kept: for the weight laws used here the minimum over m
parallel edges is available in closed form, so the collapse is lossless
for FPP.

The total degree L_n is a heavy-tailed random variable of typical order
n^(1/(tau-1)) (n^2 at tau = 1.5) whose occasional draws are millions of
times larger than the median, so no algorithm that touches every stub is
viable. The sampler instead peels dominant vertices off in closed form:
in a uniform matching, the stubs of one vertex resolve into a self-pair
count with an explicit unimodal law plus a multivariate hypergeometric
partner draw over the residual degrees, and the remaining stubs again form
a uniform matching. Peeling repeats until the residual fits in memory,
where a shuffled stub array paired consecutively finishes the job (a
uniform permutation paired adjacently is a uniform matching). Both stages
are exact, so the collapsed outcome follows the uniform-matching law for
any L_n.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .degrees import DegreeLaw, DegreeSequence

__all__ = [
    "MultiGraph",
    "SimpleGraph",
    "GoodEventReport",
    "pair_stubs",
    "erase",
    "super_vertices",
    "multiplicity_ratio",
    "common_neighbors",
    "check_good_event",
]

# Above this pair-key range we count multiplicities by chunked sorting
# instead of one bincount over n*n slots.
_BINCOUNT_SLOTS = 3 * 10**7
_CHUNK = 2**24
# residual stub arrays up to this size are materialized and shuffled
_STUB_LIMIT = 3 * 10**7
# numpy's hypergeometric samplers reject parameters at or above 1e9
_NP_HYPERGEOM_MAX = 9 * 10**8


@dataclass(frozen=True)
class MultiGraph:
    """Collapsed configuration multigraph.

    Distinct edges are stored as parallel arrays (ei < ej, mult >= 1) sorted
    by the key ei * n + ej; self_loops[v] counts loops at v (each loop
    consumes two stubs of v).
    """

    n: int
    ei: np.ndarray
    ej: np.ndarray
    mult: np.ndarray
    self_loops: np.ndarray
    degrees: DegreeSequence

    @property
    def edge_keys(self) -> np.ndarray:
        return self.ei.astype(np.int64) * self.n + self.ej

    def multiplicity(self, i: int, j: int) -> int:
        """N(i, j): number of parallel edges between distinct vertices i, j."""
        if i == j:
            raise ValueError("use self_loops for loop counts")
        a, b = (i, j) if i < j else (j, i)
        key = a * self.n + b
        pos = np.searchsorted(self.edge_keys, key)
        if pos < len(self.mult) and self.edge_keys[pos] == key:
            return int(self.mult[pos])
        return 0

    def as_edge_dict(self) -> dict[tuple[int, int], int]:
        """{(i, j): multiplicity} with i < j; intended for small graphs."""
        return {
            (int(a), int(b)): int(m)
            for a, b, m in zip(self.ei, self.ej, self.mult)
        }

    def check_stub_conservation(self) -> None:
        """Assert every stub is consumed exactly once (raises on violation)."""
        consumed = 2 * int(self.mult.sum()) + 2 * int(self.self_loops.sum())
        if consumed != self.degrees.total:
            raise AssertionError(
                f"stub count mismatch: consumed {consumed}, expected {self.degrees.total}"
            )
        per_vertex = np.zeros(self.n, dtype=np.int64)
        np.add.at(per_vertex, self.ei, self.mult)
        np.add.at(per_vertex, self.ej, self.mult)
        per_vertex += 2 * self.self_loops
        if not np.array_equal(per_vertex, self.degrees.degrees):
            bad = int(np.flatnonzero(per_vertex != self.degrees.degrees)[0])
            raise AssertionError(f"vertex {bad}: stub usage != degree")


@dataclass(frozen=True)
class SimpleGraph:
    """Erased graph: CSR adjacency with sorted neighbor lists, no loops."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    law: DegreeLaw | None = field(default=None, compare=False)

    @property
    def erased_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def edge_list(self) -> tuple[np.ndarray, np.ndarray]:
        """Each undirected edge once, as arrays (u, v) with u < v."""
        rows = np.repeat(np.arange(self.n), self.erased_degree)
        mask = rows < self.indices
        return rows[mask], self.indices[mask]


def _count_pair_keys(keys: np.ndarray, slots: int) -> tuple[np.ndarray, np.ndarray]:
    """Unique sorted keys with counts; chunked to bound peak memory."""
    if slots <= _BINCOUNT_SLOTS:
        counts = np.bincount(keys, minlength=slots)
        uniq = np.flatnonzero(counts)
        return uniq.astype(np.int64), counts[uniq]
    parts_k, parts_c = [], []
    for start in range(0, len(keys), _CHUNK):
        uk, uc = np.unique(keys[start : start + _CHUNK], return_counts=True)
        parts_k.append(uk)
        parts_c.append(uc)
    allk = np.concatenate(parts_k)
    allc = np.concatenate(parts_c)
    order = np.argsort(allk, kind="stable")
    allk, allc = allk[order], allc[order]
    boundaries = np.flatnonzero(np.diff(allk)) + 1
    starts = np.concatenate(([0], boundaries))
    return allk[starts], np.add.reduceat(allc, starts)


def _windowed_log_pmf_sample(
    rng: np.random.Generator, log_ratio, lo: int, hi: int, mode: int
) -> int:
    """Sample from a unimodal pmf on [lo, hi] given log(p(x+1)/p(x)).

    Builds the pmf on a window around the mode, widening it until the
    boundary mass is below floating resolution, so truncation is exact to
    double precision even when the support spans billions of states.
    """
    mode = min(max(mode, lo), hi)
    half = 4096
    while True:
        if half > 10**8:
            raise RuntimeError("pmf window failed to localize; mode estimate off")
        w_lo = max(lo, mode - half)
        w_hi = min(hi, mode + half)
        xs = np.arange(w_lo, w_hi + 1, dtype=np.int64)
        logw = np.zeros(len(xs))
        if len(xs) > 1:
            lr = log_ratio(xs[:-1].astype(float))
            logw[1:] = np.cumsum(lr)
        logw -= logw.max()
        w = np.exp(logw)
        edge = max(
            w[0] if w_lo > lo else 0.0,
            w[-1] if w_hi < hi else 0.0,
        )
        if edge < 1e-15 or (w_lo == lo and w_hi == hi):
            cum = np.cumsum(w)
            u = rng.random() * cum[-1]
            return int(xs[np.searchsorted(cum, u)])
        half *= 4


def _sample_self_pairs(rng: np.random.Generator, m: int, R: int) -> int:
    """Number of internal pairs among m marked stubs in a uniform matching
    of m + R stubs.

    p(k) is proportional to m! / ((m-2k)! k! 2^k) * R_(m-2k) * (R-m+2k-1)!!
    with ratio p(k+1)/p(k) = (m-2k)(m-2k-1) / (2(k+1)(R-m+2k+2)).
    """
    lo = max(0, (m - R + 1) // 2)
    hi = m // 2
    if lo >= hi:
        return hi
    mode = int(m * float(m) / (2.0 * (m + R)))

    def log_ratio(k):
        return (
            np.log(m - 2 * k)
            + np.log(m - 2 * k - 1)
            - np.log(2 * (k + 1))
            - np.log(R - m + 2 * k + 2)
        )

    return _windowed_log_pmf_sample(rng, log_ratio, lo, hi, mode)


def _hypergeometric_any(
    rng: np.random.Generator, ngood: int, nbad: int, nsample: int
) -> int:
    """Hypergeometric draw without numpy's 1e9 parameter ceiling."""
    if nsample == 0 or ngood == 0:
        return 0
    if nsample == ngood + nbad:
        return ngood
    if max(ngood, nbad) < _NP_HYPERGEOM_MAX:
        return int(rng.hypergeometric(ngood, nbad, nsample))
    lo = max(0, nsample - nbad)
    hi = min(ngood, nsample)
    if lo >= hi:
        return hi
    mode = int((nsample + 1) * float(ngood + 1) / (ngood + nbad + 2))

    def log_ratio(x):
        return (
            np.log(ngood - x)
            + np.log(nsample - x)
            - np.log(x + 1)
            - np.log(nbad - nsample + x + 1)
        )

    return _windowed_log_pmf_sample(rng, log_ratio, lo, hi, mode)


def _multivariate_hypergeometric_any(
    rng: np.random.Generator, colors: np.ndarray, nsample: int
) -> np.ndarray:
    """Partner counts per color for a without-replacement draw of nsample.

    Large colors are resolved one conditional hypergeometric at a time;
    once the remaining population fits numpy's limits, a single library
    call finishes the rest.
    """
    out = np.zeros(len(colors), dtype=np.int64)
    remaining = int(colors.sum())
    if nsample > remaining:
        raise ValueError("cannot sample more stubs than available")
    order = np.argsort(-colors, kind="stable")
    pos = 0
    while nsample > 0 and remaining >= _NP_HYPERGEOM_MAX:
        c = int(order[pos])
        x = _hypergeometric_any(rng, int(colors[c]), remaining - int(colors[c]), nsample)
        out[c] = x
        nsample -= x
        remaining -= int(colors[c])
        pos += 1
    if nsample > 0:
        rest = order[pos:]
        out[rest] = rng.multivariate_hypergeometric(
            colors[rest], nsample, method="marginals"
        )
    return out


def _pair_residual_stubs(
    n: int, degrees: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Uniformly match a residual degree vector by shuffling the stub array.

    Returns (pair keys lo*n+hi, multiplicities, per-vertex loop counts).
    """
    stubs = np.repeat(np.arange(n, dtype=np.int32), degrees)
    rng.shuffle(stubs)
    a = stubs[0::2]
    b = stubs[1::2]
    lo = np.minimum(a, b).astype(np.int64)
    hi = np.maximum(a, b).astype(np.int64)
    del stubs, a, b
    loop_mask = lo == hi
    self_loops = np.bincount(lo[loop_mask], minlength=n).astype(np.int64)
    keys = lo[~loop_mask] * n + hi[~loop_mask]
    del lo, hi
    uniq, counts = _count_pair_keys(keys, n * n)
    return uniq, counts.astype(np.int64), self_loops


def pair_stubs(
    seq: DegreeSequence,
    rng: np.random.Generator,
    stub_limit: int = _STUB_LIMIT,
) -> MultiGraph:
    """Pair all stubs uniformly at random and collapse to multiplicities.

    Vertices holding a large share of the stubs are peeled off in closed
    form (exact self-pair count plus one multivariate hypergeometric over
    the residual degrees) until at most stub_limit stubs remain, which are
    then matched through an explicit shuffled array. Memory stays at
    O(n + stub_limit + distinct edges) for arbitrarily heavy realizations.
    """
    if seq.total % 2 != 0:
        raise ValueError("total degree must be even before pairing")
    n = seq.n
    residual = seq.degrees.astype(np.int64).copy()
    total = int(seq.total)
    self_loops = np.zeros(n, dtype=np.int64)
    peel_keys: list[np.ndarray] = []
    peel_mult: list[np.ndarray] = []
    while total > stub_limit:
        v = int(np.argmax(residual))
        m = int(residual[v])
        if m < max(2, total // 1000):
            raise ValueError(
                f"residual total degree {total} exceeds stub_limit {stub_limit} "
                "with no dominant vertex left to peel; raise stub_limit"
            )
        R = total - m
        k = _sample_self_pairs(rng, m, R)
        self_loops[v] += k
        residual[v] = 0
        external = m - 2 * k
        if external > 0:
            counts = _multivariate_hypergeometric_any(rng, residual, external)
            hit = np.flatnonzero(counts)
            lo = np.minimum(hit, v).astype(np.int64)
            hi = np.maximum(hit, v).astype(np.int64)
            peel_keys.append(lo * n + hi)
            peel_mult.append(counts[hit])
            residual -= counts
        total = R - external
    if total > 0:
        keys, mult, loops = _pair_residual_stubs(n, residual, rng)
        self_loops += loops
    else:
        keys = np.zeros(0, dtype=np.int64)
        mult = np.zeros(0, dtype=np.int64)
    if peel_keys:
        keys = np.concatenate(peel_keys + [keys])
        mult = np.concatenate(peel_mult + [mult])
        order = np.argsort(keys, kind="stable")
        keys, mult = keys[order], mult[order]
    return MultiGraph(
        n=n,
        ei=(keys // n).astype(np.int64),
        ej=(keys % n).astype(np.int64),
        mult=mult,
        self_loops=self_loops,
        degrees=seq,
    )


def erase(mg: MultiGraph) -> SimpleGraph:
    """Drop self-loops and merge parallel edges into single edges."""
    rows = np.concatenate([mg.ei, mg.ej])
    cols = np.concatenate([mg.ej, mg.ei])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    counts = np.bincount(rows, minlength=mg.n)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    return SimpleGraph(n=mg.n, indptr=indptr, indices=cols, law=mg.degrees.law)


def super_vertices(seq: DegreeSequence, eps_n: float) -> np.ndarray:
    """Vertices with degree above eps_n * n^(1/(tau-1)), largest first.

    Empty result signals that eps_n is above the realized maximum scale.
    """
    if eps_n <= 0:
        raise ValueError("eps_n must be positive")
    if seq.law is None:
        raise ValueError("degree sequence carries no law (tau unknown)")
    threshold = eps_n * seq.n ** (1.0 / seq.law.alpha)
    stats = seq.order_statistics()
    count = int(np.searchsorted(-stats.astype(float), -threshold, side="left"))
    return seq.sorted_desc[:count]


def multiplicity_ratio(mg: MultiGraph, i: int, j: int) -> float:
    """N(i, j) / (L_n * P_i * P_j) with P_v = D_v / L_n.

    Near 1 for the top-degree pairs at large n; pure noise for low-degree
    pairs (N is 0 or 1 there), so concentration checks should restrict to
    large-degree vertices.
    """
    if i == j:
        raise ValueError("need two distinct vertices")
    d = mg.degrees.degrees
    if d[i] < 1 or d[j] < 1:
        raise ValueError("both vertices must have degree >= 1")
    expected = d[i] * float(d[j]) / mg.degrees.total
    return mg.multiplicity(i, j) / expected


def common_neighbors(sg: SimpleGraph, i: int, j: int) -> int:
    """Number of shared neighbors, via sorted-list intersection."""
    if i == j:
        raise ValueError("need two distinct vertices")
    return int(
        np.intersect1d(sg.neighbors(i), sg.neighbors(j), assume_unique=True).size
    )


@dataclass(frozen=True)
class GoodEventReport:
    """Which regularity events hold for a realization, and where they first fail.

    g1: L_n * n^(-1/(tau-1)) within [a, 1/a].
    g2: every order statistic within [C^-1 (n/i)^(1/(tau-1)), C (n/i)^(1/(tau-1))].
    g3: erased degree of the rank-i vertex at most C_er * n / i.
    Violating ranks are 1-based; -1 means no violation.
    """

    g1: bool
    g2: bool
    g3: bool
    scaled_total: float
    first_violation_g2: int = -1
    first_violation_g3: int = -1

    @property
    def all_hold(self) -> bool:
        return self.g1 and self.g2 and self.g3


def check_good_event(
    seq: DegreeSequence,
    sg: SimpleGraph,
    a: float,
    C: float,
    C_er: float,
) -> GoodEventReport:
    """Diagnose the three degree-regularity events for one realization."""
    if min(a, C, C_er) <= 0:
        raise ValueError("all constants must be positive")
    if seq.law is None:
        raise ValueError("degree sequence carries no law (tau unknown)")
    inv_alpha = 1.0 / seq.law.alpha
    n = seq.n

    scaled_total = seq.total * n ** (-inv_alpha)
    g1 = a <= scaled_total <= 1.0 / a

    ranks = np.arange(1, n + 1, dtype=float)
    scale = (n / ranks) ** inv_alpha
    stats = seq.order_statistics().astype(float)
    ok2 = (stats >= scale / C) & (stats <= scale * C)
    g2 = bool(ok2.all())
    viol2 = -1 if g2 else int(np.flatnonzero(~ok2)[0]) + 1

    der_by_rank = sg.erased_degree[seq.sorted_desc].astype(float)
    ok3 = der_by_rank <= C_er * n / ranks
    g3 = bool(ok3.all())
    viol3 = -1 if g3 else int(np.flatnonzero(~ok3)[0]) + 1

    return GoodEventReport(
        g1=g1,
        g2=g2,
        g3=g3,
        scaled_total=float(scaled_total),
        first_violation_g2=viol2,
        first_violation_g3=viol3,
    )
