"""Poisson-Dirichlet limit objects for the rescaled degree order statistics.

A realization keeps the first K points xi_i = Gamma_i^(-1/(tau-1)) of the
limiting point process (Gamma_i a unit-rate Poisson arrival sequence),
completes the convergent-but-slow sum eta = sum_j xi_j with an integral
tail correction, and normalizes to cell masses P_i = xi_i / eta. Cells
beyond K are represented collectively by tail_mass and can be realized
lazily one at a time when a sampler lands in the tail.

The joint selection probability f(s, t) (chance that D multinomial trials
hit both a cell of mass s and one of mass t) reduces to the map
h(s) = 1 - E[(1-s)^D], which for the lattice power law has the closed form

    h(s) = s * (1 + sum_{k>=1} P(D > k) (1-s)^k),

evaluated through a polylogarithm expansion for small s (where the naive
series needs ~1/s terms) and by direct summation otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammaln

from .degrees import DegreeLaw, sample_degree

__all__ = [
    "PDRealization",
    "CellOccupancy",
    "FTailReport",
    "sample_pd",
    "pd_moment_exact",
    "pd_power_sum_samples",
    "cell_hit_probability",
    "f_joint",
    "f_joint_matrix",
    "sample_cell_occupancy",
    "sample_tail_cell",
    "check_f_tail_bound",
]

_SERIES_SWITCH = 0.3  # below this, h(s) goes through the polylog expansion
_ZETA_TERMS = 40


@dataclass(frozen=True)
class PDRealization:
    """Truncated Poisson-Dirichlet sample with tail-corrected normalization.

    Invariants: xi and P are strictly decreasing, P.sum() + tail_mass == 1
    up to rounding, and tail_mass shrinks as K grows.
    """

    tau: float
    K: int
    xi: np.ndarray
    gamma_K: float
    eta: float
    P: np.ndarray
    tail_mass: float

    @property
    def alpha(self) -> float:
        return self.tau - 1.0


def _tail_integral(gamma: float, tau: float) -> float:
    """Integral estimate of sum_{j > K} Gamma_j^(-1/(tau-1)) past Gamma_K = gamma."""
    alpha = tau - 1.0
    return gamma ** (-(2.0 - tau) / alpha) * alpha / (2.0 - tau)


def sample_pd(tau: float, K: int, rng: np.random.Generator) -> PDRealization:
    """Draw the first K Poisson-Dirichlet points and the corrected total."""
    if not (1.0 < tau < 2.0):
        raise ValueError(f"tau must lie strictly in (1, 2), got {tau}")
    if K < 10:
        raise ValueError(f"truncation K must be >= 10, got {K}")
    gam = np.cumsum(rng.exponential(size=K))
    xi = gam ** (-1.0 / (tau - 1.0))
    tail = _tail_integral(float(gam[-1]), tau)
    eta = float(xi.sum() + tail)
    P = xi / eta
    return PDRealization(
        tau=tau,
        K=K,
        xi=xi,
        gamma_K=float(gam[-1]),
        eta=eta,
        P=P,
        tail_mass=tail / eta,
    )


def pd_moment_exact(tau: float, r: int) -> float:
    """E[sum_i P_i^r] in closed Beta-function form: Gamma(r-a)/(Gamma(r)Gamma(1-a)).

    With a = tau - 1; r = 2 gives 2 - tau. Valid for integer r >= 2.
    """
    if r < 2:
        raise ValueError("need r >= 2 (the r = 1 sum is identically 1)")
    a = tau - 1.0
    return float(np.exp(gammaln(r - a) - gammaln(r) - gammaln(1.0 - a)))


def pd_power_sum_samples(
    tau: float, K: int, r: int, draws: int, rng: np.random.Generator
) -> np.ndarray:
    """Monte Carlo draws of sum_i P_i^r, vectorized over realizations."""
    out = np.empty(draws)
    chunk = max(1, int(2e7) // K)
    for start in range(0, draws, chunk):
        m = min(chunk, draws - start)
        gam = np.cumsum(rng.exponential(size=(m, K)), axis=1)
        xi = gam ** (-1.0 / (tau - 1.0))
        tail = gam[:, -1] ** (-(2.0 - tau) / (tau - 1.0)) * ((tau - 1.0) / (2.0 - tau))
        eta = xi.sum(axis=1) + tail
        out[start : start + m] = ((xi / eta[:, None]) ** r).sum(axis=1)
    return out


@lru_cache(maxsize=32)
def _zeta_table(alpha_key: float) -> np.ndarray:
    """zeta(alpha - k) for k = 0..(_ZETA_TERMS - 1); alpha in (0, 1) avoids the pole."""
    return np.array(
        [float(mpmath.zeta(alpha_key - k)) for k in range(_ZETA_TERMS)]
    )


def _polylog_near_one(alpha: float, x: np.ndarray) -> np.ndarray:
    """Li_alpha(x) for x close to 1 via the Hurwitz-series expansion.

    Li_alpha(e^w) = Gamma(1-alpha)(-w)^(alpha-1) + sum_k zeta(alpha-k) w^k / k!,
    valid for |w| < 2*pi; here w = ln(x) is small and negative.
    """
    w = np.log(x)
    lead = gamma_fn(1.0 - alpha) * (-w) ** (alpha - 1.0)
    zt = _zeta_table(round(alpha, 12))
    acc = np.zeros_like(w)
    term = np.ones_like(w)
    for k in range(_ZETA_TERMS):
        acc += zt[k] * term
        term = term * w / (k + 1)
    return lead + acc


def _survival_power_series(law: DegreeLaw, x: np.ndarray, tol: float) -> np.ndarray:
    """T(x) = sum_{k>=1} P(D > k) x^k by direct summation, for x away from 1."""
    xmax = float(x.max(initial=0.0))
    if xmax <= 0.0:
        return np.zeros_like(x)
    n_terms = max(64, int(np.ceil(np.log(max(tol, 1e-300)) / np.log(xmax))) + 1)
    k = np.arange(1, n_terms + 1, dtype=float)
    surv = np.asarray(law.survival(k))
    return (surv * x[:, None] ** k).sum(axis=1)


def _survival_series_smooth(law: DegreeLaw, x: np.ndarray) -> np.ndarray:
    """T(x) via polylog; handles the clamped survival head when scale_c > 1."""
    alpha = law.alpha
    li = _polylog_near_one(alpha, x)
    if law.scale_c <= 1.0:
        return law.scale_c * li
    # survival is clamped at 1 for k <= k0: replace those series terms
    k0 = int(np.floor(law.scale_c ** (1.0 / alpha)))
    ks = np.arange(1, k0 + 1, dtype=float)
    xs = x[:, None] ** ks
    head = xs.sum(axis=1) - law.scale_c * (xs * ks ** (-alpha)).sum(axis=1)
    return head + law.scale_c * li


def cell_hit_probability(law: DegreeLaw, s, tol: float = 1e-10):
    """h(s) = 1 - E[(1-s)^D]: chance D trials hit a cell of mass s at least once.

    Vectorized over s in [0, 1]. Behaves like scale_c*Gamma(2-tau)*s^(tau-1)
    as s -> 0.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if (s_arr < -1e-15).any() or (s_arr > 1 + 1e-12).any():
        raise ValueError("cell mass must lie in [0, 1]")
    s_arr = np.clip(s_arr, 0.0, 1.0)
    out = np.empty_like(s_arr)
    small = (s_arr < _SERIES_SWITCH) & (s_arr > 0.0)
    big = ~small & (s_arr > 0.0)
    if small.any():
        out[small] = s_arr[small] * (
            1.0 + _survival_series_smooth(law, 1.0 - s_arr[small])
        )
    if big.any():
        out[big] = s_arr[big] * (
            1.0 + _survival_power_series(law, 1.0 - s_arr[big], tol)
        )
    out[s_arr == 0.0] = 0.0
    if np.isscalar(s) or np.ndim(s) == 0:
        return float(out[0])
    return out


def f_joint(s: float, t: float, law: DegreeLaw, tol: float = 1e-10) -> float:
    """Probability that D multinomial trials select both a mass-s and a mass-t cell.

    f(s, t) = 1 - E[(1-s)^D] - E[(1-t)^D] + E[(1-s-t)^D]; symmetric,
    zero when either argument is zero, and requires s + t <= 1.
    """
    if s < 0 or t < 0 or s + t > 1 + 1e-12:
        raise ValueError(f"need s, t >= 0 with s + t <= 1, got s={s}, t={t}")
    h = cell_hit_probability(law, np.array([s, t, min(s + t, 1.0)]), tol)
    return float(h[0] + h[1] - h[2])


def f_joint_matrix(P: np.ndarray, law: DegreeLaw, tol: float = 1e-10) -> np.ndarray:
    """f(P_i, P_j) for all pairs, as a symmetric matrix with zero diagonal."""
    h1 = cell_hit_probability(law, P, tol)
    pair_sum = P[:, None] + P[None, :]
    iu = np.triu_indices(len(P), k=1)
    h2 = np.zeros_like(pair_sum)
    h2[iu] = cell_hit_probability(law, pair_sum[iu], tol)
    h2 = h2 + h2.T
    f = h1[:, None] + h1[None, :] - h2
    np.fill_diagonal(f, 0.0)
    return f


@dataclass(frozen=True)
class CellOccupancy:
    """Outcome of D multinomial trials over the cell masses.

    cells lists the distinct cells hit; indices >= K are synthetic tail
    cells, distinct within and across draws by construction (each tail
    trial opens a fresh cell). chosen is uniform over cells.
    """

    distinct: int
    cells: np.ndarray
    chosen: int


def sample_cell_occupancy(
    pd: PDRealization, law: DegreeLaw, rng: np.random.Generator
) -> CellOccupancy:
    """Draw D ~ F, scatter D trials over the cells, record distinct hits.

    Trials landing in the collective tail each open a distinct synthetic
    cell (index >= K); this slightly inflates the distinct count, by less
    than one cell on average at the default truncations.
    """
    d = sample_degree(law, rng.random())
    pvals = np.append(pd.P, pd.tail_mass)
    pvals /= pvals.sum()
    counts = rng.multinomial(d, pvals)
    core = np.flatnonzero(counts[: pd.K])
    n_tail = int(counts[pd.K])
    cells = np.concatenate([core, pd.K + np.arange(n_tail)])
    chosen = int(cells[rng.integers(len(cells))])
    return CellOccupancy(distinct=len(cells), cells=cells, chosen=chosen)


def sample_occupancy_pair(
    pd: PDRealization, law: DegreeLaw, rng: np.random.Generator
) -> tuple[CellOccupancy, CellOccupancy, int]:
    """Two conditionally independent occupancy draws sharing one realization.

    The second draw's synthetic tail labels are offset so they never collide
    with the first draw's; the returned third value is the number of common
    cells (necessarily core cells).
    """
    occ1 = sample_cell_occupancy(pd, law, rng)
    occ2 = sample_cell_occupancy(pd, law, rng)
    tail1 = occ1.distinct - int((occ1.cells < pd.K).sum())
    if tail1:
        cells2 = occ2.cells.copy()
        shift = cells2 >= pd.K
        cells2[shift] += tail1
        chosen2 = occ2.chosen + tail1 if occ2.chosen >= pd.K else occ2.chosen
        occ2 = CellOccupancy(occ2.distinct, cells2, chosen2)
    common = int(
        np.intersect1d(
            occ1.cells[occ1.cells < pd.K],
            occ2.cells[occ2.cells < pd.K],
            assume_unique=True,
        ).size
    )
    return occ1, occ2, common


def sample_tail_cell(
    pd: PDRealization, rng: np.random.Generator, max_blocks: int = 60
) -> tuple[int, float]:
    """Realize one cell from the unrealized tail, size-biased by its mass.

    Extends the Poisson arrival sequence past Gamma_K in blocks, choosing a
    realized point with probability proportional to xi against the integral
    estimate of everything further out. Returns (index >= K, xi value).
    """
    gamma = pd.gamma_K
    base = pd.K
    block = max(pd.K, 64)
    inv_alpha = 1.0 / pd.alpha
    for _ in range(max_blocks):
        gam = gamma + np.cumsum(rng.exponential(size=block))
        xi = gam**-inv_alpha
        cum = np.cumsum(xi)
        rest = _tail_integral(float(gam[-1]), pd.tau)
        u = rng.random() * (cum[-1] + rest)
        if u < cum[-1]:
            pos = int(np.searchsorted(cum, u))
            return base + pos, float(xi[pos])
        gamma = float(gam[-1])
        base += block
    return base - 1, float(xi[-1])


@dataclass(frozen=True)
class FTailReport:
    """Decay check of f(P_i, P_j) against c_cal * eta^(1-tau) / max(i, j)."""

    holds: bool
    max_ratio: float
    worst_pair: tuple[int, int]
    pairs_checked: int


def check_f_tail_bound(
    pd: PDRealization,
    law: DegreeLaw,
    c_cal: float,
    min_rank: int = 20,
) -> FTailReport:
    """Verify the large-rank decay of the joint selection probability.

    Checks all pairs i, j <= K (1-based ranks) with max(i, j) >= min_rank;
    the reported ratio is f / bound, so holds means max_ratio <= 1.
    """
    if pd.K < 100:
        raise ValueError("need K >= 100 for a meaningful tail check")
    f = f_joint_matrix(pd.P, law)
    ranks = np.arange(1, pd.K + 1)
    max_rank = np.maximum(ranks[:, None], ranks[None, :])
    bound = c_cal * pd.eta ** (1.0 - pd.tau) / max_rank
    mask = np.triu(max_rank >= min_rank, k=1)
    ratio = np.where(mask, f / bound, 0.0)
    worst_flat = int(np.argmax(ratio))
    wi, wj = np.unravel_index(worst_flat, ratio.shape)
    return FTailReport(
        holds=bool(ratio.max() <= 1.0),
        max_ratio=float(ratio.max()),
        worst_pair=(int(wi) + 1, int(wj) + 1),
        pairs_checked=int(mask.sum()),
    )
