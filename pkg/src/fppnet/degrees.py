"""Heavy-tailed degree law with exponent tau in (1, 2) and i.i.d. degree sequences.

The law is a pure lattice power law: for integer k >= 1,

    P(D > k) = min(1, scale_c * k^-(tau-1)),      P(D >= 1) = 1.

This makes the survival function exactly a constant multiple of a power,
gives a closed-form characteristic scale u_n and an O(1) inversion sampler.
Degrees have infinite mean for tau < 2, so the total degree of n vertices
is of order n^(1/(tau-1)); callers should keep n small enough that this
fits in memory (see cmgraph).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegreeLaw",
    "DegreeSequence",
    "sample_degree",
    "sample_degree_sequence",
    "u_n",
    "restricted_moment",
]

# Degrees are clipped here before casting to int64; a draw this large only
# occurs for u below ~1e-18 and cannot be realized as a graph anyway.
_DEGREE_CAP = 2**62


@dataclass(frozen=True)
class DegreeLaw:
    """Degree distribution with survival min(1, scale_c * k^-(tau-1)).

    For scale_c > 1 the survival clamps at 1 for small k, which removes the
    atom at 1 (P(D=1) = 1 - min(1, scale_c)) and shifts mass upward; the
    power-law tail is unaffected.
    """

    tau: float
    scale_c: float = 1.0

    def __post_init__(self) -> None:
        if not (1.0 < self.tau < 2.0):
            raise ValueError(f"tau must lie strictly in (1, 2), got {self.tau}")
        if not (self.scale_c > 0):
            raise ValueError(f"scale_c must be positive, got {self.scale_c}")

    @property
    def alpha(self) -> float:
        """Tail exponent tau - 1, in (0, 1)."""
        return self.tau - 1.0

    def survival(self, k):
        """P(D > k) for integer (array) k >= 0."""
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            s = self.scale_c * np.where(k >= 1, k, 1.0) ** (-self.alpha)
        return np.where(k < 1, 1.0, np.minimum(1.0, s))

    def pmf(self, k):
        """P(D = k) for integer (array) k >= 1."""
        k = np.asarray(k)
        return self.survival(k - 1) - self.survival(k)


@dataclass(frozen=True)
class DegreeSequence:
    """Realized i.i.d. degree vector with even total and order statistics.

    sorted_desc[r] is the vertex holding the (r+1)-th largest degree, so
    degrees[sorted_desc] is non-increasing. Vertices are 0-based.
    """

    n: int
    degrees: np.ndarray
    total: int
    sorted_desc: np.ndarray
    law: DegreeLaw | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.total % 2 != 0:
            raise ValueError("total degree must be even")
        if self.degrees.min() < 1:
            raise ValueError("all degrees must be >= 1")

    def order_statistics(self) -> np.ndarray:
        """Degrees sorted non-increasingly: entry i is the (i+1)-th largest."""
        return self.degrees[self.sorted_desc]


def _invert(law: DegreeLaw, u: np.ndarray) -> np.ndarray:
    """Inverse-transform the survival function at uniform u in (0, 1)."""
    x = (u / law.scale_c) ** (-1.0 / law.alpha)
    d = np.ceil(np.minimum(x, _DEGREE_CAP)).astype(np.int64)
    return np.maximum(d, 1)


def sample_degree(law: DegreeLaw, u: float) -> int:
    """Degree for a single uniform draw u; monotone non-increasing in u.

    Returns ceil((u/scale_c)^(-1/(tau-1))) clamped below at 1, which
    realizes P(D > k) = min(1, scale_c * k^-(tau-1)) exactly.
    """
    if not (0.0 < u < 1.0):
        raise ValueError(f"u must lie strictly in (0, 1), got {u}")
    return int(_invert(law, np.asarray(u, dtype=float)))


def sample_degree_sequence(law: DegreeLaw, n: int, seed) -> DegreeSequence:
    """Draw n i.i.d. degrees; if the sum is odd the last degree gets +1.

    `seed` may be an int, a SeedSequence or a Generator; the result is
    deterministic given the seed.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 vertices, got {n}")
    rng = np.random.default_rng(seed)
    degrees = _invert(law, rng.random(n))
    total = int(degrees.sum())
    if total % 2 == 1:
        degrees[n - 1] += 1
        total += 1
    order = np.argsort(-degrees, kind="stable")
    return DegreeSequence(n=n, degrees=degrees, total=total, sorted_desc=order, law=law)


def u_n(law: DegreeLaw, n: int) -> float:
    """Characteristic degree scale: the continuous solution of 1 - F(u) = 1/n.

    Equals (scale_c * n)^(1/(tau-1)); the largest of n draws is of this order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return float((law.scale_c * n) ** (1.0 / law.alpha))


def restricted_moment(law: DegreeLaw, a: float, x: float, tol: float = 0.0) -> float:
    """E[D^a 1{D <= x}] by direct pmf summation up to floor(x).

    Exact for the lattice law (the sum is finite); `tol` is accepted for
    interface compatibility and unused.
    """
    if a <= 0:
        raise ValueError("exponent a must be positive")
    if x < 1:
        return 0.0
    k = np.arange(1, int(np.floor(x)) + 1, dtype=float)
    return float(np.sum(k**a * law.pmf(k)))
