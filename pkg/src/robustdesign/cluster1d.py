"""Cluster sampling densities on [-1, 1] for polynomial regression.

A cluster density spreads the mass of a classical p-point design over
narrow intervals around its support. The interval [-1, 1] is split at
the midpoints between neighbouring support points; within each piece a
cluster interval occupying the fraction c of the piece is placed so the
support point sits at the same relative position, and the mass on it is
a scaled beta density whose mode is exactly that support point. As
c -> 0 the density collapses to the discrete design; c = 1 recovers a
piecewise beta density on all of [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .model import Design, DesignSpace, RegressorBasis, as_points
from .quadrature import gl_nodes
from .rng import draw_beta, rng_from_seed, seed_key

# Supports of the variance-minimizing designs on [-1, 1] by polynomial
# degree: these minimize tr(A M^-1) among all designs on the interval.
_VARIANCE_OPTIMAL = {
    1: (-1.0, 1.0),
    2: (-1.0, 0.0, 1.0),
    3: (-1.0, -1.0 / math.sqrt(5.0), 1.0 / math.sqrt(5.0), 1.0),
}


def ioptimal_support(degree: int) -> np.ndarray:
    """Support of the integrated-variance-optimal design of a given degree."""
    if degree not in _VARIANCE_OPTIMAL:
        raise ValueError("supports are tabulated for degrees 1, 2 and 3")
    return np.asarray(_VARIANCE_OPTIMAL[degree], dtype=float)


def build_partition(support) -> np.ndarray:
    """Breakpoints splitting [-1, 1] at midpoints between support points.

    Returns p + 1 values; the outer breakpoints extend to the interval
    endpoints so the pieces always cover [-1, 1].
    """
    t = np.asarray(support, dtype=float).ravel()
    if t.size < 2 or np.any(np.diff(t) <= 0.0):
        raise ValueError("support must be strictly increasing with 2+ points")
    if t[0] < -1.0 or t[-1] > 1.0:
        raise ValueError("support points must lie in [-1, 1]")
    mids = 0.5 * (t[:-1] + t[1:])
    return np.concatenate(([min(-1.0, t[0])], mids, [max(1.0, t[-1])]))


def beta_mode_params(delta: float, c: float) -> tuple[float, float]:
    """Beta shape parameters with mode delta and larger shape 1/c.

    delta is the relative position of the support point within its
    cluster interval. The parameterization is mirror symmetric:
    (a, b)(delta) = (b, a)(1 - delta).
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    if not 0.0 < c <= 1.0:
        raise ValueError("c must lie in (0, 1]")
    big = 1.0 / c
    if delta == 0.5:
        return big, big
    if delta < 0.5:
        return 1.0 + (big - 1.0) * delta / (1.0 - delta), big
    return big, 1.0 + (big - 1.0) * (1.0 - delta) / delta


def _beta_pdf(u: np.ndarray, a: float, b: float) -> np.ndarray:
    # exponents are >= 0 here, and numpy evaluates 0.0 ** 0.0 as 1.0
    return u ** (a - 1.0) * (1.0 - u) ** (b - 1.0) / special.beta(a, b)


def _beta_raw_moments(a: float, b: float, jmax: int) -> np.ndarray:
    m = np.ones(jmax + 1)
    for j in range(1, jmax + 1):
        m[j] = m[j - 1] * (a + j - 1.0) / (a + b + j - 1.0)
    return m


def _shifted_moments(left: float, length: float, beta_mom: np.ndarray) -> np.ndarray:
    """Raw moments of left + length * U from the raw moments of U."""
    jmax = beta_mom.size - 1
    out = np.empty(jmax + 1)
    for j in range(jmax + 1):
        terms = [math.comb(j, m) * left ** (j - m) * length**m * beta_mom[m]
                 for m in range(j + 1)]
        out[j] = math.fsum(terms)
    return out


@dataclass(frozen=True, eq=False)
class ClusterDensity1D:
    """A mixture of scaled beta densities clustered around support points."""

    support: np.ndarray
    c: float
    weights: np.ndarray
    breaks: np.ndarray
    space: DesignSpace = field(default_factory=DesignSpace.interval)

    @property
    def p(self) -> int:
        return self.support.size

    @property
    def deltas(self) -> np.ndarray:
        """Relative positions of the support points within their pieces.

        These do not depend on c: shrinking the clusters keeps each
        support point at the same relative position.
        """
        s = self.breaks
        return (self.support - s[:-1]) / (s[1:] - s[:-1])

    @property
    def lefts(self) -> np.ndarray:
        return self.support - self.c * (self.support - self.breaks[:-1])

    @property
    def rights(self) -> np.ndarray:
        return self.support + self.c * (self.breaks[1:] - self.support)

    @property
    def lengths(self) -> np.ndarray:
        return self.rights - self.lefts

    @property
    def shape_params(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = [beta_mode_params(float(d), self.c) for d in self.deltas]
        a, b = zip(*pairs)
        return np.asarray(a), np.asarray(b)

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, 1)[:, 0]
        idx = np.searchsorted(self.lefts, pts, side="right") - 1
        i = np.clip(idx, 0, self.p - 1)
        inside = (idx >= 0) & (pts <= self.rights[i])
        u = np.clip((pts - self.lefts[i]) / self.lengths[i], 0.0, 1.0)
        a, b = self.shape_params
        vals = self.weights[i] / self.lengths[i] * _beta_pdf(u, a[i], b[i])
        return np.where(inside, vals, 0.0)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """iid draws from the mixture: an index batch then a beta batch."""
        cum = np.cumsum(self.weights)
        idx = np.minimum(np.searchsorted(cum, rng.random(size), side="right"),
                         self.p - 1)
        a, b = self.shape_params
        u = draw_beta(rng, a[idx], b[idx], size)
        x = self.lefts[idx] + self.lengths[idx] * u
        return x.reshape(-1, 1)

    def basis_moments(self, basis: RegressorBasis, order: int | None = None):
        """Moment matrices of the density; exact unless an order is given.

        The default path uses beta raw moments and the identity that a
        squared beta density is a rescaled beta density, so M and K are
        exact up to roundoff. Passing an order switches to Gauss-Legendre
        quadrature with that many nodes per cluster (for cross-checks).
        """
        if basis.q != 1:
            raise ValueError("cluster densities are one dimensional")
        if order is not None:
            return self._quadrature_moments(basis, order)
        degree = int(basis.exponents.max())
        jmax = 2 * degree
        a, b = self.shape_params
        mom_m = np.zeros(jmax + 1)
        mom_k = np.zeros(jmax + 1)
        for i in range(self.p):
            base = _shifted_moments(self.lefts[i], self.lengths[i],
                                    _beta_raw_moments(a[i], b[i], jmax))
            mom_m += self.weights[i] * base
            # squared component: beta(a,b)^2 = const * beta(2a-1, 2b-1)
            const = math.exp(special.betaln(2.0 * a[i] - 1.0, 2.0 * b[i] - 1.0)
                             - 2.0 * special.betaln(a[i], b[i]))
            sq = _shifted_moments(self.lefts[i], self.lengths[i],
                                  _beta_raw_moments(2.0 * a[i] - 1.0,
                                                    2.0 * b[i] - 1.0, jmax))
            mom_k += self.weights[i] ** 2 / self.lengths[i] * const * sq
        powers = basis.exponents[:, None, 0] + basis.exponents[None, :, 0]
        return mom_m[powers], mom_k[powers]

    def _quadrature_moments(self, basis: RegressorBasis, order: int):
        p = basis.p
        M = np.zeros((p, p))
        K = np.zeros((p, p))
        a, b = self.shape_params
        for i in range(self.p):
            u, wq = gl_nodes(order, 0.0, 1.0)
            x = self.lefts[i] + self.lengths[i] * u
            F = basis.eval(x.reshape(-1, 1))
            dens = _beta_pdf(u, a[i], b[i])
            M += self.weights[i] * (F * (wq * dens)[:, None]).T @ F
            K += (self.weights[i] ** 2 / self.lengths[i]
                  * (F * (wq * dens**2)[:, None]).T @ F)
        return M, K


def cluster_density(support=None, c: float = 0.5, weights=None,
                    degree: int | None = None) -> ClusterDensity1D:
    """Build a cluster density from a support or a polynomial degree.

    Default weights are half the piece lengths, so the density converges
    to the uniform as c -> 1 with equally spaced supports.
    """
    if support is None:
        if degree is None:
            raise ValueError("give either a support or a degree")
        support = ioptimal_support(degree)
    t = np.asarray(support, dtype=float).ravel()
    if not 0.0 < c <= 1.0:
        raise ValueError("c must lie in (0, 1]")
    breaks = build_partition(t)
    if weights is None:
        w = np.diff(breaks) / (breaks[-1] - breaks[0])
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.size != t.size or np.any(w <= 0.0):
            raise ValueError("weights must be positive, one per support point")
        total = float(w.sum())
        if abs(total - 1.0) > 1e-8:
            raise ValueError("weights must sum to one")
        w = w / total
    return ClusterDensity1D(support=t, c=float(c), weights=w, breaks=breaks)


def largest_remainder_counts(weights, n: int) -> np.ndarray:
    """Integer allocation of n by largest remainder; ties go to lower index."""
    w = np.asarray(weights, dtype=float).ravel()
    if n < 0 or w.size == 0 or np.any(w < 0.0) or w.sum() <= 0.0:
        raise ValueError("weights must be nonnegative with positive sum")
    exact = n * w / w.sum()
    counts = np.floor(exact).astype(int)
    rem = exact - counts
    short = n - int(counts.sum())
    if short > 0:
        order = np.lexsort((np.arange(w.size), -rem))
        counts[order[:short]] += 1
    return counts


def sample_cluster(density: ClusterDensity1D, mode: str, n: int, seed) -> Design:
    """Draw an n-point design from a cluster density.

    complete draws from the mixture directly; stratified fixes the
    per-cluster counts by largest remainder and then draws within
    clusters in index order, one beta batch per cluster.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = rng_from_seed(seed)
    if mode == "complete":
        x = density.sample(n, rng)
    elif mode == "stratified":
        if n < density.p:
            raise ValueError("stratified sampling needs n >= the support size")
        counts = largest_remainder_counts(density.weights, n)
        a, b = density.shape_params
        parts = []
        for i in range(density.p):
            if counts[i] == 0:
                continue
            u = draw_beta(rng, a[i], b[i], int(counts[i]))
            parts.append(density.lefts[i] + density.lengths[i] * u)
        x = np.concatenate(parts).reshape(-1, 1)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    return Design(points=x, strategy=f"cluster-{mode}", seed=seed_key(seed))
