"""Bowl-shaped minimax density for straight-line regression and jittered designs.

The minimax density on [-1, 1] is m(x) = 3 (x^2 - alpha)+ / d(alpha), the
positive-part quadratic whose shape parameter alpha <= 0 is in one-to-one
correspondence with the variance/bias tradeoff weight nu. A jittered
design spreads n uniform bins of half-width c/n around the n quantiles of
m; its worst-case loss, second moment and least favourable contaminant
all have closed forms, which double as oracles for the generic moment and
loss machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Design, DesignSpace, RegressorBasis, as_points
from .quadrature import gl_nodes
from .rng import rng_from_seed, seed_key, draw_indices

NU_FLOOR = 25.0 / 106.0  # value of nu at alpha = 0; smaller nu needs alpha > 0


def d_alpha(alpha: float) -> float:
    """Normalizing constant of 3 (x^2 - alpha)+ on [-1, 1]."""
    if alpha <= 0.0:
        return 2.0 * (1.0 - 3.0 * alpha)
    if alpha >= 1.0:
        raise ValueError("the density support is empty for alpha >= 1")
    r = math.sqrt(alpha)
    return 2.0 * (1.0 - r) ** 2 * (1.0 + 2.0 * r)


def nu_from_alpha(alpha: float) -> float:
    """Tradeoff weight nu for which the density with this alpha is minimax."""
    if alpha <= 0.0:
        return 1.0 / (1.0 + 9.0 * (3.0 - 5.0 * alpha) ** 2 / (25.0 * (1.0 - 3.0 * alpha) ** 3))
    if alpha >= 1.0:
        raise ValueError("the density support is empty for alpha >= 1")
    r = math.sqrt(alpha)
    num = 9.0 * (3.0 + 6.0 * r + 4.0 * alpha + 2.0 * alpha * r) ** 2
    den = 25.0 * (1.0 - r) ** 2 * (1.0 + 2.0 * r) ** 3
    return 1.0 / (1.0 + num / den)


def alpha_from_nu(nu: float, tol: float = 1e-12) -> float:
    """Invert nu(alpha) on alpha <= 0 by bisection.

    Only nu in (25/106, 1) is reachable with a nonpositive alpha; smaller
    values are rejected.
    """
    if not NU_FLOOR < nu < 1.0:
        if nu == NU_FLOOR:
            return 0.0
        raise ValueError(f"nu must lie in ({NU_FLOOR:.6f}, 1) for a nonpositive alpha")
    g0 = nu_from_alpha(0.0) - nu
    if g0 >= 0.0:
        if g0 <= 1e-14:
            return 0.0
        raise ValueError("nu is below the reachable range")  # pragma: no cover
    lo = -1.0
    while nu_from_alpha(lo) - nu < 0.0:
        lo *= 2.0
        if lo < -1e6:
            raise ValueError("nu too close to 1; the shape parameter diverges")
    hi = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if nu_from_alpha(mid) - nu >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _moment_pieces(alpha: float) -> tuple[float, float, float]:
    """Raw integrals (x^2-a)+ , ((x^2-a)+)^2 and x^2 ((x^2-a)+)^2 pieces."""
    if alpha <= 0.0:
        mu2_num = 6.0 * (1.0 / 5.0 - alpha / 3.0)
        k0_num = 18.0 * (1.0 / 5.0 - 2.0 * alpha / 3.0 + alpha**2)
        k2_num = 18.0 * (1.0 / 7.0 - 2.0 * alpha / 5.0 + alpha**2 / 3.0)
        return mu2_num, k0_num, k2_num
    if alpha >= 1.0:
        raise ValueError("the density support is empty for alpha >= 1")
    a52 = alpha ** 2.5
    a72 = alpha ** 3.5
    mu2_num = 6.0 * (1.0 / 5.0 - alpha / 3.0 + (2.0 / 15.0) * a52)
    k0_num = 18.0 * (1.0 / 5.0 - 2.0 * alpha / 3.0 + alpha**2 - (8.0 / 15.0) * a52)
    k2_num = 18.0 * (1.0 / 7.0 - 2.0 * alpha / 5.0 + alpha**2 / 3.0 - (8.0 / 105.0) * a72)
    return mu2_num, k0_num, k2_num


def density_second_moment(alpha: float) -> float:
    """Second moment mu2 of the bowl-shaped density."""
    d = d_alpha(alpha)
    return _moment_pieces(alpha)[0] / d


def alpha_objective(alpha: float, nu: float) -> float:
    """Worst-case loss of the bowl-shaped density with shape alpha.

    Minimizing this over alpha recovers the alpha <-> nu correspondence;
    it stays finite on all of alpha < 1 and is mainly useful for plots
    and for the grid-search oracle in the tests.
    """
    d = d_alpha(alpha)
    mu2_num, k0_num, k2_num = _moment_pieces(alpha)
    mu2 = mu2_num / d
    kappa0 = k0_num / d**2
    kappa2 = k2_num / d**2
    return 2.0 * (1.0 - nu) * (1.0 + 1.0 / (3.0 * mu2)) + 2.0 * nu * max(
        kappa0, kappa2 / (3.0 * mu2**2)
    )


def minimax_loss(nu: float, alpha: float | None = None) -> float:
    """Worst-case loss of the minimax density for weight nu."""
    if alpha is None:
        alpha = alpha_from_nu(nu)
    mu2 = density_second_moment(alpha)
    return 2.0 * (1.0 - nu) * (1.0 + 1.0 / (3.0 * mu2)) + nu * (
        1.0 + 1.25 * (3.0 * mu2 - 1.0) ** 2
    )


def _cardano(s, alpha: float):
    """Real root of t^3 - 3 alpha t + s = 0 via sign-preserving cube roots.

    Only the large-magnitude cube-root argument is formed directly; the
    small one comes from their product alpha^3, which avoids the
    cancellation that otherwise wrecks accuracy near alpha = 0.
    """
    s = np.asarray(s, dtype=float)
    disc = np.sqrt(0.25 * s**2 - alpha**3)
    big = np.where(s <= 0.0, -0.5 * s + disc, -0.5 * s - disc)
    small = np.divide(alpha**3, big, out=np.zeros_like(big), where=big != 0.0)
    return np.cbrt(big) + np.cbrt(small)


def cardano_quantiles(n: int, alpha: float) -> np.ndarray:
    """Quantiles t_1 < ... < t_n of the bowl-shaped density at levels (2i-1)/(2n)."""
    if n < 1:
        raise ValueError("n must be positive")
    if alpha > 0.0:
        raise ValueError("closed-form quantiles require alpha <= 0")
    i = np.arange(1, n + 1, dtype=float)
    s = -(1.0 - 3.0 * alpha) * (2.0 * i - 1.0 - n) / n
    return _cardano(s, alpha)


@dataclass(frozen=True, eq=False)
class HuberDensity:
    """The bowl-shaped minimax density m(x) = 3 (x^2 - alpha) / d on [-1, 1].

    Restricted to alpha <= 0, where the support is the whole interval and
    the quantile map has the Cardano closed form used for iid sampling.
    """

    alpha: float
    space: DesignSpace = field(default_factory=DesignSpace.interval)

    def __post_init__(self):
        if self.alpha > 0.0:
            raise ValueError("sampling density requires alpha <= 0")

    @classmethod
    def from_nu(cls, nu: float) -> "HuberDensity":
        return cls(alpha_from_nu(nu))

    @property
    def d(self) -> float:
        return d_alpha(self.alpha)

    @property
    def nu(self) -> float:
        return nu_from_alpha(self.alpha)

    @property
    def second_moment(self) -> float:
        return density_second_moment(self.alpha)

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, 1)[:, 0]
        inside = (pts >= -1.0) & (pts <= 1.0)
        return np.where(inside, 3.0 * (pts**2 - self.alpha) / self.d, 0.0)

    def cdf(self, x) -> np.ndarray:
        pts = np.clip(as_points(x, 1)[:, 0], -1.0, 1.0)
        a = self.alpha
        return (pts**3 - 3.0 * a * pts + 1.0 - 3.0 * a) / self.d

    def quantile(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        s = -(1.0 - 3.0 * self.alpha) * (2.0 * u - 1.0)
        return _cardano(s, self.alpha)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.quantile(rng.random(size)).reshape(-1, 1)

    def basis_moments(self, basis: RegressorBasis, order: int | None = None):
        order = 64 if order is None else order
        x, w = gl_nodes(order, -1.0, 1.0)
        F = basis.eval(x)
        m = self.pdf(x)
        M = (F * (w * m)[:, None]).T @ F
        K = (F * (w * m**2)[:, None]).T @ F
        return M, K


def huber_density(alpha: float) -> HuberDensity:
    return HuberDensity(alpha)


@dataclass(frozen=True, eq=False)
class JitterDensity:
    """Equal-mass uniform bins of half-width c/n centered at given quantiles."""

    quantiles: np.ndarray
    c: float

    def __post_init__(self):
        t = np.asarray(self.quantiles, dtype=float)
        object.__setattr__(self, "quantiles", t)

    @property
    def n_bins(self) -> int:
        return self.quantiles.shape[0]

    @property
    def space(self) -> DesignSpace:
        return DesignSpace.interval(-1.0, 1.0)

    @property
    def half_width(self) -> float:
        return self.c / self.n_bins

    @property
    def lefts(self) -> np.ndarray:
        return self.quantiles - self.half_width

    @property
    def rights(self) -> np.ndarray:
        return self.quantiles + self.half_width

    @property
    def second_moment(self) -> float:
        n = self.n_bins
        return float(np.mean(self.quantiles**2)) + self.c**2 / (3.0 * n**2)

    @property
    def bias_constant(self) -> float:
        """The constant worst-case bias term gamma_0 shared by all realizations."""
        lam2 = self.second_moment
        return max(1.0, 1.0 / (3.0 * lam2)) / self.c

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, 1)[:, 0]
        idx = np.searchsorted(self.lefts, pts, side="right") - 1
        idx_c = np.clip(idx, 0, self.n_bins - 1)
        inside = (idx >= 0) & (pts <= self.rights[idx_c])
        return np.where(inside, 1.0 / (2.0 * self.c), 0.0)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        idx = draw_indices(rng, self.n_bins, size)
        offs = (2.0 * rng.random(size) - 1.0) * self.half_width
        return (self.quantiles[idx] + offs).reshape(-1, 1)

    def basis_moments(self, basis: RegressorBasis, order: int | None = None):
        # Piecewise-constant density: bin antiderivatives are exact.
        e = basis.exponents[:, 0]
        P = (e[:, None] + e[None, :] + 1).astype(float)
        left = self.lefts[:, None, None] ** P[None, :, :]
        right = self.rights[:, None, None] ** P[None, :, :]
        raw = ((right - left) / P[None, :, :]).sum(axis=0)
        M = raw / (2.0 * self.c)
        return M, M / (2.0 * self.c)


def jitter_density(quantiles, c: float) -> JitterDensity:
    """Validated jitter density: bins disjoint and inside [-1, 1]."""
    t = np.sort(np.asarray(quantiles, dtype=float))
    n = t.shape[0]
    if not 0.0 < c <= 1.0:
        raise ValueError("bin scale c must lie in (0, 1]")
    h = c / n
    if t[0] - h < -1.0 - 1e-12 or t[-1] + h > 1.0 + 1e-12:
        raise ValueError(
            f"bins overflow [-1, 1]: feasibility requires c <= n (1 + t_1) = {n * (1.0 + t[0]):.6g}"
        )
    gaps = np.diff(t)
    bad = np.flatnonzero(gaps < 2.0 * h - 1e-12)
    if bad.size:
        i = int(bad[0])
        raise ValueError(
            f"bins {i} and {i + 1} overlap: centers {t[i]:.6g} and {t[i + 1]:.6g} "
            f"are closer than the bin width {2.0 * h:.6g}"
        )
    return JitterDensity(t, float(c))


def jitter_moments(quantiles, c: float) -> tuple[float, float]:
    """Second moment and constant bias term of a jitter density (pure arithmetic)."""
    t = np.asarray(quantiles, dtype=float)
    n = t.shape[0]
    lam2 = float(np.mean(t**2)) + c**2 / (3.0 * n**2)
    gamma0 = max(1.0, 1.0 / (3.0 * lam2)) / c
    return lam2, gamma0


@dataclass(frozen=True)
class SlrClosedLosses:
    """Closed-form worst-case losses for straight-line regression."""

    nu: float
    c: float
    alpha: float
    minimax: float        # loss of the minimax density itself
    jittered: float       # loss of the jittered version with bin scale c
    second_moment: float
    bias_constant: float


def slr_closed_losses(nu: float, c: float, alpha: float | None = None,
                      quantiles=None, n: int | None = None) -> SlrClosedLosses:
    """Closed-form losses, evaluated as formulas without feasibility checks.

    The jittered-density construction enforces disjoint bins; these
    formulas stay evaluable on a full c grid so that the loss profile can
    be examined beyond the feasible range.
    """
    if alpha is None:
        alpha = alpha_from_nu(nu)
    if quantiles is None:
        if n is None:
            raise ValueError("need either quantiles or n")
        quantiles = cardano_quantiles(n, alpha)
    lam2, gamma0 = jitter_moments(quantiles, c)
    jittered = 2.0 * (1.0 - nu) * (1.0 + 1.0 / (3.0 * lam2)) + nu * gamma0
    return SlrClosedLosses(
        nu=nu, c=c, alpha=alpha, minimax=minimax_loss(nu, alpha),
        jittered=jittered, second_moment=lam2, bias_constant=gamma0,
    )


def jitter_contaminant(x, quantiles, c: float, tau: float, n: int) -> np.ndarray:
    """Closed-form least favourable contaminant of a jitter density.

    Piecewise constant (scaled by x when the second moment is below 1/3),
    supported on the union of bins. Degenerate when the worst-case bias
    constant equals one, in which case the zero function is returned.
    """
    t = np.asarray(quantiles, dtype=float)
    lam2, gamma0 = jitter_moments(t, c)
    pts = as_points(x, 1)[:, 0]
    dens = JitterDensity(t, float(c))
    inside = dens.pdf(pts) > 0.0
    if gamma0 <= 1.0 + 1e-12:
        return np.zeros_like(pts)
    base = (inside.astype(float) - 1.0 / gamma0) / math.sqrt(2.0 * c * (1.0 - 1.0 / gamma0))
    if lam2 < 1.0 / 3.0:
        base = base * pts / math.sqrt(lam2)
    return (tau / math.sqrt(n)) * base


def slr_variance_term(design: Design | np.ndarray) -> float:
    """Variance term tr(A M_delta^-1) from the design mean and variance."""
    pts = design.points[:, 0] if isinstance(design, Design) else np.asarray(design, float).ravel()
    mu = float(np.mean(pts))
    var = float(np.mean((pts - mu) ** 2))
    if var <= 0.0:
        return math.inf
    return 2.0 * (1.0 + (mu**2 + 1.0 / 3.0) / var)


def sample_jitter(density: JitterDensity, mode: str, n: int, seed) -> Design:
    """Draw a jittered design: one point per bin, or bins chosen uniformly.

    Stream layout: stratified consumes one uniform batch (offsets);
    complete consumes an index batch then an offset batch.
    """
    rng = rng_from_seed(seed)
    h = density.half_width
    if mode == "stratified":
        if n != density.n_bins:
            raise ValueError("stratified jitter needs exactly one point per bin")
        x = density.quantiles + (2.0 * rng.random(n) - 1.0) * h
    elif mode == "complete":
        idx = draw_indices(rng, density.n_bins, n)
        x = density.quantiles[idx] + (2.0 * rng.random(n) - 1.0) * h
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    return Design(points=x.reshape(-1, 1), strategy=f"jitter-{mode}", seed=seed_key(seed))
