"""Clustered central composite designs for full second-order models.

The support is the central composite arrangement with all peripheral
points on the sphere of radius sqrt(k): the 2^k corners of [-1, 1]^k,
2k axial points, and the centre. Clustering spreads each site's mass
over a neighbourhood scaled by nu:

* k = 2: neighbourhoods are the Voronoi tiles of the nine sites inside
  the box, contracted toward their generators by the factor nu, and the
  mass on each carries a ball density restricted to the contracted tile.
* any k: neighbourhoods are disjoint balls of radius r0 * nu around the
  sites, each carrying a spherical beta density in full.

In both cases the ball shape parameter is the reciprocal of the volume
fraction nu^k, so the clusters sharpen as they shrink.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .model import Design, DesignSpace, RegressorBasis, as_points
from .rng import draw_beta, draw_signs, draw_uniform, rng_from_seed, seed_key, substream
from .voronoi import (
    ConvexPolygon,
    contract_polygon,
    covering_radius,
    polygon_quad_nodes,
    polygon_radial_mass,
    voronoi_tiles,
)


def ccd_support(k: int) -> np.ndarray:
    """Central composite sites: corners, then axial pairs, then centre.

    Axial points sit at distance sqrt(k), so all peripheral sites lie on
    a common sphere. Corners come in binary order, axial pairs axis by
    axis with the negative point first; the centre is last.
    """
    if k < 2:
        raise ValueError("the composite layout needs k >= 2 factors")
    corners = np.array(list(itertools.product((-1.0, 1.0), repeat=k)))
    axial = np.zeros((2 * k, k))
    for j in range(k):
        axial[2 * j, j] = -math.sqrt(k)
        axial[2 * j + 1, j] = math.sqrt(k)
    return np.vstack([corners, axial, np.zeros((1, k))])


def ccd_allocation(weights, n: int, remainder_index: int = -1) -> np.ndarray:
    """Per-site counts: round n * w_i everywhere except one remainder site.

    The remainder site (the centre, by convention last) absorbs whatever
    keeps the total at n.
    """
    w = np.asarray(weights, dtype=float).ravel()
    counts = np.floor(n * w + 0.5).astype(int)
    counts[remainder_index] = 0
    rest = n - int(counts.sum())
    if rest < 0:
        raise ValueError("rounded allocation exceeds n; n is too small")
    counts[remainder_index] = rest
    return counts


def _min_site_distance(sites: np.ndarray) -> float:
    d = sites[:, None, :] - sites[None, :, :]
    dist = np.sqrt(np.sum(d * d, axis=2))
    return float(np.min(dist[np.triu_indices(sites.shape[0], k=1)]))


# -- spherical beta -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SphericalBeta:
    """Density on a k-ball proportional to (1 - |x - c| / R)^(b - 1).

    The relative radius |x - c| / R is Beta(k, b) distributed and the
    direction is uniform on the sphere, which is how sampling proceeds.
    """

    center: np.ndarray
    radius: float
    shape: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        if self.radius <= 0.0 or self.shape < 1.0:
            raise ValueError("need a positive radius and shape >= 1")

    @property
    def k(self) -> int:
        return self.center.shape[0]

    @property
    def log_const(self) -> float:
        k = self.k
        return (special.gammaln(0.5 * k) - math.log(2.0) - 0.5 * k * math.log(math.pi)
                - k * math.log(self.radius) - special.betaln(k, self.shape))

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, self.k)
        rho = np.sqrt(np.sum((pts - self.center) ** 2, axis=1)) / self.radius
        inside = rho <= 1.0
        vals = np.zeros(pts.shape[0])
        vals[inside] = math.exp(self.log_const) * (1.0 - rho[inside]) ** (self.shape - 1.0)
        return vals

    def radius_cdf(self, r) -> np.ndarray:
        rho = np.clip(np.asarray(r, dtype=float) / self.radius, 0.0, 1.0)
        return special.betainc(self.k, self.shape, rho)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Polar draws, one batch per variable.

        Stream layout: relative radius first, then for each of the k - 2
        inner angles a cosine-squared batch and a sign batch, then the
        final angle. The i-th inner cosine squared is Beta(1/2, (k-i)/2):
        a uniform direction puts the fraction 1/(k - i + 1) of the
        remaining squared norm on that coordinate.
        """
        k = self.k
        rho = draw_beta(rng, k, self.shape, size)
        running = self.radius * rho
        y = np.empty((size, k))
        for i in range(1, k - 1):
            z = draw_beta(rng, 0.5, 0.5 * (k - i), size)
            cos_t = draw_signs(rng, size) * np.sqrt(z)
            y[:, i - 1] = running * cos_t
            running = running * np.sqrt(1.0 - z)
        theta = draw_uniform(rng, -math.pi, math.pi, size)
        y[:, k - 2] = running * np.cos(theta)
        y[:, k - 1] = running * np.sin(theta)
        return self.center + y

    def squared_density_factor(self) -> float:
        """Constant C with pdf^2 = C * pdf_of_shape(2b - 1)."""
        k, b = self.k, self.shape
        return math.exp(special.gammaln(0.5 * k) - math.log(2.0)
                        - 0.5 * k * math.log(math.pi) - k * math.log(self.radius)
                        + special.betaln(k, 2.0 * b - 1.0) - 2.0 * special.betaln(k, b))

    def central_moment(self, powers) -> float:
        """E of the centred monomial prod (x_j - c_j)^(e_j), exact."""
        e = tuple(int(v) for v in powers)
        if any(v % 2 for v in e):
            return 0.0
        half = [v // 2 for v in e]
        A = sum(half)
        k, b = self.k, self.shape
        val = self.radius ** (2 * A)
        for j in range(2 * A):
            val *= (k + j) / (k + b + j)  # radial Beta(k, b) raw moment of order 2A
        for r in range(A):
            val /= k + 2 * r  # spherical direction normalization
        for a in half:
            val *= math.prod(range(1, 2 * a, 2))  # (2a - 1)!!
        return val


def _shifted_sphere_moment(dist: SphericalBeta, powers) -> float:
    """E of prod x_j^(e_j) under a ball density centred away from 0."""
    e = [int(v) for v in powers]
    c = dist.center
    total = 0.0
    for m in itertools.product(*(range(v + 1) for v in e)):
        coef = 1.0
        for j, (ej, mj) in enumerate(zip(e, m)):
            coef *= math.comb(ej, mj) * c[j] ** (ej - mj)
            if coef == 0.0:
                break
        if coef != 0.0:
            total += coef * dist.central_moment(m)
    return total


# -- k = 2: Voronoi tile construction -----------------------------------------


@dataclass(frozen=True, eq=False)
class CcdTileDensity:
    """Mixture over contracted Voronoi tiles of restricted ball densities.

    Component i has weight equal to its tile's area fraction and density
    ball_i(x) / mass_i on the contracted tile, where mass_i is the ball
    density's integral over that tile.
    """

    sites: np.ndarray
    tiles: tuple[ConvexPolygon, ...]
    subtiles: tuple[ConvexPolygon, ...]
    radii: np.ndarray
    masses: np.ndarray
    weights: np.ndarray
    nu: float
    shape: float
    space: DesignSpace

    @property
    def p_sites(self) -> int:
        return self.sites.shape[0]

    def component(self, i: int) -> SphericalBeta:
        return SphericalBeta(center=self.sites[i], radius=float(self.radii[i]),
                             shape=self.shape)

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, 2)
        out = np.zeros(pts.shape[0])
        free = np.ones(pts.shape[0], dtype=bool)
        for i in range(self.p_sites):
            mask = free & self.subtiles[i].contains(pts)
            if not mask.any():
                continue
            out[mask] = (self.weights[i] / self.masses[i]
                         * self.component(i).pdf(pts[mask]))
            free &= ~mask
        return out

    def basis_moments(self, basis: RegressorBasis, order: int | None = None):
        if basis.q != 2:
            raise ValueError("this density is two dimensional")
        nodes = 24 if order is None else order
        p = basis.p
        M = np.zeros((p, p))
        K = np.zeros((p, p))
        for i in range(self.p_sites):
            pts, wts = polygon_quad_nodes(self.subtiles[i], nodes, apex=self.sites[i])
            F = basis.eval(pts)
            dens = self.component(i).pdf(pts) / self.masses[i]
            wi = self.weights[i]
            M += wi * (F * (wts * dens)[:, None]).T @ F
            K += wi**2 * (F * (wts * dens**2)[:, None]).T @ F
        return M, K

    def geometry_payload(self) -> dict:
        """Plain-type geometry summary for serialization."""
        return {
            "nu": self.nu,
            "shape": self.shape,
            "sites": self.sites.tolist(),
            "weights": self.weights.tolist(),
            "tile_areas": [t.area for t in self.tiles],
            "tiles": [t.vertices.tolist() for t in self.tiles],
            "subtiles": [t.vertices.tolist() for t in self.subtiles],
            "radii": self.radii.tolist(),
            "masses": self.masses.tolist(),
        }


def build_ccd2d(nu: float, bounds: DesignSpace | None = None,
                order: int = 32) -> CcdTileDensity:
    """Voronoi-tile clustered composite density on a 2-d box.

    The cluster volume fraction is c = nu^2: tiles contract linearly by
    nu, and the ball shape parameter is 1 / c. Each ball is the smallest
    disc centred at the site covering its contracted tile, so restricting
    it to the tile only renormalizes by the contained mass.
    """
    if not 0.0 < nu <= 1.0:
        raise ValueError("nu must lie in (0, 1]")
    space = bounds if bounds is not None else DesignSpace.hyperrectangle([(-2.0, 2.0)] * 2)
    if space.dim != 2:
        raise ValueError("the tile construction is two dimensional")
    sites = ccd_support(2)
    if not bool(np.all(space.contains(sites))):
        raise ValueError("all sites must lie inside the box")
    tiles = voronoi_tiles(sites, space)
    areas = np.array([t.area for t in tiles])
    weights = areas / areas.sum()
    c = nu**2
    shape = 1.0 / c
    subtiles = tuple(contract_polygon(t, s, nu) for t, s in zip(tiles, sites))
    radii = np.array([covering_radius(st.vertices, s)
                      for st, s in zip(subtiles, sites)])
    masses = np.array([
        polygon_radial_mass(st, s, float(r), shape, order=order)
        for st, s, r in zip(subtiles, sites, radii)
    ])
    return CcdTileDensity(sites=sites, tiles=tuple(tiles), subtiles=subtiles,
                          radii=radii, masses=masses, weights=weights,
                          nu=float(nu), shape=shape, space=space)


def _rejection_draws(component: SphericalBeta, subtile: ConvexPolygon,
                     count: int, rng: np.random.Generator) -> np.ndarray:
    """First `count` ball draws landing in the subtile, in draw order."""
    kept: list[np.ndarray] = []
    have = 0
    while have < count:
        batch = max(4 * (count - have), 16)
        x = component.sample(batch, rng)
        hit = x[subtile.contains(x)]
        kept.append(hit)
        have += hit.shape[0]
    return np.concatenate(kept)[:count]


def sample_ccd2d(density: CcdTileDensity, n: int, seed,
                 mode: str = "stratified") -> Design:
    """Draw an n-point design from the tile construction.

    stratified fixes per-site counts by rounding (centre absorbs the
    remainder); complete draws the site of every point from the weights.
    Within a site, points come from the ball density by rejection onto
    the subtile, on the site's own substream (seed..., site).
    """
    if n < 1:
        raise ValueError("n must be positive")
    if mode == "stratified":
        counts = ccd_allocation(density.weights, n)
    elif mode == "complete":
        rng = rng_from_seed(seed)
        cum = np.cumsum(density.weights)
        idx = np.minimum(np.searchsorted(cum, rng.random(n), side="right"),
                         density.p_sites - 1)
        counts = np.bincount(idx, minlength=density.p_sites)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    parts = []
    for i in range(density.p_sites):
        if counts[i] == 0:
            continue
        parts.append(_rejection_draws(density.component(i), density.subtiles[i],
                                      int(counts[i]), substream(seed, i)))
    return Design(points=np.concatenate(parts), strategy=f"ccd2d-{mode}",
                  seed=seed_key(seed))


# -- general k: disjoint ball construction -------------------------------------


@dataclass(frozen=True, eq=False)
class BallMixtureDensity:
    """Mixture of spherical beta densities on disjoint balls around sites."""

    sites: np.ndarray
    base_radius: float
    nu: float
    shape: float
    weights: np.ndarray
    space: DesignSpace

    @property
    def k(self) -> int:
        return self.sites.shape[1]

    @property
    def p_sites(self) -> int:
        return self.sites.shape[0]

    @property
    def radius(self) -> float:
        return self.base_radius * self.nu

    def component(self, i: int) -> SphericalBeta:
        return SphericalBeta(center=self.sites[i], radius=self.radius,
                             shape=self.shape)

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, self.k)
        out = np.zeros(pts.shape[0])
        for i in range(self.p_sites):
            near = np.sum((pts - self.sites[i]) ** 2, axis=1) <= self.radius**2
            if near.any():
                out[near] += self.weights[i] * self.component(i).pdf(pts[near])
        return out

    def basis_moments(self, basis: RegressorBasis, order: int | None = None):
        """Exact moment matrices from ball monomial moments."""
        if basis.q != self.k:
            raise ValueError("basis dimension does not match the sites")
        exps = basis.exponents
        p = basis.p
        M = np.zeros((p, p))
        K = np.zeros((p, p))
        sq_factor = self.component(0).squared_density_factor()
        for i in range(self.p_sites):
            comp = self.component(i)
            comp_sq = SphericalBeta(center=self.sites[i], radius=self.radius,
                                    shape=2.0 * self.shape - 1.0)
            for a in range(p):
                for bcol in range(a, p):
                    e = exps[a] + exps[bcol]
                    M[a, bcol] += self.weights[i] * _shifted_sphere_moment(comp, e)
                    K[a, bcol] += (self.weights[i] ** 2 * sq_factor
                                   * _shifted_sphere_moment(comp_sq, e))
        iu = np.triu_indices(p, k=1)
        M[iu[1], iu[0]] = M[iu]
        K[iu[1], iu[0]] = K[iu]
        return M, K

    def geometry_payload(self) -> dict:
        return {
            "k": self.k,
            "nu": self.nu,
            "shape": self.shape,
            "base_radius": self.base_radius,
            "radius": self.radius,
            "sites": self.sites.tolist(),
            "weights": self.weights.tolist(),
            "bounds": [list(b) for b in zip(self.space.lower, self.space.upper)],
        }


def build_ccdk(k: int, nu: float, bounds: DesignSpace | None = None,
               weights=None) -> BallMixtureDensity:
    """Disjoint-ball clustered composite density in k dimensions.

    The base radius is r0 = min(1, sqrt(k)/2) and each site's ball has
    radius r0 * nu with shape parameter nu^(-k). Disjointness of the
    balls is required, which caps nu below one for some k. The default
    box extends the peripheral sites by r0 on every side so all balls
    fit for every nu.
    """
    if k < 2:
        raise ValueError("the composite layout needs k >= 2 factors")
    if not 0.0 < nu <= 1.0:
        raise ValueError("nu must lie in (0, 1]")
    sites = ccd_support(k)
    r0 = min(1.0, 0.5 * math.sqrt(k))
    radius = r0 * nu
    gap = _min_site_distance(sites)
    if 2.0 * radius > gap + 1e-12:
        raise ValueError(
            f"balls of radius {radius:.4f} overlap: site gap {gap:.4f} "
            f"caps nu at {gap / (2.0 * r0):.4f}"
        )
    if bounds is None:
        half = math.sqrt(k) + r0
        bounds = DesignSpace.hyperrectangle([(-half, half)] * k)
    lo, hi = np.asarray(bounds.lower), np.asarray(bounds.upper)
    if np.any(sites - radius < lo - 1e-12) or np.any(sites + radius > hi + 1e-12):
        raise ValueError("the box must contain every ball")
    p = sites.shape[0]
    if weights is None:
        w = np.full(p, 1.0 / p)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.size != p or np.any(w <= 0.0) or abs(w.sum() - 1.0) > 1e-8:
            raise ValueError("weights must be positive, one per site, summing to one")
        w = w / w.sum()
    return BallMixtureDensity(sites=sites, base_radius=r0, nu=float(nu),
                              shape=nu ** (-k), weights=w, space=bounds)


def sample_ccdk(density: BallMixtureDensity, n: int, seed,
                mode: str = "stratified", counts=None) -> Design:
    """Draw an n-point design from the ball construction.

    Site counts follow the same allocation rule as the 2-d build; the
    draws within a site come straight from its spherical beta on the
    substream (seed..., site), with no rejection step. Explicit per-site
    counts override both n and mode.
    """
    if counts is not None:
        counts = np.asarray(counts, dtype=int)
        if counts.shape != (density.p_sites,):
            raise ValueError(f"counts must list one draw count per site "
                             f"({density.p_sites} sites)")
        if np.any(counts < 0) or counts.sum() < 1:
            raise ValueError("counts must be nonnegative with a positive total")
        mode = "stratified"
    elif n < 1:
        raise ValueError("n must be positive")
    elif mode == "stratified":
        counts = ccd_allocation(density.weights, n)
    elif mode == "complete":
        rng = rng_from_seed(seed)
        cum = np.cumsum(density.weights)
        idx = np.minimum(np.searchsorted(cum, rng.random(n), side="right"),
                         density.p_sites - 1)
        counts = np.bincount(idx, minlength=density.p_sites)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    parts = []
    for i in range(density.p_sites):
        if counts[i] == 0:
            continue
        parts.append(density.component(i).sample(int(counts[i]), substream(seed, i)))
    return Design(points=np.concatenate(parts), strategy=f"ccdk-{mode}",
                  seed=seed_key(seed))
