"""Design spaces, regression bases, designs, and moment matrices.

Every loss computation in this package consumes a handful of p x p
symmetric matrices built from a regressor vector f over a design space
chi with reference measure mu (Lebesgue on boxes, counting on grids):

    A = integral of f f' dmu,
    M = integral of f f' dPhi       for a sampling density phi,
    K = integral of f f' phi^2 dmu,
    H = M A^-1 M,
    G = K - H   (positive semidefinite).

Sampling densities are duck typed rather than subclassed. A density
object carries a ``space`` attribute (a DesignSpace) and provides

    pdf(x)                          vectorized density values,
    sample(size, rng)               iid draws as an (size, q) array,
    basis_moments(basis, order)     the pair (M, K).

The quadrature backing ``basis_moments`` lives with each density family
so that piecewise-polynomial families stay exact; assembly, symmetry and
positivity checks, and the symmetric eigen-solves live here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import box_monomial_moments

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
COND_LIMIT = 1e12


class NumericalFailure(RuntimeError):
    """A computation could not proceed for numerical reasons."""


def as_points(x, q: int) -> np.ndarray:
    """Normalize sample locations to an (m, q) float array."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        if q != 1:
            raise ValueError(f"scalar point given for a {q}-dimensional space")
        return pts.reshape(1, 1)
    if pts.ndim == 1:
        if q == 1:
            return pts.reshape(-1, 1)
        if pts.shape[0] == q:
            return pts.reshape(1, q)
        raise ValueError(f"expected points with {q} coordinates, got shape {pts.shape}")
    if pts.ndim == 2 and pts.shape[1] == q:
        return pts
    raise ValueError(f"expected points with {q} coordinates, got shape {pts.shape}")


@dataclass(frozen=True)
class DesignSpace:
    """A box (or finite grid) of admissible design points.

    ``lower`` and ``upper`` are per-coordinate bounds. When ``grid`` is
    set the space is that finite point set and the reference measure is
    counting measure; otherwise it is Lebesgue measure on the box.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    grid: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower and upper bounds must have equal, positive length")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise ValueError(f"empty coordinate range [{lo}, {hi}]")

    @classmethod
    def interval(cls, lo: float = -1.0, hi: float = 1.0) -> "DesignSpace":
        return cls((float(lo),), (float(hi),))

    @classmethod
    def hyperrectangle(cls, bounds) -> "DesignSpace":
        lows, highs = zip(*((float(lo), float(hi)) for lo, hi in bounds))
        return cls(lows, highs)

    @classmethod
    def finite_grid(cls, points) -> "DesignSpace":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 2:
            raise ValueError("a finite grid needs at least two points")
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        if np.any(lo >= hi):
            raise ValueError("grid points are degenerate along some coordinate")
        return cls(tuple(lo), tuple(hi), tuple(map(tuple, pts)))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def measure(self) -> str:
        return "counting" if self.grid is not None else "lebesgue"

    @property
    def volume(self) -> float:
        return float(np.prod(np.asarray(self.upper) - np.asarray(self.lower)))

    def grid_points(self) -> np.ndarray:
        if self.grid is None:
            raise ValueError("space has no finite grid")
        return np.asarray(self.grid, dtype=float)

    def contains(self, x, tol: float = 1e-9) -> np.ndarray:
        pts = as_points(x, self.dim)
        if self.grid is not None:
            gaps = np.abs(pts[:, None, :] - self.grid_points()[None, :, :])
            return gaps.max(axis=2).min(axis=1) <= tol
        lo = np.asarray(self.lower) - tol
        hi = np.asarray(self.upper) + tol
        return np.all((pts >= lo) & (pts <= hi), axis=1)


@dataclass(frozen=True, eq=False)
class RegressorBasis:
    """Monomial regressor vector f(x) with the constant term first."""

    kind: str
    order: int
    exponents: np.ndarray  # (p, q) nonnegative integers, one row per regressor

    @classmethod
    def polynomial(cls, degree: int) -> "RegressorBasis":
        """1, x, ..., x**degree on a one-dimensional space."""
        if degree < 1:
            raise ValueError("degree must be at least 1")
        return cls("polynomial", degree, np.arange(degree + 1, dtype=np.int64).reshape(-1, 1))

    @classmethod
    def full_second_order(cls, k: int) -> "RegressorBasis":
        """1, all linear terms, all pure quadratics, all pairwise interactions."""
        if k < 1:
            raise ValueError("dimension must be at least 1")
        eye = np.eye(k, dtype=np.int64)
        rows = [np.zeros(k, dtype=np.int64)]
        rows.extend(eye[i] for i in range(k))
        rows.extend(2 * eye[i] for i in range(k))
        rows.extend(eye[i] + eye[j] for i in range(k) for j in range(i + 1, k))
        return cls("full-second-order", k, np.asarray(rows))

    @property
    def p(self) -> int:
        return self.exponents.shape[0]

    @property
    def q(self) -> int:
        return self.exponents.shape[1]

    def eval(self, x) -> np.ndarray:
        """Regressor matrix with one row per point, one column per term."""
        pts = as_points(x, self.q)
        return np.prod(pts[:, None, :] ** self.exponents[None, :, :], axis=2)


@dataclass(frozen=True, eq=False)
class Design:
    """A realized n-point design together with its provenance tags."""

    points: np.ndarray
    strategy: str = "custom"
    seed: tuple[int, ...] | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("a design needs an (n, q) array with n >= 1")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class MomentSet:
    """The matrices A, M, K, H = M A^-1 M and G = K - H for one density."""

    A: np.ndarray
    M: np.ndarray
    K: np.ndarray
    H: np.ndarray
    G: np.ndarray
    source: str = "density"


def _symmetrized(S: np.ndarray, name: str) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    scale = max(1.0, float(np.abs(S).max()))
    gap = float(np.abs(S - S.T).max())
    if gap > SYMMETRY_TOL * scale:
        raise NumericalFailure(f"{name} is not symmetric (max asymmetry {gap:.3e})")
    return 0.5 * (S + S.T)


def moment_matrix_A(basis: RegressorBasis, space: DesignSpace) -> np.ndarray:
    """Reference moment matrix: Lebesgue integrals on boxes, sums on grids."""
    if basis.q != space.dim:
        raise ValueError("basis and space dimensions differ")
    if space.measure == "counting":
        pts = space.grid_points()
        if np.unique(pts, axis=0).shape[0] < basis.p:
            raise ValueError(
                f"finite grid has fewer than p = {basis.p} distinct points"
            )
        F = basis.eval(pts)
        A = F.T @ F
    else:
        powers = basis.exponents[:, None, :] + basis.exponents[None, :, :]
        A = box_monomial_moments(space.lower, space.upper, powers)
    A = 0.5 * (A + A.T)
    w, V = np.linalg.eigh(A)
    if w[0] <= w[-1] / COND_LIMIT:
        bad = [np.round(V[:, i], 6).tolist() for i in np.flatnonzero(w <= w[-1] / COND_LIMIT)]
        raise ValueError(
            "reference moment matrix is singular; unidentified regressor "
            f"directions (coefficient vectors): {bad}"
        )
    return A


def design_moments(basis: RegressorBasis, design: Design, density=None):
    """Empirical moment matrix of a design, optionally with density weights.

    Returns M_delta = mean of f f' over the design points, and when a
    density is supplied also M_phi = mean of f f' weighted by phi(x_i).
    """
    F = basis.eval(design.points)
    M_delta = F.T @ F / design.n
    M_delta = 0.5 * (M_delta + M_delta.T)
    if density is None:
        return M_delta
    w = np.asarray(density.pdf(design.points), dtype=float)
    M_phi = (F * w[:, None]).T @ F / design.n
    return M_delta, 0.5 * (M_phi + M_phi.T)


def density_moments(basis: RegressorBasis, density, order: int | None = None,
                    source: str = "density") -> MomentSet:
    """Assemble and validate the moment matrices of a sampling density."""
    M, K = density.basis_moments(basis, order=order)
    M = _symmetrized(M, "M")
    K = _symmetrized(K, "K")
    A = moment_matrix_A(basis, density.space)
    H = M @ np.linalg.solve(A, M)
    H = 0.5 * (H + H.T)
    G = 0.5 * ((K - H) + (K - H).T)
    ev_min = float(np.linalg.eigvalsh(G)[0])
    # The PSD floor is scaled by K and H, not by G itself: for densities
    # with no bias capacity G is a difference of equal matrices and its
    # own norm is pure roundoff.
    floor = PSD_TOL * max(float(np.linalg.norm(K, 2)), float(np.linalg.norm(H, 2)), 1.0)
    if ev_min < -floor:
        raise NumericalFailure(
            f"K - H has eigenvalue {ev_min:.3e} below the positivity floor"
        )
    return MomentSet(A=A, M=M, K=K, H=H, G=G, source=source)


def max_eigpair(S: np.ndarray, tol: float = SYMMETRY_TOL) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and unit eigenvector of a symmetric matrix.

    The eigenvector sign is fixed so its first nonzero component is
    positive; on ties the lowest eigen-index wins.
    """
    S = np.asarray(S, dtype=float)
    scale = max(1.0, float(np.abs(S).max()))
    if float(np.abs(S - S.T).max()) > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    i = int(np.argmax(w))
    v = V[:, i].copy()
    nz = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())
    if v[nz[0]] < 0:
        v = -v
    return float(w[i]), v


@dataclass(frozen=True, eq=False)
class UniformDensity:
    """The uniform sampling density on a box."""

    space: DesignSpace

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, self.space.dim)
        return np.where(self.space.contains(pts), 1.0 / self.space.volume, 0.0)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        lo = np.asarray(self.space.lower)
        hi = np.asarray(self.space.upper)
        return lo + (hi - lo) * rng.random((size, self.space.dim))

    def basis_moments(self, basis: RegressorBasis, order: int | None = None):
        A = moment_matrix_A(basis, self.space)
        v = self.space.volume
        return A / v, A / v**2
