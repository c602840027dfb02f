"""Worst-case and per-design losses for contaminated regression models.

The response is modeled as f'(x) theta + psi(x) + noise, with the
contaminant psi orthogonal to the regressors and bounded in L2. For a
sampling density phi the worst case over contaminants of the scaled
integrated MSE splits into

    (1 - nu) tr(A M^-1)  +  nu ch_max(K H^-1),

a variance term and a bias term weighted by nu in [0, 1]. A realized
n-point design delta drawn from phi has loss

    (1 - nu) tr(A M_delta^-1) + nu gamma_delta,

whose expectation over designs is estimated by Monte Carlo. Both the
extremal bias direction and the least favourable contaminant come from
the eigen-structure of G = K - H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Design,
    MomentSet,
    NumericalFailure,
    RegressorBasis,
    COND_LIMIT,
    as_points,
    density_moments,
    max_eigpair,
)
from .rng import seed_key

_EIG_CUT = 1e-12
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class LossReport:
    """A loss value split into its variance and bias terms.

    ``combined`` is exactly (1 - nu) * variance_term + nu * bias_term.
    The scale is relative: multiply by (sigma^2 + tau^2) / n for the
    absolute expected integrated squared error.
    """

    nu: float
    variance_term: float
    bias_term: float
    combined: float
    beta: np.ndarray | None = None
    notes: tuple[str, ...] = ()

    @property
    def infinite(self) -> bool:
        return not math.isfinite(self.combined)


@dataclass(frozen=True, eq=False)
class Contaminant:
    """The least favourable model contaminant of a sampling density.

    Evaluates psi(x) = (tau / sqrt(n)) (phi(x) f'(x) w - f'(x) u) where w
    and u are fixed vectors derived from the density's moment matrices.
    A degenerate flag marks densities with no bias capacity (G = 0), for
    which psi is identically zero.
    """

    tau: float
    n: int
    basis: RegressorBasis
    density: object
    degenerate: bool
    weight: np.ndarray
    proj: np.ndarray
    norm_sq: float  # integral of psi^2 over the design space

    def __call__(self, x) -> np.ndarray:
        pts = as_points(x, self.basis.q)
        if self.degenerate:
            return np.zeros(pts.shape[0])
        F = self.basis.eval(pts)
        phi = np.asarray(self.density.pdf(pts), dtype=float)
        scale = self.tau / math.sqrt(self.n)
        return scale * (phi * (F @ self.weight) - F @ self.proj)

    def l2_norm_sq(self) -> float:
        return self.norm_sq


def _spd_solve(S: np.ndarray, B: np.ndarray) -> np.ndarray | None:
    """Solve S X = B for symmetric positive definite S, or report failure."""
    w = np.linalg.eigvalsh(S)
    if w[0] <= 0.0 or w[-1] / w[0] > COND_LIMIT:
        return None
    return np.linalg.solve(S, B)


class LossContext:
    """Precomputed loss machinery for one (basis, density) pair.

    Builds the moment matrices once, extracts the extremal bias direction
    from the symmetrized form G^(1/2) H^-1 G^(1/2) + I, and then evaluates
    worst-case losses, per-design losses, and contaminants cheaply.
    """

    def __init__(self, basis: RegressorBasis, density, moments: MomentSet | None = None,
                 order: int | None = None):
        self.basis = basis
        self.density = density
        self.moments = moments if moments is not None else density_moments(basis, density, order=order)
        m = self.moments
        self.A_inv = np.linalg.inv(m.A)
        self.notes: tuple[str, ...] = ()

        gw, gv = np.linalg.eigh(m.G)
        cut = _EIG_CUT * max(float(gw[-1]), 0.0)
        pos = gw > max(cut, 0.0)
        self.degenerate = not bool(pos.any())

        self.M_inv = _spd_solve(m.M, np.eye(basis.p))
        self.density_singular = self.M_inv is None
        if self.density_singular:
            self.notes += ("singular-density-moments",)
            self.bias_value = math.inf
            self.beta = None
            self.weight = np.zeros(basis.p)
        elif self.degenerate:
            self.notes += ("zero-bias-density",)
            self.bias_value, self.beta = max_eigpair(np.eye(basis.p))
            self.weight = np.zeros(basis.p)
        else:
            ghalf = (gv[:, pos] * np.sqrt(gw[pos])) @ gv[:, pos].T
            g_isqrt = (gv[:, pos] / np.sqrt(gw[pos])) @ gv[:, pos].T
            H_inv = _spd_solve(m.H, np.eye(basis.p))
            if H_inv is None:
                raise NumericalFailure("H = M A^-1 M is numerically singular")
            S = ghalf @ H_inv @ ghalf + np.eye(basis.p)
            S = 0.5 * (S + S.T)
            self.bias_value, self.beta = max_eigpair(S)
            ev = np.linalg.eigvalsh(S)
            if ev.shape[0] > 1 and ev[-1] - ev[-2] <= _TIE_TOL * max(1.0, ev[-1]):
                self.notes += ("tied-bias-direction",)
            self.weight = g_isqrt @ self.beta
        self.proj = self.A_inv @ (m.M @ self.weight)

    # -- worst case over contaminants ------------------------------------

    def max_loss(self, nu: float) -> LossReport:
        if not 0.0 <= nu <= 1.0:
            raise ValueError("nu must lie in [0, 1]")
        if self.density_singular:
            return LossReport(nu, math.inf, math.inf, math.inf, None, self.notes)
        var = float(np.sum(self.moments.A * self.M_inv))
        combined = (1.0 - nu) * var + nu * self.bias_value
        return LossReport(nu, var, float(self.bias_value), combined, self.beta, self.notes)

    def contaminant(self, tau: float, n: int) -> Contaminant:
        if self.density_singular:
            raise NumericalFailure("density moment matrix is singular")
        m = self.moments
        w, u = self.weight, self.proj
        norm_sq = (tau**2 / n) * float(w @ m.K @ w - 2.0 * u @ m.M @ w + u @ m.A @ u)
        return Contaminant(
            tau=tau, n=int(n), basis=self.basis, density=self.density,
            degenerate=self.degenerate, weight=w, proj=u,
            norm_sq=0.0 if self.degenerate else norm_sq,
        )

    # -- realized designs --------------------------------------------------

    def _design_matrices(self, design: Design):
        pts = design.points
        ok = self.density.space.contains(pts)
        if not bool(np.all(ok)):
            i = int(np.flatnonzero(~ok)[0])
            raise ValueError(f"design point {pts[i]} lies outside the design space")
        F = self.basis.eval(pts)
        M_delta = F.T @ F / design.n
        return F, 0.5 * (M_delta + M_delta.T)

    def design_bias_term(self, design: Design) -> float:
        """The bias term gamma of a realized design (quadratic form plus one)."""
        F, M_delta = self._design_matrices(design)
        if self.density_singular:
            return math.inf
        phi = np.asarray(self.density.pdf(design.points), dtype=float)
        M_phi = (F * phi[:, None]).T @ F / design.n
        rhs = _spd_solve(M_delta, M_phi @ self.weight)
        if rhs is None:
            return math.inf
        v = rhs - self.proj
        return float(v @ self.moments.A @ v) + 1.0

    def design_loss(self, design: Design, nu: float) -> LossReport:
        if not 0.0 <= nu <= 1.0:
            raise ValueError("nu must lie in [0, 1]")
        _, M_delta = self._design_matrices(design)
        Md_inv = _spd_solve(M_delta, np.eye(self.basis.p))
        if Md_inv is None or self.density_singular:
            notes = self.notes + ("singular-design-moments",)
            return LossReport(nu, math.inf, math.inf, math.inf, self.beta, notes)
        var = float(np.sum(self.moments.A * Md_inv))
        gamma = self.design_bias_term(design)
        combined = (1.0 - nu) * var + nu * gamma
        return LossReport(nu, var, gamma, combined, self.beta, self.notes)

    def integrated_mse(self, design: Design, psi, sigma2: float = 1.0) -> float:
        """Integrated MSE of the least squares fit under contaminant psi.

        psi may be any callable on the design space; its squared norm is
        taken from ``l2_norm_sq`` when available and by quadrature against
        the density moments otherwise.
        """
        F, M_delta = self._design_matrices(design)
        Md_inv = _spd_solve(M_delta, np.eye(self.basis.p))
        if Md_inv is None:
            return math.inf
        n = design.n
        vals = np.asarray(psi(design.points), dtype=float)
        b = F.T @ vals / n
        z = Md_inv @ b
        var = sigma2 / n * float(np.sum(self.moments.A * Md_inv))
        return var + float(z @ self.moments.A @ z) + float(psi.l2_norm_sq())


# -- public wrappers -------------------------------------------------------


def worst_case_loss(basis: RegressorBasis, density, nu: float,
                    context: LossContext | None = None) -> LossReport:
    ctx = context if context is not None else LossContext(basis, density)
    return ctx.max_loss(nu)


def least_favourable_contaminant(basis: RegressorBasis, density, tau: float, n: int,
                                 context: LossContext | None = None) -> Contaminant:
    ctx = context if context is not None else LossContext(basis, density)
    return ctx.contaminant(tau, n)


def design_bias_term(basis: RegressorBasis, design: Design, density,
                     context: LossContext | None = None) -> float:
    ctx = context if context is not None else LossContext(basis, density)
    return ctx.design_bias_term(design)


def design_loss(basis: RegressorBasis, design: Design, density, nu: float,
                context: LossContext | None = None) -> LossReport:
    ctx = context if context is not None else LossContext(basis, density)
    return ctx.design_loss(design, nu)


def integrated_mse(basis: RegressorBasis, design: Design, psi, sigma2: float = 1.0,
                   density=None, context: LossContext | None = None) -> float:
    ctx = context if context is not None else LossContext(basis, density if density is not None else psi.density)
    return ctx.integrated_mse(design, psi, sigma2)


@dataclass(frozen=True, eq=False)
class ExpectedLossEstimate:
    """Monte Carlo sample of per-design losses for one sampling strategy."""

    nu: float
    seed: tuple[int, ...]
    values: np.ndarray
    variance_terms: np.ndarray
    gamma_terms: np.ndarray
    singular_count: int

    @property
    def reps(self) -> int:
        return self.values.shape[0]

    @property
    def mean(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        if finite.size == 0:
            raise NumericalFailure("every replicate produced a singular design")
        return float(np.mean(finite))

    @property
    def sd(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        if finite.size < 2:
            return 0.0
        return float(np.std(finite, ddof=1))


def estimate_expected_loss(basis: RegressorBasis, density, sampler, nu: float,
                           reps: int, seed,
                           context: LossContext | None = None) -> ExpectedLossEstimate:
    """Average per-design loss over replicate designs drawn by ``sampler``.

    ``sampler`` receives the substream key (seed..., rep) and must return
    a Design; replicates are therefore reproducible independently of
    evaluation order. Singular replicates are kept as inf values and
    excluded from the mean.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    ctx = context if context is not None else LossContext(basis, density)
    key = seed_key(seed)
    values = np.empty(reps)
    variances = np.empty(reps)
    gammas = np.empty(reps)
    singular = 0
    for r in range(reps):
        design = sampler(key + (r,))
        report = ctx.design_loss(design, nu)
        values[r] = report.combined
        variances[r] = report.variance_term
        gammas[r] = report.bias_term
        if report.infinite:
            singular += 1
    return ExpectedLossEstimate(
        nu=nu, seed=key, values=values, variance_terms=variances,
        gamma_terms=gammas, singular_count=singular,
    )
