"""Replicated design experiments for the shipped sampling strategies.

A strategy names a sampling density and a way of drawing n-point designs
from it. The harness builds both, draws replicate designs on per-rep
substreams, evaluates each design's loss against the strategy's own
density, and summarizes the replicate values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ccd import build_ccd2d, build_ccdk, ccd_allocation, sample_ccd2d, sample_ccdk
from .cluster1d import cluster_density, largest_remainder_counts, sample_cluster
from .jitter import (
    HuberDensity,
    alpha_from_nu,
    cardano_quantiles,
    jitter_density,
    minimax_loss,
    sample_jitter,
    slr_closed_losses,
)
from .loss import ExpectedLossEstimate, LossContext, LossReport, estimate_expected_loss
from .model import Design, NumericalFailure, RegressorBasis
from .rng import rng_from_seed, seed_key

STRATEGIES = (
    "jitter-complete",
    "jitter-stratified",
    "sample-from-m",
    "cluster1d",
    "ccd2d",
    "ccdk",
)

_GAMMA_GUARD_TOL = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one replicated experiment."""

    strategy: str
    nu: float
    n: int
    reps: int = 1000
    seed: int | tuple = 0
    c: float | None = None  # defaults to nu^k for the strategy's k
    mode: str | None = None  # complete | stratified where the family has both
    degree: int = 1  # cluster1d only
    k: int = 3  # ccdk only
    sigma2: float = 1.0  # reporting scale only; losses are relative
    tau: float = 1.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 < self.nu < 1.0:
            raise ValueError("nu must lie in (0, 1)")
        if self.n < 1 or self.reps < 1:
            raise ValueError("n and reps must be positive")

    @property
    def family_dim(self) -> int:
        if self.strategy == "ccd2d":
            return 2
        if self.strategy == "ccdk":
            return self.k
        return 1

    @property
    def resolved_c(self) -> float | None:
        """The cluster fraction: given c, or the nu^k rule of the family."""
        if self.strategy == "sample-from-m":
            return None
        if self.c is not None:
            return self.c
        return self.nu**self.family_dim


@dataclass(frozen=True, eq=False)
class StrategyParts:
    """A built strategy: model basis, sampling density, design sampler."""

    basis: RegressorBasis
    density: object
    sampler: object  # callable, seed key tuple -> Design
    mode: str | None
    c: float | None
    references: dict
    counts: np.ndarray | None


def _check_fixed_c(config: ExperimentConfig) -> float:
    c = config.nu**config.family_dim
    if config.c is not None and abs(config.c - c) > 1e-12:
        raise ValueError(
            f"{config.strategy} fixes c = nu^{config.family_dim} = {c:.6g}; "
            "only the jitter family treats c as free"
        )
    return c


def build_strategy(config: ExperimentConfig) -> StrategyParts:
    nu, n = config.nu, config.n

    if config.strategy in ("jitter-complete", "jitter-stratified"):
        mode = config.strategy.split("-", 1)[1]
        if config.mode is not None and config.mode != mode:
            raise ValueError("mode is fixed by the jitter strategy name")
        c = config.resolved_c
        alpha = alpha_from_nu(nu)
        quantiles = cardano_quantiles(n, alpha)
        density = jitter_density(quantiles, c)
        closed = slr_closed_losses(nu, c, alpha=alpha, quantiles=quantiles)
        refs = {
            "alpha": alpha,
            "max_loss_slr": closed.minimax,
            "max_loss_density": closed.jittered,
            "lambda2": closed.second_moment,
            "gamma0": closed.bias_constant,
        }
        sampler = lambda key: sample_jitter(density, mode, n, key)  # noqa: E731
        return StrategyParts(RegressorBasis.polynomial(1), density, sampler,
                             mode, c, refs, None)

    if config.strategy == "sample-from-m":
        density = HuberDensity.from_nu(nu)
        refs = {"alpha": density.alpha,
                "max_loss_slr": minimax_loss(nu, density.alpha)}

        def sampler(key):
            pts = density.sample(n, rng_from_seed(key))
            return Design(points=pts, strategy="sample-from-m", seed=seed_key(key))

        return StrategyParts(RegressorBasis.polynomial(1), density, sampler,
                             None, None, refs, None)

    if config.strategy == "cluster1d":
        c = config.resolved_c
        density = cluster_density(degree=config.degree, c=c)
        mode = config.mode or "stratified"
        counts = None
        if mode == "stratified":
            if n < density.p:
                raise ValueError("stratified sampling needs n >= the support size")
            counts = largest_remainder_counts(density.weights, n)
        sampler = lambda key: sample_cluster(density, mode, n, key)  # noqa: E731
        return StrategyParts(RegressorBasis.polynomial(config.degree), density,
                             sampler, mode, c, {}, counts)

    if config.strategy == "ccd2d":
        c = _check_fixed_c(config)
        density = build_ccd2d(nu)
        mode = config.mode or "stratified"
        counts = ccd_allocation(density.weights, n) if mode == "stratified" else None
        sampler = lambda key: sample_ccd2d(density, n, key, mode)  # noqa: E731
        return StrategyParts(RegressorBasis.full_second_order(2), density,
                             sampler, mode, c, {}, counts)

    if config.strategy == "ccdk":
        if config.k < 3:
            raise ValueError("the ccdk strategy needs k >= 3; use ccd2d for k = 2")
        c = _check_fixed_c(config)
        density = build_ccdk(config.k, nu)
        mode = config.mode or "stratified"
        counts = ccd_allocation(density.weights, n) if mode == "stratified" else None
        sampler = lambda key: sample_ccdk(density, n, key, mode)  # noqa: E731
        return StrategyParts(RegressorBasis.full_second_order(config.k), density,
                             sampler, mode, c, {}, counts)

    raise ValueError(f"unknown strategy {config.strategy!r}")  # pragma: no cover


@dataclass(frozen=True, eq=False)
class ExperimentSummary:
    """Replicate statistics over the finite loss values."""

    nu: float
    reps: int
    finite_count: int
    singular_count: int
    mean: float
    sd: float
    minimum: float
    maximum: float
    bin_edges: np.ndarray
    bin_counts: np.ndarray
    reference: float | None

    def as_dict(self) -> dict:
        return {
            "nu": self.nu,
            "reps": self.reps,
            "finite_count": self.finite_count,
            "singular_count": self.singular_count,
            "mean": self.mean,
            "sd": self.sd,
            "min": self.minimum,
            "max": self.maximum,
            "histogram": {
                "edges": self.bin_edges.tolist(),
                "counts": self.bin_counts.tolist(),
            },
            "reference_max_loss": self.reference,
        }


def summarize(estimate: ExpectedLossEstimate, reference: float | None = None,
              bins: int = 30) -> ExperimentSummary:
    finite = estimate.values[np.isfinite(estimate.values)]
    if finite.size == 0:
        raise NumericalFailure("every replicate produced a singular design")
    counts, edges = np.histogram(finite, bins=bins)
    sd = float(np.std(finite, ddof=1)) if finite.size > 1 else 0.0
    return ExperimentSummary(
        nu=estimate.nu,
        reps=estimate.reps,
        finite_count=int(finite.size),
        singular_count=estimate.singular_count,
        mean=float(np.mean(finite)),
        sd=sd,
        minimum=float(finite.min()),
        maximum=float(finite.max()),
        bin_edges=edges,
        bin_counts=counts,
        reference=reference,
    )


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """One replicated experiment: inputs, per-rep values, and summary."""

    config: ExperimentConfig
    parts: StrategyParts
    estimate: ExpectedLossEstimate
    density_loss: LossReport
    summary: ExperimentSummary


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Build the strategy, draw all replicates, and summarize their losses.

    For jitter strategies the per-replicate bias terms are checked
    against the constant gamma0 of the density: any drift past 1e-8
    means the moment algebra is broken, so it raises instead of
    averaging bad values.
    """
    parts = build_strategy(config)
    context = LossContext(parts.basis, parts.density)
    estimate = estimate_expected_loss(parts.basis, parts.density, parts.sampler,
                                      config.nu, config.reps, config.seed,
                                      context=context)
    if config.strategy.startswith("jitter"):
        gamma0 = parts.references["gamma0"]
        finite = estimate.gamma_terms[np.isfinite(estimate.gamma_terms)]
        drift = float(np.max(np.abs(finite - gamma0))) if finite.size else 0.0
        if drift > _GAMMA_GUARD_TOL * max(1.0, abs(gamma0)):
            raise NumericalFailure(
                f"jittered bias terms drifted {drift:.3e} from the constant {gamma0:.6g}"
            )
    density_loss = context.max_loss(config.nu)
    reference = density_loss.combined if math.isfinite(density_loss.combined) else None
    summary = summarize(estimate, reference=reference)
    return ExperimentResult(config=config, parts=parts, estimate=estimate,
                            density_loss=density_loss, summary=summary)
