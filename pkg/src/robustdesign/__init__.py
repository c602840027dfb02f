"""Random experimental designs that stay efficient under model contamination.

The package builds sampling densities whose random designs control both
the variance of a least squares fit and its worst-case bias over a
contamination neighbourhood: jittered quantile designs for straight-line
fits, clustered designs for low-degree polynomial fits, and composite
designs (tile or ball based) for full second-order fits in k dimensions.
"""

from .ccd import (
    BallMixtureDensity,
    CcdTileDensity,
    SphericalBeta,
    build_ccd2d,
    build_ccdk,
    ccd_allocation,
    ccd_support,
    sample_ccd2d,
    sample_ccdk,
)
from .cluster1d import (
    ClusterDensity1D,
    beta_mode_params,
    build_partition,
    cluster_density,
    ioptimal_support,
    largest_remainder_counts,
    sample_cluster,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    ExperimentSummary,
    STRATEGIES,
    build_strategy,
    run_experiment,
    summarize,
)
from .jitter import (
    HuberDensity,
    JitterDensity,
    SlrClosedLosses,
    alpha_from_nu,
    cardano_quantiles,
    huber_density,
    jitter_contaminant,
    jitter_density,
    jitter_moments,
    minimax_loss,
    nu_from_alpha,
    sample_jitter,
    slr_closed_losses,
)
from .loss import (
    Contaminant,
    ExpectedLossEstimate,
    LossContext,
    LossReport,
    design_bias_term,
    design_loss,
    estimate_expected_loss,
    integrated_mse,
    least_favourable_contaminant,
    worst_case_loss,
)
from .model import (
    Design,
    DesignSpace,
    MomentSet,
    NumericalFailure,
    RegressorBasis,
    UniformDensity,
    density_moments,
    design_moments,
)
from .rng import rng_from_seed, seed_key, substream
from .voronoi import (
    ConvexPolygon,
    box_polygon,
    clip_halfplane,
    contract_polygon,
    covering_radius,
    min_enclosing_circle,
    polygon_integral,
    polygon_quad_nodes,
    polygon_radial_mass,
    voronoi_tiles,
)

__version__ = "0.1.0"

__all__ = [
    "BallMixtureDensity",
    "CcdTileDensity",
    "ClusterDensity1D",
    "Contaminant",
    "ConvexPolygon",
    "Design",
    "DesignSpace",
    "ExpectedLossEstimate",
    "ExperimentConfig",
    "ExperimentResult",
    "ExperimentSummary",
    "HuberDensity",
    "JitterDensity",
    "LossContext",
    "LossReport",
    "MomentSet",
    "NumericalFailure",
    "RegressorBasis",
    "STRATEGIES",
    "SlrClosedLosses",
    "SphericalBeta",
    "UniformDensity",
    "alpha_from_nu",
    "beta_mode_params",
    "box_polygon",
    "build_ccd2d",
    "build_ccdk",
    "build_partition",
    "build_strategy",
    "cardano_quantiles",
    "ccd_allocation",
    "ccd_support",
    "clip_halfplane",
    "cluster_density",
    "contract_polygon",
    "covering_radius",
    "density_moments",
    "design_bias_term",
    "design_loss",
    "design_moments",
    "estimate_expected_loss",
    "huber_density",
    "integrated_mse",
    "ioptimal_support",
    "jitter_contaminant",
    "jitter_density",
    "jitter_moments",
    "largest_remainder_counts",
    "least_favourable_contaminant",
    "min_enclosing_circle",
    "minimax_loss",
    "nu_from_alpha",
    "polygon_integral",
    "polygon_quad_nodes",
    "polygon_radial_mass",
    "rng_from_seed",
    "run_experiment",
    "sample_ccd2d",
    "sample_ccdk",
    "sample_cluster",
    "sample_jitter",
    "seed_key",
    "slr_closed_losses",
    "substream",
    "summarize",
    "voronoi_tiles",
    "worst_case_loss",
]
