"""Command line front end.

Subcommands build a sampling density, draw a design from it, and report
the design's loss; ``loss`` re-evaluates a stored design and ``simulate``
runs replicated experiments. Exit codes: 0 on success, 2 for invalid
arguments or violated preconditions, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ccd import build_ccd2d, build_ccdk, ccd_allocation, sample_ccd2d, sample_ccdk
from .cluster1d import cluster_density, largest_remainder_counts, sample_cluster
from .harness import ExperimentConfig, run_experiment
from .jitter import (
    HuberDensity,
    alpha_from_nu,
    cardano_quantiles,
    jitter_density,
    minimax_loss,
    sample_jitter,
    slr_closed_losses,
)
from .loss import LossContext
from .model import Design, NumericalFailure, RegressorBasis
from .outputs import (
    design_json_payload,
    jsonable,
    loss_payload,
    summary_payload,
    write_design_csv,
    write_json,
    write_replicates_csv,
    read_design_points,
)

_MODES = ("complete", "stratified")
_STRATEGIES = ("jitter-complete", "jitter-stratified", "sample-from-m",
               "cluster1d", "ccd2d", "ccdk")
_FAMILIES = ("huber", "jitter", "cluster1d", "ccd2d", "ccdk")


def _add_common(parser, *, n_required=True, mode_default="stratified"):
    parser.add_argument("--nu", type=float, required=True,
                        help="bias weight in (0, 1)")
    parser.add_argument("--c", type=float, default=None,
                        help="cluster fraction; defaults to nu^k for the family")
    parser.add_argument("--n", type=int, default=None, required=n_required,
                        help="number of design points")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--mode", choices=_MODES, default=mode_default,
                        help="sampling mode")
    parser.add_argument("--out", type=Path, default=None,
                        help="design file; a .loss.json sibling is written too")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="design file format")
    parser.add_argument("--plot", type=Path, default=None,
                        help="write a figure (format from the extension)")


def _resolve_c(args, k: int, family: str) -> float:
    fixed = args.nu**k
    if args.c is None:
        return fixed
    if family == "jitter":
        return args.c
    if abs(args.c - fixed) > 1e-12:
        raise ValueError(
            f"{family} fixes c = nu^{k} = {fixed:.6g}; "
            "only the jitter family treats c as free")
    return fixed


def _loss_sibling(out: Path) -> Path:
    return out.with_suffix(".loss.json")


def _emit_design(args, design: Design, payload: dict, *,
                 density=None, geometry: dict | None = None) -> int:
    text = json.dumps(jsonable(payload), indent=2)
    if args.out is not None:
        if args.format == "csv":
            write_design_csv(design, args.out)
        else:
            write_json(design_json_payload(design), args.out)
        write_json(payload, _loss_sibling(args.out))
    print(text)
    if args.plot is not None:
        from .plots import plot_design

        plot_design(design, args.plot, density=density, geometry=geometry)
    return 0


def _design_report(basis, density, design, nu):
    context = LossContext(basis, density)
    report = context.design_loss(design, nu)
    max_report = context.max_loss(nu)
    extras = {
        "density_max_loss": {
            "variance_term": max_report.variance_term,
            "bias_term": max_report.bias_term,
            "combined": max_report.combined,
        },
    }
    return report, extras


def cmd_huber(args) -> int:
    alpha = alpha_from_nu(args.nu)
    density = HuberDensity(alpha)
    payload = {
        "schema_version": 1,
        "nu": args.nu,
        "alpha": alpha,
        "normalizer": density.d,
        "second_moment": density.second_moment,
        "max_loss": minimax_loss(args.nu, alpha),
    }
    if args.out is not None:
        write_json(payload, args.out)
    print(json.dumps(jsonable(payload), indent=2))
    if args.plot is not None:
        from .plots import plot_density_1d

        plot_density_1d(density, args.plot)
    return 0


def cmd_jitter(args) -> int:
    c = _resolve_c(args, 1, "jitter")
    alpha = alpha_from_nu(args.nu)
    quantiles = cardano_quantiles(args.n, alpha)
    density = jitter_density(quantiles, c)
    design = sample_jitter(density, args.mode, args.n, args.seed)
    report, extras = _design_report(RegressorBasis.polynomial(1), density,
                                    design, args.nu)
    closed = slr_closed_losses(args.nu, c, alpha=alpha, quantiles=quantiles)
    extras.update({
        "alpha": alpha,
        "lambda2": closed.second_moment,
        "gamma0": closed.bias_constant,
        "max_loss_slr": closed.minimax,
        "max_loss_density": closed.jittered,
    })
    payload = loss_payload(nu=args.nu, c=c, n=args.n, seed=args.seed,
                           strategy=design.strategy,
                           variance_term=report.variance_term,
                           bias_term=report.bias_term,
                           combined=report.combined, extras=extras)
    return _emit_design(args, design, payload, density=density)


def cmd_cluster1d(args) -> int:
    c = _resolve_c(args, 1, "cluster1d")
    density = cluster_density(degree=args.degree, c=c)
    design = sample_cluster(density, args.mode, args.n, args.seed)
    report, extras = _design_report(RegressorBasis.polynomial(args.degree),
                                    density, design, args.nu)
    extras["degree"] = args.degree
    extras["support"] = density.support.tolist()
    if args.mode == "stratified":
        extras["counts"] = largest_remainder_counts(density.weights, args.n).tolist()
    payload = loss_payload(nu=args.nu, c=c, n=args.n, seed=args.seed,
                           strategy=design.strategy,
                           variance_term=report.variance_term,
                           bias_term=report.bias_term,
                           combined=report.combined, extras=extras)
    return _emit_design(args, design, payload, density=density)


def cmd_ccd2d(args) -> int:
    c = _resolve_c(args, 2, "ccd2d")
    density = build_ccd2d(args.nu)
    design = sample_ccd2d(density, args.n, args.seed, args.mode)
    report, extras = _design_report(RegressorBasis.full_second_order(2),
                                    density, design, args.nu)
    geometry = density.geometry_payload()
    extras["geometry"] = geometry
    if args.mode == "stratified":
        extras["counts"] = ccd_allocation(density.weights, args.n).tolist()
    payload = loss_payload(nu=args.nu, c=c, n=args.n, seed=args.seed,
                           strategy=design.strategy,
                           variance_term=report.variance_term,
                           bias_term=report.bias_term,
                           combined=report.combined, extras=extras)
    return _emit_design(args, design, payload, geometry=geometry)


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_ccdk(args) -> int:
    if args.k < 3:
        raise ValueError("ccdk needs k >= 3; use ccd2d for k = 2")
    c = _resolve_c(args, args.k, "ccdk")
    weights = _parse_floats(args.weights) if args.weights else None
    density = build_ccdk(args.k, args.nu, weights=weights)
    counts = None
    if args.counts:
        counts = [int(v) for v in args.counts.split(",") if v.strip()]
        n = int(sum(counts))
    else:
        n = args.n
        if n is None:
            raise ValueError("ccdk needs --n or --counts")
    design = sample_ccdk(density, n, args.seed, args.mode, counts=counts)
    report, extras = _design_report(RegressorBasis.full_second_order(args.k),
                                    density, design, args.nu)
    geometry = density.geometry_payload()
    extras["geometry"] = geometry
    extras["k"] = args.k
    if counts is not None:
        extras["counts"] = list(counts)
    elif args.mode == "stratified":
        extras["counts"] = ccd_allocation(density.weights, n).tolist()
    payload = loss_payload(nu=args.nu, c=c, n=n, seed=args.seed,
                           strategy=design.strategy,
                           variance_term=report.variance_term,
                           bias_term=report.bias_term,
                           combined=report.combined, extras=extras)
    return _emit_design(args, design, payload, geometry=geometry)


def _family_density(args, n_points: int):
    """Build the named density and matching basis for ``loss``."""
    family = args.family
    if family == "huber":
        return RegressorBasis.polynomial(1), HuberDensity.from_nu(args.nu), None
    if family == "jitter":
        c = _resolve_c(args, 1, "jitter")
        bins = args.n if args.n is not None else n_points
        quantiles = cardano_quantiles(bins, alpha_from_nu(args.nu))
        return RegressorBasis.polynomial(1), jitter_density(quantiles, c), c
    if family == "cluster1d":
        c = _resolve_c(args, 1, "cluster1d")
        return (RegressorBasis.polynomial(args.degree),
                cluster_density(degree=args.degree, c=c), c)
    if family == "ccd2d":
        c = _resolve_c(args, 2, "ccd2d")
        return RegressorBasis.full_second_order(2), build_ccd2d(args.nu), c
    if family == "ccdk":
        if args.k < 3:
            raise ValueError("ccdk needs k >= 3; use ccd2d for k = 2")
        c = _resolve_c(args, args.k, "ccdk")
        weights = _parse_floats(args.weights) if args.weights else None
        return (RegressorBasis.full_second_order(args.k),
                build_ccdk(args.k, args.nu, weights=weights), c)
    raise ValueError(f"unknown family {family!r}")  # pragma: no cover


def cmd_loss(args) -> int:
    points = read_design_points(args.design)
    basis, density, c = _family_density(args, points.shape[0])
    if points.shape[1] != density.space.dim:
        raise ValueError(
            f"design has {points.shape[1]} coordinates but the {args.family} "
            f"density lives in {density.space.dim}")
    design = Design(points=points, strategy="from-file")
    report, extras = _design_report(basis, density, design, args.nu)
    payload = loss_payload(nu=args.nu, c=c, n=design.n, seed=None,
                           strategy=f"loss:{args.family}",
                           variance_term=report.variance_term,
                           bias_term=report.bias_term,
                           combined=report.combined, extras=extras)
    if args.out is not None:
        write_json(payload, args.out)
    print(json.dumps(jsonable(payload), indent=2))
    return 0


def cmd_simulate(args) -> int:
    config = ExperimentConfig(
        strategy=args.strategy, nu=args.nu, n=args.n, reps=args.reps,
        seed=args.seed, c=args.c, mode=args.mode, degree=args.degree,
        k=args.k, sigma2=args.sigma2, tau=args.tau,
    )
    result = run_experiment(config)
    payload = summary_payload(result)
    if args.out is not None:
        prefix = Path(args.out)
        write_json(payload, prefix.with_name(prefix.name + ".summary.json"))
        write_replicates_csv(result.estimate,
                             prefix.with_name(prefix.name + ".replicates.csv"))
    print(json.dumps(jsonable(payload), indent=2))
    if args.plot is not None:
        from .plots import plot_loss_histogram

        plot_loss_histogram(result.estimate.values, args.plot,
                            reference=result.summary.reference)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustdesign",
        description="Random experimental designs robust to model contamination.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("huber", help="minimax density for straight-line fits")
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--plot", type=Path, default=None)
    p.set_defaults(handler=cmd_huber)

    p = sub.add_parser("jitter", help="jittered quantile design on [-1, 1]")
    _add_common(p)
    p.set_defaults(handler=cmd_jitter)

    p = sub.add_parser("cluster1d", help="clustered polynomial design on [-1, 1]")
    _add_common(p)
    p.add_argument("--degree", type=int, choices=(1, 2, 3), default=1)
    p.set_defaults(handler=cmd_cluster1d)

    p = sub.add_parser("ccd2d", help="tile-based composite design on the square")
    _add_common(p)
    p.set_defaults(handler=cmd_ccd2d)

    p = sub.add_parser("ccdk", help="ball-based composite design in k dimensions")
    _add_common(p, n_required=False)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--weights", type=str, default=None,
                   help="comma separated site weights")
    p.add_argument("--counts", type=str, default=None,
                   help="comma separated per-site counts (overrides --n)")
    p.set_defaults(handler=cmd_ccdk)

    p = sub.add_parser("loss", help="evaluate a stored design against a density")
    p.add_argument("--design", type=Path, required=True, help="design CSV")
    p.add_argument("--family", choices=_FAMILIES, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--n", type=int, default=None,
                   help="bin count for the jitter family (default: design size)")
    p.add_argument("--degree", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--weights", type=str, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_loss)

    p = sub.add_parser("simulate", help="replicated loss experiment")
    p.add_argument("--strategy", choices=_STRATEGIES, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=_MODES, default=None)
    p.add_argument("--degree", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=None,
                   help="prefix for .summary.json and .replicates.csv")
    p.add_argument("--plot", type=Path, default=None)
    p.set_defaults(handler=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.handler(args) or 0)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
