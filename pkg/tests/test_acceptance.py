"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line (bypassing capture so the lines are
visible in any run) and then asserts. Frozen constants are calibrated
against independent closed forms or quadrature; Monte Carlo checks use
fixed Philox seeds, so every value here is reproducible bit for bit.
"""

import math

import numpy as np
from scipy import special

from robustdesign.ccd import (
    SphericalBeta,
    build_ccd2d,
    build_ccdk,
    ccd_allocation,
    sample_ccd2d,
    sample_ccdk,
)
from robustdesign.cluster1d import cluster_density, sample_cluster
from robustdesign.harness import ExperimentConfig, run_experiment
from robustdesign.jitter import (
    NU_FLOOR,
    HuberDensity,
    alpha_from_nu,
    cardano_quantiles,
    jitter_density,
    minimax_loss,
)
from robustdesign.loss import LossContext
from robustdesign.model import Design, RegressorBasis
from robustdesign.rng import rng_from_seed, substream


def _report(capsys, num: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


def test_criterion_01_closed_form_slr_loss(capsys):
    alpha = alpha_from_nu(0.5)
    loss = minimax_loss(0.5, alpha)
    ok = abs(loss - 2.31) <= 0.01 and abs(alpha - (-0.325)) <= 0.002
    _report(capsys, 1, ok,
            f"max loss {loss:.7f} (target 2.31 +/- 0.01), "
            f"alpha {alpha:.7f} (target -0.325 +/- 0.002)")


def test_criterion_02_zero_alpha_limit(capsys):
    alpha = alpha_from_nu(NU_FLOOR)
    density = HuberDensity(min(alpha, 0.0))
    x = np.linspace(-1.0, 1.0, 401)
    gap = float(np.max(np.abs(density.pdf(x) - 1.5 * x**2)))
    ok = abs(alpha) <= 1e-10 and gap <= 1e-8
    _report(capsys, 2, ok,
            f"alpha at floor {alpha:.3e} (|.| <= 1e-10), "
            f"max |pdf - 3x^2/2| = {gap:.3e}")


def test_criterion_03_monte_carlo_against_minimax_density(capsys):
    res = run_experiment(ExperimentConfig(
        strategy="sample-from-m", nu=0.5, n=10, reps=1000, seed=3))
    mean = res.summary.mean
    floor = res.parts.references["max_loss_slr"]
    ok = abs(mean - 2.72) <= 0.10 and mean > floor
    _report(capsys, 3, ok,
            f"mean loss {mean:.4f} (target 2.72 +/- 0.10), "
            f"floor I_nu(xi) {floor:.4f}")


def test_criterion_04_stratified_jitter_dominance(capsys):
    details = []
    ok = True
    for c in (0.1, 0.5):
        strat = run_experiment(ExperimentConfig(
            strategy="jitter-stratified", nu=0.5, n=10, reps=1000,
            seed=3, c=c))
        compl = run_experiment(ExperimentConfig(
            strategy="jitter-complete", nu=0.5, n=10, reps=1000,
            seed=3, c=c))
        target = strat.parts.references["max_loss_density"]
        rel = abs(strat.summary.mean - target) / target
        ok = (ok and strat.summary.mean < compl.summary.mean
              and strat.summary.sd < compl.summary.sd and rel <= 0.02)
        details.append(
            f"c={c}: strat {strat.summary.mean:.4f}/{strat.summary.sd:.4f} "
            f"vs compl {compl.summary.mean:.4f}/{compl.summary.sd:.4f}, "
            f"off target by {100 * rel:.3f}%")
    _report(capsys, 4, ok, "; ".join(details))


def test_criterion_05_two_point_cluster_loss(capsys):
    ctx = LossContext(RegressorBasis.polynomial(1),
                      cluster_density(degree=1, c=0.5))
    combined = ctx.max_loss(0.5).combined
    ok = abs(combined - 2.804) <= 0.01
    _report(capsys, 5, ok, f"I_.5(Phi) = {combined:.6f} (target 2.804 +/- 0.01)")


def test_criterion_06_loss_table_reproduction(capsys):
    table = {
        0.5: ((2.94, 4.65, 6.49), (2.67, 2.62, 2.54),
              (2.80, 3.64, 4.51), 0.005),
        0.04: ((2.67, 4.27, 6.02), (319.0, 213.0, 193.0),
               (15.3, 12.6, 13.5), 0.05),
    }
    worst = {"var": 0.0, "bias": 0.0, "comb": 0.0}
    ok = True
    for nu, (var_t, bias_t, comb_t, comb_tol) in table.items():
        for degree in (1, 2, 3):
            ctx = LossContext(RegressorBasis.polynomial(degree),
                              cluster_density(degree=degree, c=nu))
            rep = ctx.max_loss(nu)
            i = degree - 1
            rel_var = abs(rep.variance_term - var_t[i]) / var_t[i]
            rel_bias = abs(rep.bias_term - bias_t[i]) / bias_t[i]
            recomposed = (1 - nu) * rep.variance_term + nu * rep.bias_term
            abs_comb = abs(recomposed - comb_t[i])
            worst["var"] = max(worst["var"], rel_var)
            worst["bias"] = max(worst["bias"], rel_bias)
            worst["comb"] = max(worst["comb"], abs_comb / comb_tol)
            ok = (ok and rel_var <= 0.01 and rel_bias <= 0.02
                  and abs_comb <= comb_tol)
    _report(capsys, 6, ok,
            f"worst rel err: variance {100 * worst['var']:.3f}% (<=1%), "
            f"bias {100 * worst['bias']:.3f}% (<=2%), "
            f"combined at {100 * worst['comb']:.1f}% of rounding budget")


def test_criterion_07_random_design_identities(capsys):
    alpha = alpha_from_nu(0.5)

    # constant bias term over random jittered designs
    quantiles = cardano_quantiles(10, alpha)
    dens = jitter_density(quantiles, 0.5)
    ctx = LossContext(RegressorBasis.polynomial(1), dens)
    rng = rng_from_seed(13)
    gamma_drift = 0.0
    for _ in range(100):
        x = quantiles + (2.0 * rng.random(10) - 1.0) * dens.half_width
        gamma = ctx.design_bias_term(Design(points=x))
        gamma_drift = max(gamma_drift, abs(gamma - dens.bias_constant))

    # loss decomposition for random designs from every family
    families = []
    for c in (0.1, 0.5):
        jd = jitter_density(cardano_quantiles(10, alpha), c)
        families.append((RegressorBasis.polynomial(1), jd, 10,
                         lambda i, jd=jd, rng=rng: Design(
                             points=jd.quantiles
                             + (2.0 * rng.random(10) - 1.0) * jd.half_width)))
    for degree in (1, 2, 3):
        cd = cluster_density(degree=degree, c=0.5)
        families.append((RegressorBasis.polynomial(degree), cd, 30,
                         lambda i, cd=cd, degree=degree: sample_cluster(
                             cd, "complete", 30, (degree, i))))
    d2 = build_ccd2d(0.5)
    families.append((RegressorBasis.full_second_order(2), d2, 50,
                     lambda i: sample_ccd2d(d2, 50, (9, i), "stratified")))
    d3 = build_ccdk(3, 0.5)
    families.append((RegressorBasis.full_second_order(3), d3, 80,
                     lambda i: sample_ccdk(d3, 80, (10, i), "stratified")))
    decomp_err = 0.0
    for basis, density, n, draw in families:
        fam_ctx = LossContext(basis, density)
        psi = fam_ctx.contaminant(1.0, n)
        for i in range(100):
            d = draw(i)
            rep = fam_ctx.design_loss(d, 0.5)
            direct = fam_ctx.integrated_mse(d, psi, sigma2=1.0)
            recon = rep.variance_term / n + rep.bias_term / n
            decomp_err = max(decomp_err, abs(direct - recon))

    # least favourable contaminant: orthogonal to the model, norm tau^2/n
    tau, n = 1.3, 17
    ortho_err = 0.0
    norm_err = 0.0
    for basis, density, _, _ in families[1:]:
        fam_ctx = LossContext(basis, density)
        psi = fam_ctx.contaminant(tau, n)
        resid = (fam_ctx.moments.M @ psi.weight
                 - fam_ctx.moments.A @ psi.proj) * tau / math.sqrt(n)
        ortho_err = max(ortho_err, float(np.max(np.abs(resid))))
        norm_err = max(norm_err, abs(psi.l2_norm_sq() - tau**2 / n))
    huber_ctx = LossContext(RegressorBasis.polynomial(1),
                            HuberDensity.from_nu(0.5))
    psi = huber_ctx.contaminant(tau, n)
    resid = (huber_ctx.moments.M @ psi.weight
             - huber_ctx.moments.A @ psi.proj) * tau / math.sqrt(n)
    ortho_err = max(ortho_err, float(np.max(np.abs(resid))))
    norm_err = max(norm_err, abs(psi.l2_norm_sq() - tau**2 / n))

    ok = gamma_drift <= 1e-8 and decomp_err <= 1e-10 and \
        ortho_err <= 1e-8 and norm_err <= 1e-8
    _report(capsys, 7, ok,
            f"gamma drift {gamma_drift:.2e} (<=1e-8), "
            f"decomposition err {decomp_err:.2e} (<=1e-10), "
            f"orthogonality {ortho_err:.2e} / norm {norm_err:.2e} (<=1e-8)")


def test_criterion_08_tile_geometry_and_allocation(capsys):
    density = build_ccd2d(0.5)
    areas = np.asarray(density.geometry_payload()["tile_areas"])
    total_err = abs(areas.sum() - 16.0)
    axial_err = float(np.max(np.abs(areas[4:8] - 3.5 * (math.sqrt(2) - 1))))
    centre_err = abs(areas[8] - (2.0 - 2.0 * (math.sqrt(2) - 1) ** 2))
    counts = ccd_allocation(density.weights, 50)
    counts_ok = counts.tolist() == [7, 7, 7, 7, 5, 5, 5, 5, 2]
    ok = (total_err <= 1e-9 and axial_err <= 1e-6 and centre_err <= 1e-6
          and counts_ok)
    _report(capsys, 8, ok,
            f"area sum err {total_err:.1e} (<=1e-9), axial err {axial_err:.1e}, "
            f"centre err {centre_err:.1e} (<=1e-6), n=50 counts "
            f"{counts.tolist()}")


def test_criterion_09_spherical_sampler(capsys):
    def ball_volume(k):
        return math.pi ** (k / 2) / special.gamma(k / 2 + 1)

    worst_ks = 0.0
    worst_chi2 = 0.0
    worst_norm = 0.0
    chi2_crit = float(special.chdtri(35, 0.01))
    for k in (2, 3, 5):
        for b in (2, 8):
            dist = SphericalBeta(center=np.zeros(k), radius=1.0,
                                 shape=float(b))
            draws = dist.sample(100_000, substream(77, k, b))
            rho = np.sort(np.linalg.norm(draws, axis=1))
            cdf = special.betainc(k, b, rho)
            steps = np.arange(rho.size + 1) / rho.size
            ks = max(float(np.max(np.abs(cdf - steps[1:]))),
                     float(np.max(np.abs(cdf - steps[:-1]))))
            worst_ks = max(worst_ks, ks)
            if k == 2:
                ang = np.arctan2(draws[:, 1], draws[:, 0])
                cnt, _ = np.histogram(ang, bins=36, range=(-math.pi, math.pi))
                expected = draws.shape[0] / 36
                worst_chi2 = max(worst_chi2,
                                 float(((cnt - expected) ** 2 / expected).sum()))
            # importance estimate of the total mass from a uniform proposal
            rng = substream(4, k, b)
            m = 1_500_000
            z = rng.standard_normal((m, k))
            z /= np.linalg.norm(z, axis=1, keepdims=True)
            pts = z * (rng.random(m) ** (1.0 / k))[:, None]
            norm = float(np.mean(dist.pdf(pts))) * ball_volume(k)
            worst_norm = max(worst_norm, abs(norm - 1.0))
    ok = worst_ks <= 0.006 and worst_chi2 < chi2_crit and worst_norm <= 0.01
    _report(capsys, 9, ok,
            f"worst KS {worst_ks:.4f} (<=0.006), worst angular chi2 "
            f"{worst_chi2:.1f} (crit {chi2_crit:.1f}), worst |norm-1| "
            f"{worst_norm:.4f} (<=0.01)")


def test_criterion_10_three_factor_configuration(capsys):
    density = build_ccdk(3, 0.5)
    sites_ok = density.p_sites == 15
    r0_ok = density.base_radius == math.sqrt(3.0) / 2.0
    counts = ccd_allocation(density.weights, 80)
    counts_ok = counts.tolist() == [5] * 14 + [10]
    design = sample_ccdk(density, 80, 0, "stratified")
    max_rel = 0.0
    start = 0
    for i, cnt in enumerate(counts):
        block = design.points[start:start + cnt]
        start += cnt
        dist = np.linalg.norm(block - density.sites[i], axis=1)
        max_rel = max(max_rel, float(dist.max()) / density.radius)
    contained = max_rel <= 1.0 + 1e-12
    ok = sites_ok and r0_ok and counts_ok and contained
    _report(capsys, 10, ok,
            f"sites {density.p_sites} (=15), r0 {density.base_radius:.10f} "
            f"(= sqrt(3)/2: {r0_ok}), n=80 counts 14x5+10: {counts_ok}, "
            f"max point distance {max_rel:.4f} of ball radius")
