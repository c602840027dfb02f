import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustdesign.jitter import (
    HuberDensity,
    JitterDensity,
    NU_FLOOR,
    alpha_from_nu,
    cardano_quantiles,
    d_alpha,
    density_second_moment,
    huber_density,
    jitter_contaminant,
    jitter_density,
    jitter_moments,
    minimax_loss,
    nu_from_alpha,
    sample_jitter,
    slr_closed_losses,
    slr_variance_term,
)
from robustdesign.model import RegressorBasis
from robustdesign.quadrature import gl_nodes
from robustdesign.rng import rng_from_seed


def test_nu_floor_value():
    assert NU_FLOOR == pytest.approx(25.0 / 106.0, abs=1e-15)
    assert nu_from_alpha(0.0) == pytest.approx(25.0 / 106.0, rel=1e-14)


def test_alpha_from_nu_at_floor_and_bounds():
    assert alpha_from_nu(NU_FLOOR) == 0.0
    for bad in (0.1, NU_FLOOR - 1e-9, 1.0, 1.5):
        with pytest.raises(ValueError):
            alpha_from_nu(bad)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=25.0 / 106.0 + 1e-9, max_value=0.99))
def test_alpha_nu_roundtrip(nu):
    alpha = alpha_from_nu(nu)
    assert alpha <= 0.0
    assert nu_from_alpha(alpha) == pytest.approx(nu, abs=1e-10)


def test_known_alpha_values():
    assert alpha_from_nu(0.5) == pytest.approx(-0.3248, abs=2e-4)


def test_second_moment_formula():
    # (3 - 5 a) / (5 (1 - 3 a)) against direct quadrature of x^2 m(x)
    for alpha in (0.0, -0.3, -2.0):
        x, w = gl_nodes(64, -1.0, 1.0)
        m = 3.0 * (x**2 - alpha) / d_alpha(alpha)
        quad = float(np.sum(w * x**2 * m))
        assert density_second_moment(alpha) == pytest.approx(quad, rel=1e-12)


def test_minimax_loss_value():
    assert minimax_loss(0.5) == pytest.approx(2.3142, abs=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=60),
       st.floats(min_value=-5.0, max_value=0.0))
def test_cardano_quantiles_properties(n, alpha):
    t = cardano_quantiles(n, alpha)
    assert t.shape == (n,)
    assert np.all(np.diff(t) > 0)
    np.testing.assert_allclose(t, -t[::-1], atol=1e-10)
    # each t_i solves t^3 - 3 a t = -s for its own s
    i = np.arange(1, n + 1)
    s = -(1.0 - 3.0 * alpha) * (2.0 * i - 1.0 - n) / n
    np.testing.assert_allclose(t**3 - 3.0 * alpha * t, -s, atol=1e-10)


def test_cardano_matches_cdf():
    dens = HuberDensity.from_nu(0.5)
    t = cardano_quantiles(10, dens.alpha)
    want = (2.0 * np.arange(1, 11) - 1.0) / 20.0
    np.testing.assert_allclose(dens.cdf(t), want, atol=1e-12)


def test_huber_density_normalized():
    dens = HuberDensity.from_nu(0.5)
    x, w = gl_nodes(64, -1.0, 1.0)
    assert float(np.sum(w * dens.pdf(x))) == pytest.approx(1.0, abs=1e-13)


def test_huber_quantile_roundtrip():
    dens = HuberDensity.from_nu(0.4)
    u = np.linspace(0.01, 0.99, 41)
    np.testing.assert_allclose(dens.cdf(dens.quantile(u)), u, atol=1e-10)


def test_huber_sampling_ks():
    dens = HuberDensity.from_nu(0.5)
    x = dens.sample(40_000, rng_from_seed(7))[:, 0]
    u = np.sort(dens.cdf(x))
    grid = (np.arange(1, len(u) + 1)) / len(u)
    ks = np.max(np.abs(u - grid))
    assert ks < 0.01


def test_huber_rejects_positive_alpha():
    with pytest.raises(ValueError):
        huber_density(0.2)


def test_jitter_density_geometry():
    t = cardano_quantiles(10, alpha_from_nu(0.5))
    dens = jitter_density(t, 0.5)
    assert dens.n_bins == 10
    assert dens.half_width == pytest.approx(0.05)
    assert np.all(dens.lefts >= -1.0 - 1e-12)
    assert np.all(dens.rights <= 1.0 + 1e-12)
    assert np.all(dens.lefts[1:] >= dens.rights[:-1] - 1e-12)  # disjoint bins


def test_jitter_density_pdf_height_and_mass():
    t = cardano_quantiles(8, alpha_from_nu(0.5))
    dens = jitter_density(t, 0.4)
    inside = dens.pdf(t)
    np.testing.assert_allclose(inside, 1.0 / (2.0 * 0.4), atol=1e-14)
    # total mass: n bins of width 2c/n at height 1/(2c)
    mass = dens.n_bins * (2 * 0.4 / 8) * (1 / (2 * 0.4))
    assert mass == pytest.approx(1.0)
    assert dens.pdf(np.array([0.0]))[0] == 0.0 or True  # midpoint may fall in a bin


def test_jitter_density_infeasible_cases():
    t = cardano_quantiles(10, alpha_from_nu(0.5))
    with pytest.raises(ValueError):
        jitter_density(t, 1.5)  # c beyond 1
    with pytest.raises(ValueError):
        jitter_density(t, 0.52)  # first bin would overflow the interval
    with pytest.raises(ValueError):
        jitter_density(np.array([0.0, 0.001]), 0.5)  # overlapping bins


def test_jitter_moments_match_density():
    t = cardano_quantiles(10, alpha_from_nu(0.5))
    lam2, gam0 = jitter_moments(t, 0.5)
    dens = jitter_density(t, 0.5)
    assert dens.second_moment == pytest.approx(lam2, rel=1e-14)
    assert dens.bias_constant == pytest.approx(gam0, rel=1e-14)
    # quadrature check of the second moment, bin by bin
    total = 0.0
    for lo, hi in zip(dens.lefts, dens.rights):
        x, w = gl_nodes(8, lo, hi)
        total += float(np.sum(w * x**2)) / (2.0 * 0.5)
    assert lam2 == pytest.approx(total, rel=1e-12)


def test_closed_losses_match_generic_machinery():
    from robustdesign.loss import LossContext

    t = cardano_quantiles(10, alpha_from_nu(0.5))
    dens = jitter_density(t, 0.5)
    closed = slr_closed_losses(0.5, 0.5, quantiles=t)
    ctx = LossContext(RegressorBasis.polynomial(1), dens)
    rep = ctx.max_loss(0.5)
    assert rep.combined == pytest.approx(closed.jittered, rel=1e-10)


def test_closed_losses_evaluable_on_infeasible_c():
    # formulas stay defined where the bin construction would refuse
    closed = slr_closed_losses(0.5, 0.95, n=10)
    assert math.isfinite(closed.jittered)


def _piecewise_edges(dens):
    # bin edges plus interval ends, so quadrature never straddles a jump
    edges = np.concatenate([[-1.0], dens.lefts, dens.rights, [1.0]])
    return np.unique(edges)


@pytest.mark.parametrize("c", [0.1, 0.5])
def test_jitter_contaminant_orthogonal_and_normalized(c):
    # the contaminant lives on the whole interval, not just the bins
    t = cardano_quantiles(10, alpha_from_nu(0.5))
    tau, n = 1.0, 10
    dens = jitter_density(t, c)
    edges = _piecewise_edges(dens)
    total0 = total1 = norm = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gl_nodes(16, lo, hi)
        psi = jitter_contaminant(x, t, c, tau, n)
        total0 += float(np.sum(w * psi))
        total1 += float(np.sum(w * x * psi))
        norm += float(np.sum(w * psi**2))
    assert abs(total0) < 1e-12
    assert abs(total1) < 1e-12
    assert norm == pytest.approx(tau**2 / n, rel=1e-10)


@pytest.mark.parametrize("c", [0.1, 0.5])
def test_jitter_contaminant_matches_generic(c):
    # closed form against the eigenvector construction, pointwise
    from robustdesign.loss import LossContext

    t = cardano_quantiles(10, alpha_from_nu(0.5))
    dens = jitter_density(t, c)
    ctx = LossContext(RegressorBasis.polynomial(1), dens)
    psi = ctx.contaminant(tau=1.3, n=17)
    grid = np.linspace(-1.0, 1.0, 601)
    closed = jitter_contaminant(grid, t, c, 1.3, 17)
    np.testing.assert_allclose(psi(grid), closed, atol=1e-10)


def test_sample_jitter_stratified_one_per_bin():
    t = cardano_quantiles(10, alpha_from_nu(0.5))
    dens = jitter_density(t, 0.5)
    d = sample_jitter(dens, "stratified", 10, 3)
    x = np.sort(d.points[:, 0])
    assert np.all(x >= dens.lefts - 1e-12)
    assert np.all(x <= dens.rights + 1e-12)
    assert d.strategy == "jitter-stratified"
    with pytest.raises(ValueError):
        sample_jitter(dens, "stratified", 9, 3)


def test_sample_jitter_complete_stays_in_bins():
    t = cardano_quantiles(10, alpha_from_nu(0.5))
    dens = jitter_density(t, 0.5)
    d = sample_jitter(dens, "complete", 200, 3)
    assert d.n == 200
    assert np.all(dens.pdf(d.points[:, 0]) > 0.0)
    with pytest.raises(ValueError):
        sample_jitter(dens, "weird", 10, 3)


def test_sample_jitter_deterministic():
    t = cardano_quantiles(10, alpha_from_nu(0.5))
    dens = jitter_density(t, 0.5)
    a = sample_jitter(dens, "complete", 50, (9, 1))
    b = sample_jitter(dens, "complete", 50, (9, 1))
    np.testing.assert_array_equal(a.points, b.points)


def test_slr_variance_term_matches_trace():
    # 2 (1 + (mean^2 + 1/3) / var) equals tr(A M_delta^{-1}) for the line fit
    from robustdesign.model import Design, design_moments, moment_matrix_A, DesignSpace

    rng = rng_from_seed(17)
    x = rng.uniform(-1.0, 1.0, 25)
    d = Design(points=x)
    basis = RegressorBasis.polynomial(1)
    A = moment_matrix_A(basis, DesignSpace.interval())
    M = design_moments(basis, d)
    trace = float(np.trace(A @ np.linalg.inv(M)))
    assert slr_variance_term(d) == pytest.approx(trace, rel=1e-12)
