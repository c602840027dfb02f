import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustdesign.cluster1d import (
    beta_mode_params,
    build_partition,
    cluster_density,
    ioptimal_support,
    largest_remainder_counts,
    sample_cluster,
)
from robustdesign.loss import worst_case_loss
from robustdesign.model import RegressorBasis
from robustdesign.quadrature import gl_nodes
from robustdesign.rng import rng_from_seed


def test_supports():
    np.testing.assert_allclose(ioptimal_support(1), [-1.0, 1.0])
    np.testing.assert_allclose(ioptimal_support(2), [-1.0, 0.0, 1.0])
    r = 1.0 / math.sqrt(5.0)
    np.testing.assert_allclose(ioptimal_support(3), [-1.0, -r, r, 1.0])
    with pytest.raises(ValueError):
        ioptimal_support(4)


def test_partition_midpoints():
    t = ioptimal_support(2)
    breaks = build_partition(t)
    np.testing.assert_allclose(breaks, [-1.0, -0.5, 0.5, 1.0])
    t4 = ioptimal_support(3)
    b4 = build_partition(t4)
    r = 1.0 / math.sqrt(5.0)
    np.testing.assert_allclose(b4, [-1.0, -(1 + r) / 2, 0.0, (1 + r) / 2, 1.0])


def test_partition_rejects_support_outside_interval():
    with pytest.raises(ValueError):
        build_partition(np.array([-1.5, 0.0, 1.0]))
    with pytest.raises(ValueError):
        build_partition(np.array([0.0, 0.0, 1.0]))  # not strictly increasing


def test_beta_mode_params_cases():
    a, b = beta_mode_params(0.25, 0.5)
    assert b == pytest.approx(2.0)  # 1/c
    assert a == pytest.approx(1 + (2 - 1) * 0.25 / 0.75)
    a2, b2 = beta_mode_params(0.75, 0.5)
    assert (a2, b2) == pytest.approx((b, a))  # mirrored
    a3, b3 = beta_mode_params(0.5, 0.5)
    assert (a3, b3) == pytest.approx((2.0, 2.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99),
       st.floats(min_value=0.05, max_value=1.0))
def test_beta_mode_is_delta(delta, c):
    # mode of Beta(a, b) at (a-1)/(a+b-2) reproduces the cluster point
    a, b = beta_mode_params(delta, c)
    if a + b > 2.0 + 1e-9:
        mode = (a - 1.0) / (a + b - 2.0)
        assert mode == pytest.approx(delta, abs=1e-9)


def test_cluster_point_positions_are_c_invariant():
    # each cluster's interior position delta depends on geometry only
    for degree in (1, 2, 3):
        base = cluster_density(degree=degree, c=0.3)
        other = cluster_density(degree=degree, c=0.8)
        np.testing.assert_allclose(base.deltas, other.deltas, atol=1e-14)


def test_density_normalized():
    from scipy import integrate

    for degree in (1, 2, 3):
        dens = cluster_density(degree=degree, c=0.5)
        total = 0.0
        for lo, hi in zip(dens.lefts, dens.rights):
            val, _ = integrate.quad(lambda x: float(dens.pdf(x)[0]), lo, hi,
                                    limit=200)
            total += val
        assert total == pytest.approx(1.0, abs=1e-9)


def test_weights_default_to_cell_lengths():
    dens = cluster_density(degree=2, c=0.5)
    np.testing.assert_allclose(dens.weights, np.diff(dens.breaks) / 2.0)
    assert float(np.sum(dens.weights)) == pytest.approx(1.0)


def test_custom_weights_validated():
    with pytest.raises(ValueError):
        cluster_density(degree=1, c=0.5, weights=[0.7, 0.2])


def _jacobi_cell_moments(dens, basis):
    # Gauss-Jacobi with the cell's own beta weight integrates the
    # polynomial factor exactly: an independent machine-precision oracle
    from scipy.special import beta as beta_fn, roots_jacobi

    p = basis.p
    M = np.zeros((p, p))
    K = np.zeros((p, p))
    a_all, b_all = dens.shape_params
    for i in range(dens.p):
        a, b = a_all[i], b_all[i]
        left, length, w_i = dens.lefts[i], dens.lengths[i], dens.weights[i]
        for shapes, target, scale in (
            ((a, b), M, w_i / beta_fn(a, b)),
            ((2 * a - 1, 2 * b - 1), K,
             w_i**2 / (length * beta_fn(a, b) ** 2)),
        ):
            aa, bb = shapes
            x, wq = roots_jacobi(12, bb - 1.0, aa - 1.0)
            u = (x + 1.0) / 2.0
            pts = left + length * u
            F = basis.eval(pts)
            wts = wq * 2.0 ** (1.0 - aa - bb)
            target += scale * (F * wts[:, None]).T @ F
    return M, K


def test_moments_match_jacobi_quadrature():
    basis = RegressorBasis.polynomial(3)
    for c in (0.2, 0.5, 0.9):
        dens = cluster_density(degree=3, c=c)
        M, K = dens.basis_moments(basis)
        Mj, Kj = _jacobi_cell_moments(dens, basis)
        np.testing.assert_allclose(M, Mj, atol=1e-12)
        np.testing.assert_allclose(K, Kj, atol=1e-12)


def test_moments_against_gl_quadrature_path():
    # the package's own quadrature fallback should approach the exact path
    basis = RegressorBasis.polynomial(2)
    dens = cluster_density(degree=2, c=0.5)
    M, K = dens.basis_moments(basis)
    Mq, Kq = dens._quadrature_moments(basis, order=400)
    np.testing.assert_allclose(M, Mq, atol=2e-6)
    np.testing.assert_allclose(K, Kq, atol=2e-5)


def test_table_values_linear():
    dens = cluster_density(degree=1, c=0.5)
    rep = worst_case_loss(RegressorBasis.polynomial(1), dens, 0.5)
    assert rep.combined == pytest.approx(2.804, abs=0.01)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=1, max_size=8),
       st.integers(min_value=1, max_value=200))
def test_largest_remainder_sums(raw, n):
    w = np.asarray(raw) / np.sum(raw)
    counts = largest_remainder_counts(w, n)
    assert counts.sum() == n
    assert np.all(counts >= 0)
    # never off by more than one from the exact share
    assert np.max(np.abs(counts - n * w)) < 1.0 + 1e-9


def test_largest_remainder_frozen_cases():
    # ties go to the lower index
    np.testing.assert_array_equal(
        largest_remainder_counts(np.array([0.3, 0.5, 0.2]), 10), [3, 5, 2])
    dens = cluster_density(degree=3, c=0.5)
    np.testing.assert_array_equal(largest_remainder_counts(dens.weights, 10),
                                  [1, 4, 4, 1])


def test_sample_stratified_counts():
    dens = cluster_density(degree=2, c=0.5)
    d = sample_cluster(dens, "stratified", 10, 3)
    assert d.n == 10 and d.strategy == "cluster-stratified"
    x = d.points[:, 0]
    idx = np.searchsorted(dens.breaks, x, side="right") - 1
    idx = np.clip(idx, 0, dens.p - 1)
    counts = np.bincount(idx, minlength=dens.p)
    np.testing.assert_array_equal(counts, largest_remainder_counts(dens.weights, 10))


def test_sample_stratified_needs_enough_points():
    dens = cluster_density(degree=3, c=0.5)
    with pytest.raises(ValueError):
        sample_cluster(dens, "stratified", 3, 0)


def test_sample_complete_in_support():
    dens = cluster_density(degree=1, c=0.3)
    d = sample_cluster(dens, "complete", 500, 11)
    assert d.n == 500
    assert np.all(dens.pdf(d.points[:, 0]) >= 0.0)
    assert np.all(d.points[:, 0] >= -1.0) and np.all(d.points[:, 0] <= 1.0)
    with pytest.raises(ValueError):
        sample_cluster(dens, "nope", 10, 0)


def test_sample_deterministic():
    dens = cluster_density(degree=1, c=0.5)
    a = sample_cluster(dens, "complete", 40, (2, 5))
    b = sample_cluster(dens, "complete", 40, (2, 5))
    np.testing.assert_array_equal(a.points, b.points)


def test_sample_matches_density_histogram():
    # empirical cell frequencies track the weights
    dens = cluster_density(degree=2, c=0.5)
    d = sample_cluster(dens, "complete", 30_000, 8)
    x = d.points[:, 0]
    idx = np.clip(np.searchsorted(dens.breaks, x, side="right") - 1, 0, dens.p - 1)
    freq = np.bincount(idx, minlength=dens.p) / d.n
    np.testing.assert_allclose(freq, dens.weights, atol=0.01)
