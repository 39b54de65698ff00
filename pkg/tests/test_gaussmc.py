import numpy as np
import pytest

import oracles
from hdustat.errors import InputError
from hdustat.gaussmc import (
    BLOCK_PATHS,
    RngSpec,
    bridge_grid_size,
    bridge_paths,
    brownian_bridge_sups,
    gaussian_partial_sums,
    psd_sqrt,
    sn_limit_sample,
    sup_quantile,
    upper_quantile,
)

# 0.95 quantile of the Kolmogorov distribution, solved from the series CDF
KOLMOGOROV_Q95 = 1.358098639323


def test_kolmogorov_oracle_value():
    assert oracles.kolmogorov_cdf(KOLMOGOROV_Q95) == pytest.approx(0.95, abs=1e-12)


def test_psd_sqrt_identity_and_diagonal():
    root, clipped = psd_sqrt(np.eye(3))
    np.testing.assert_allclose(root, np.eye(3), atol=1e-15)
    assert clipped == 0.0
    root, _ = psd_sqrt(np.diag([4.0, 9.0]))
    np.testing.assert_allclose(root, np.diag([2.0, 3.0]), atol=1e-14)


def test_psd_sqrt_clips_negative_eigenvalues():
    a = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3 and -1
    root, clipped = psd_sqrt(a)
    assert clipped == pytest.approx(1.0)
    np.testing.assert_allclose(root @ root, np.full((2, 2), 1.5), atol=1e-12)


def test_psd_sqrt_random_reconstruction(rng):
    for _ in range(20):
        b = rng.standard_normal((5, 3))
        a = b @ b.T
        root, clipped = psd_sqrt(a)
        np.testing.assert_allclose(root @ root, a, atol=1e-10)
        np.testing.assert_allclose(root, root.T)
        assert clipped < 1e-10


def test_psd_sqrt_rejects():
    with pytest.raises(InputError):
        psd_sqrt(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(InputError):
        psd_sqrt(np.array([[np.nan]]))
    with pytest.raises(InputError):
        psd_sqrt(np.ones((2, 3)))


def test_rngspec_validation_and_independence():
    with pytest.raises(InputError):
        RngSpec(-1)
    a = RngSpec(7).generator().standard_normal(5)
    b = RngSpec(7, 1).generator().standard_normal(5)
    c = RngSpec(7).generator().standard_normal(5)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, c)
    assert RngSpec(7).offset(3) == RngSpec(7, 3)


def test_gaussian_partial_sums_variance():
    root = np.diag([1.0, 2.0])
    ends = np.array([gaussian_partial_sums(root, 50, RngSpec(11, s))[50] for s in range(4000)])
    ratio = ends.var(axis=0) / np.array([1.0, 4.0])
    assert np.all((ratio > 0.94) & (ratio < 1.06))
    path = gaussian_partial_sums(root, 50, RngSpec(11))
    assert path.ks[0] == 1 and len(path) == 50


def test_bridge_endpoints_are_zero():
    paths = bridge_paths(np.array([[1.0, 0.3], [0.3, 2.0]]), 64, 10, RngSpec(3))
    assert paths.shape == (10, 65, 2)
    np.testing.assert_array_equal(paths[:, 0], 0.0)
    np.testing.assert_array_equal(paths[:, -1], 0.0)


def test_bridge_midpoint_covariance():
    root = np.array([[1.0, 0.4], [0.4, 0.5]])
    sigma = root @ root
    paths = bridge_paths(root, 32, 20000, RngSpec(5))
    mid = paths[:, 16]
    target = 4 * (0.5 - 0.25) * sigma
    emp = mid.T @ mid / len(mid)
    # SE of a sample covariance entry: sqrt((s_ii s_jj + s_ij^2) / R)
    se = np.sqrt((np.outer(np.diag(target), np.diag(target)) + target**2) / len(mid))
    assert np.all(np.abs(emp - target) < 5 * se)
    assert np.all(np.abs(mid.mean(axis=0)) < 5 * np.sqrt(np.diag(target) / len(mid)))


def test_bridge_sups_match_materialised_paths():
    root = np.array([[1.0, 0.2], [0.2, 0.7]])
    paths = bridge_paths(root, 40, 700, RngSpec(9))
    expected = np.linalg.norm(paths, axis=2).max(axis=1)
    got = brownian_bridge_sups(root, 40, 700, RngSpec(9)).sup_norms
    np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_upper_quantile_rank():
    values = np.arange(1.0, 21.0)
    assert upper_quantile(values, 0.05) == 19.0
    assert upper_quantile(values, 0.5) == 10.0
    assert upper_quantile(np.arange(20000.0), 0.05) == 18999.0
    with pytest.raises(InputError):
        upper_quantile(values, 0.0)


def test_sup_quantile_needs_paths():
    sups = brownian_bridge_sups(np.eye(1), 16, 50, RngSpec(0))
    with pytest.raises(InputError):
        sup_quantile(sups, 0.05)


def test_sup_quantile_scales_with_root():
    root = np.array([[0.8, 0.1], [0.1, 0.3]])
    base = sup_quantile(brownian_bridge_sups(root, 128, 2000, RngSpec(4)), 0.05)
    double = sup_quantile(brownian_bridge_sups(2 * root, 128, 2000, RngSpec(4)), 0.05)
    triple = sup_quantile(brownian_bridge_sups(3 * root, 128, 2000, RngSpec(4)), 0.05)
    assert double == 2 * base
    assert triple == pytest.approx(3 * base, rel=1e-12)


def test_one_dim_bridge_sup_matches_kolmogorov():
    # sup |B| has the Kolmogorov law; the simulated process is 2B when root = 1
    sups = brownian_bridge_sups(np.eye(1), 2048, 20000, RngSpec(1)).sup_norms / 2.0
    q = upper_quantile(sups, 0.05)
    assert abs(q - KOLMOGOROV_Q95) / KOLMOGOROV_Q95 < 0.02


def test_threads_do_not_change_results():
    root = np.array([[1.0, 0.3], [0.3, 0.6]])
    n_paths = 3 * BLOCK_PATHS + 17
    one = brownian_bridge_sups(root, 64, n_paths, RngSpec(2), threads=1).sup_norms
    four = brownian_bridge_sups(root, 64, n_paths, RngSpec(2), threads=4).sup_norms
    np.testing.assert_array_equal(one, four)
    w1 = sn_limit_sample(1500, 64, RngSpec(2), threads=1)
    w3 = sn_limit_sample(1500, 64, RngSpec(2), threads=3)
    np.testing.assert_array_equal(w1, w3)


def test_bridge_grid_size():
    assert bridge_grid_size(100) == 512
    assert bridge_grid_size(2000) == 2000


def test_sn_limit_symmetry_and_quantiles():
    w = sn_limit_sample(40000, 256, RngSpec(8))
    assert abs(np.median(w)) < 0.05
    qs = [upper_quantile(w, a) for a in (0.1, 0.05, 0.01)]
    assert qs[0] < qs[1] < qs[2]
    # symmetric law: upper and lower tails agree
    assert upper_quantile(-w, 0.05) == pytest.approx(qs[1], rel=0.05)


def test_sn_limit_seed_stability():
    a = upper_quantile(sn_limit_sample(40000, 256, RngSpec(1)), 0.05)
    b = upper_quantile(sn_limit_sample(40000, 256, RngSpec(2)), 0.05)
    assert abs(a - b) / a < 0.05


def test_sn_limit_validation():
    with pytest.raises(InputError):
        sn_limit_sample(1000, 8, RngSpec(0))
    with pytest.raises(InputError):
        sn_limit_sample(10, 64, RngSpec(0))

