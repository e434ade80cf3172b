import math

import numpy as np
import pytest

import lagspec


def test_autocov_matches_numpy():
    x = lagspec.sample_entry_matrix(16, 16, 3, seed=7)
    y = lagspec.build_autocov(x, 3)
    expected = x[:, 3:] @ x[:, :-3].conj().T
    assert np.abs(y - expected).max() < 1e-13


def test_sampling_is_seeded():
    a = lagspec.sample_entry_matrix(8, 8, 1, seed=11, trial=2)
    b = lagspec.sample_entry_matrix(8, 8, 1, seed=11, trial=2)
    c = lagspec.sample_entry_matrix(8, 8, 1, seed=11, trial=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_singular_values_match_numpy():
    x = lagspec.sample_entry_matrix(20, 30, 1, seed=3)
    sv = lagspec.singular_values(x)
    assert np.allclose(sv, np.linalg.svd(x, compute_uv=False), atol=1e-12)


def test_limit_law_endpoints():
    assert lagspec.g(1.0, 1.0) == pytest.approx(2.0, abs=1e-12)
    assert lagspec.radial_cdf(lagspec.support_radius(1.0), 1.0) == 1.0
    assert lagspec.radial_cdf(0.0, 2.0) == pytest.approx(0.5, abs=1e-12)
    y = lagspec.g(0.3, 1.0)
    assert lagspec.g_inverse(y, 1.0) == pytest.approx(0.3, abs=1e-10)


def test_fixed_point_large_t_asymptote():
    sol = lagspec.solve_s(1.0, 10.0, 1.0, 0.5)
    assert sol["residual"] <= 1e-12
    assert sol["s"] == pytest.approx(10.0 / 101.0, rel=0.05)


def test_errors_are_mapped():
    x = lagspec.sample_entry_matrix(8, 8, 1, seed=1)
    with pytest.raises(ValueError):
        lagspec.linearization(x, 0.0, 1)


def test_esd_statistic_small():
    x = lagspec.sample_entry_matrix(128, 128, 1, seed=5)
    ks = lagspec.radial_ks(lagspec.eigenvalues(lagspec.build_autocov(x, 1)), 1.0)
    assert 0.0 < ks < 0.15
    assert math.isfinite(ks)
